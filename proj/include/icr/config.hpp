#pragma once

// JSON run configuration shared by `simulate` and `sweep`. The layout is documented in
// docs/config.schema.json; validation here enforces the same rules before anything runs.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "icr/csv.hpp"
#include "icr/error.hpp"
#include "icr/harness.hpp"

namespace icr {

inline constexpr const char* config_schema_version = "icr-config/1";

struct RunConfig {
    std::uint64_t seed = 0;
    ModelSpec model;
    std::size_t raters = 5;
    std::optional<SweepConfig> sweep;  ///< present when the file has a "sweep" block
};

namespace detail {

using nlohmann::json;

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) {
        throw InvalidArgument("config: " + where + " must be an object");
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) {
            throw InvalidArgument("config: unknown key '" + key + "' in " + where);
        }
    }
}

inline const json& need(const json& obj, const std::string& where, const char* key)
{
    if (!obj.contains(key)) {
        throw InvalidArgument("config: " + where + " is missing '" + key + "'");
    }
    return obj.at(key);
}

inline double number(const json& v, const std::string& what)
{
    if (!v.is_number()) {
        throw InvalidArgument("config: " + what + " must be a number");
    }
    return v.get<double>();
}

inline std::uint64_t count(const json& v, const std::string& what, std::uint64_t min)
{
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw InvalidArgument("config: " + what + " must be a non-negative integer");
    }
    const auto n = v.get<std::uint64_t>();
    if (n < min) {
        throw InvalidArgument("config: " + what + " must be >= " + std::to_string(min));
    }
    return n;
}

inline std::vector<double> numbers(const json& v, const std::string& what)
{
    if (!v.is_array() || v.empty()) {
        throw InvalidArgument("config: " + what + " must be a non-empty array of numbers");
    }
    std::vector<double> out;
    for (const auto& x : v) {
        out.push_back(number(x, what));
    }
    return out;
}

inline std::vector<std::string> strings(const json& v, const std::string& what)
{
    if (!v.is_array() || v.empty()) {
        throw InvalidArgument("config: " + what + " must be a non-empty array of strings");
    }
    std::vector<std::string> out;
    for (const auto& x : v) {
        if (!x.is_string()) {
            throw InvalidArgument("config: " + what + " must contain strings");
        }
        out.push_back(x.get<std::string>());
    }
    return out;
}

inline bool boolean(const json& v, const std::string& what)
{
    if (!v.is_boolean()) {
        throw InvalidArgument("config: " + what + " must be true or false");
    }
    return v.get<bool>();
}

inline SweepAxis parse_axis(const std::string& s)
{
    if (s == "beta") return SweepAxis::beta;
    if (s == "tau") return SweepAxis::tau;
    if (s == "p") return SweepAxis::p;
    if (s == "R" || s == "raters") return SweepAxis::raters;
    if (s == "N" || s == "items") return SweepAxis::items;
    throw InvalidArgument("config: sweep.axis must be one of beta, tau, p, R, N");
}

inline ModelSpec parse_model(const json& j)
{
    only_keys(j, "model", {"categories", "beta", "tau", "gamma", "p", "items"});
    ModelSpec m;
    if (j.contains("categories")) {
        const auto& c = j.at("categories");
        if (c.is_number_integer()) {
            m.categories = CategorySet::numbered(count(c, "model.categories", 2)).labels();
        } else {
            m.categories = strings(c, "model.categories");
        }
    }
    m.beta = number(need(j, "model", "beta"), "model.beta");
    if (!(m.beta >= 0.0 && m.beta <= 1.0)) {
        throw InvalidArgument("config: model.beta must lie in [0,1]");
    }
    m.p = numbers(need(j, "model", "p"), "model.p");
    if (m.categories.empty()) {
        m.categories = CategorySet::numbered(m.p.size()).labels();
    }
    if (j.contains("gamma") == j.contains("tau")) {
        throw InvalidArgument("config: model needs exactly one of 'tau' and 'gamma'");
    }
    if (j.contains("gamma")) {
        m.gamma = strings(j.at("gamma"), "model.gamma");
        m.items = m.gamma->size();
        if (j.contains("items") && count(j.at("items"), "model.items", 1) != m.items) {
            throw InvalidArgument("config: model.items disagrees with the length of model.gamma");
        }
    } else {
        m.tau = numbers(j.at("tau"), "model.tau");
        m.items = count(need(j, "model", "items"), "model.items", 1);
    }
    // validates dimensions, simplexes and labels
    (void)m.build();
    return m;
}

inline SweepValue parse_sweep_value(const json& v)
{
    if (v.is_array()) {
        return numbers(v, "sweep.values entry");
    }
    return number(v, "sweep.values entry");
}

inline RefineOptions parse_refine(const json& j, bool& enabled)
{
    only_keys(j, "refine", {"enabled", "max_iters", "tol", "restarts", "pair_term"});
    RefineOptions o;
    if (j.contains("enabled")) enabled = boolean(j.at("enabled"), "refine.enabled");
    if (j.contains("max_iters")) o.max_iters = count(j.at("max_iters"), "refine.max_iters", 1);
    if (j.contains("tol")) o.tol = number(j.at("tol"), "refine.tol");
    if (j.contains("restarts")) o.restarts = count(j.at("restarts"), "refine.restarts", 0);
    if (j.contains("pair_term")) {
        const auto& t = j.at("pair_term");
        if (t == "full_cross") {
            o.pair_term = PairTerm::full_cross;
        } else if (t == "diagonal") {
            o.pair_term = PairTerm::diagonal;
        } else {
            throw InvalidArgument("config: refine.pair_term must be full_cross or diagonal");
        }
    }
    o.validate();
    return o;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text)
{
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("config: not valid JSON: ") + e.what());
    }
    detail::only_keys(j, "top level", {"schema", "seed", "model", "raters", "sweep", "refine"});
    const auto& schema = detail::need(j, "top level", "schema");
    if (!schema.is_string() || schema.get<std::string>() != config_schema_version) {
        throw InvalidArgument(std::string("config: schema must be \"") + config_schema_version + "\"");
    }

    RunConfig cfg;
    cfg.seed = detail::count(detail::need(j, "top level", "seed"), "seed", 0);
    cfg.model = detail::parse_model(detail::need(j, "top level", "model"));
    if (j.contains("raters")) {
        cfg.raters = detail::count(j.at("raters"), "raters", 1);
    }
    bool refine_enabled = true;
    RefineOptions refine;
    if (j.contains("refine")) {
        refine = detail::parse_refine(j.at("refine"), refine_enabled);
    }

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        detail::only_keys(s, "sweep", {"axis", "values", "replications", "quantiles", "baselines", "threads"});
        SweepConfig sc;
        sc.base = cfg.model;
        sc.raters = cfg.raters;
        sc.master_seed = cfg.seed;
        const auto& axis = detail::need(s, "sweep", "axis");
        if (!axis.is_string()) {
            throw InvalidArgument("config: sweep.axis must be a string");
        }
        sc.axis = detail::parse_axis(axis.get<std::string>());
        const auto& values = detail::need(s, "sweep", "values");
        if (!values.is_array() || values.empty()) {
            throw InvalidArgument("config: sweep.values must be a non-empty array");
        }
        for (const auto& v : values) {
            sc.values.push_back(detail::parse_sweep_value(v));
        }
        if (s.contains("replications")) sc.replications = detail::count(s.at("replications"), "sweep.replications", 1);
        if (s.contains("quantiles")) sc.quantile_levels = detail::numbers(s.at("quantiles"), "sweep.quantiles");
        if (s.contains("baselines")) sc.baselines = detail::boolean(s.at("baselines"), "sweep.baselines");
        if (s.contains("threads")) sc.threads = static_cast<unsigned>(detail::count(s.at("threads"), "sweep.threads", 0));
        sc.refine = refine;
        sc.use_refine = refine_enabled;
        sc.validate();
        for (std::size_t i = 0; i < sc.values.size(); ++i) {
            (void)resolve_point(sc, i);  // rejects values that do not fit the axis
        }
        cfg.sweep = std::move(sc);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) { return parse_config(csv::read_file(path)); }

}  // namespace icr
