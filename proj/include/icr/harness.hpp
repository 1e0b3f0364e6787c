#pragma once

// Monte-Carlo accuracy studies: sample many rating experiments from a known model,
// estimate beta from each, and report quantiles of |beta_hat - beta_true|.
//
// Every replication draws from its own stream seeded by mix_seed(master, point, r), and
// results are stored by replication index, so the report does not depend on how many
// threads ran the replications or in which order they finished.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "icr/baselines.hpp"
#include "icr/coincidence.hpp"
#include "icr/csv.hpp"
#include "icr/error.hpp"
#include "icr/estimators.hpp"
#include "icr/model.hpp"
#include "icr/refine.hpp"
#include "icr/rng.hpp"

namespace icr {

/// Model parameters before a labeling is built. tau need not give whole item counts:
/// counts are apportioned by largest remainder and items are labeled in blocks.
struct ModelSpec {
    std::vector<std::string> categories;
    double beta = 0.0;
    std::vector<double> tau;
    std::vector<double> p;
    std::size_t items = 0;
    std::optional<std::vector<std::string>> gamma;  ///< explicit labeling, overrides tau

    CoderModel build() const
    {
        CategorySet cats(categories);
        if (p.size() != cats.size()) {
            throw InvalidArgument("p needs one entry per category");
        }
        if (gamma) {
            std::vector<Category> g;
            for (const auto& l : *gamma) {
                g.push_back(cats.index_of(l));
            }
            return CoderModel(beta, TrueLabeling(std::move(g), cats.size()), AprioriDist(p), cats);
        }
        if (tau.size() != cats.size()) {
            throw InvalidArgument("tau needs one entry per category");
        }
        require_simplex(tau, "tau", 1e-9);
        if (items == 0) {
            throw InvalidArgument("need at least one item");
        }
        return CoderModel(beta, TrueLabeling::apportioned(items, tau), AprioriDist(p), cats);
    }
};

enum class SweepAxis { beta, tau, p, raters, items };

inline const char* to_string(SweepAxis a)
{
    switch (a) {
        case SweepAxis::beta: return "beta";
        case SweepAxis::tau: return "tau";
        case SweepAxis::p: return "p";
        case SweepAxis::raters: return "R";
        case SweepAxis::items: return "N";
    }
    return "?";
}

/// A scalar (beta, max(tau), R, N) or a full vector (tau, p).
using SweepValue = std::variant<double, std::vector<double>>;

inline std::string format_sweep_value(const SweepValue& v)
{
    if (const auto* d = std::get_if<double>(&v)) {
        return csv::format_double(*d);
    }
    std::string out;
    for (double x : std::get<std::vector<double>>(v)) {
        out += (out.empty() ? "" : ";") + csv::format_double(x);
    }
    return out;
}

inline std::vector<double> default_quantile_levels()
{
    return {0.5, 0.8, 0.9, 0.95, 0.98, 1.0};
}

struct SweepConfig {
    ModelSpec base;
    std::size_t raters = 5;
    std::size_t replications = 1000;
    std::uint64_t master_seed = 0;
    SweepAxis axis = SweepAxis::beta;
    std::vector<SweepValue> values;
    std::vector<double> quantile_levels = default_quantile_levels();
    bool baselines = false;
    bool use_refine = true;
    RefineOptions refine;
    unsigned threads = 1;  ///< 0 = hardware concurrency

    void validate() const
    {
        if (replications < 1) {
            throw InvalidArgument("replications must be >= 1");
        }
        if (raters < 2) {
            throw InvalidArgument("need at least two raters");
        }
        if (quantile_levels.empty()) {
            throw InvalidArgument("need at least one quantile level");
        }
        for (double q : quantile_levels) {
            if (!(q > 0.0 && q <= 1.0)) {
                throw InvalidArgument("quantile levels must lie in (0,1]");
            }
        }
        refine.validate();
    }
};

/// tau with largest entry t for the tau axis: category 1 gets t, the rest is split in
/// proportion (m-1, m-2, ..., 1) over categories 2..m (2:1 for m = 3), or equally if that
/// would make another entry exceed t.
inline std::vector<double> tau_with_max(double t, std::size_t m)
{
    if (!(t >= 1.0 / static_cast<double>(m) - 1e-12 && t < 1.0)) {
        throw InvalidArgument("max(tau) must lie in [1/m, 1)");
    }
    std::vector<double> tau(m, 0.0);
    tau[0] = t;
    const double rest = 1.0 - t;
    double wsum = 0.0;
    for (std::size_t c = 1; c < m; ++c) {
        wsum += static_cast<double>(m - c);
    }
    for (std::size_t c = 1; c < m; ++c) {
        tau[c] = rest * static_cast<double>(m - c) / wsum;
    }
    if (m > 1 && tau[1] > t) {
        for (std::size_t c = 1; c < m; ++c) {
            tau[c] = rest / static_cast<double>(m - 1);
        }
    }
    return tau;
}

/// One fully resolved sweep point.
struct ConfigPoint {
    CoderModel model;
    std::size_t raters = 5;
    std::size_t replications = 1000;
    std::uint64_t master_seed = 0;
    std::size_t sweep_index = 0;
    bool use_refine = true;
    RefineOptions refine;
    bool baselines = false;
    unsigned threads = 1;
};

inline ConfigPoint resolve_point(const SweepConfig& cfg, std::size_t index)
{
    ModelSpec spec = cfg.base;
    std::size_t raters = cfg.raters;
    const SweepValue& v = cfg.values.at(index);
    auto scalar = [&]() {
        if (const auto* d = std::get_if<double>(&v)) {
            return *d;
        }
        throw InvalidArgument(std::string("sweep axis ") + to_string(cfg.axis) + " takes scalar values");
    };
    auto count = [&]() {
        const double d = scalar();
        if (!(d >= 1.0) || d != std::floor(d)) {
            throw InvalidArgument(std::string("sweep axis ") + to_string(cfg.axis) + " takes positive integers");
        }
        return static_cast<std::size_t>(d);
    };
    switch (cfg.axis) {
        case SweepAxis::beta: spec.beta = scalar(); break;
        case SweepAxis::tau:
            spec.gamma.reset();
            if (const auto* vec = std::get_if<std::vector<double>>(&v)) {
                spec.tau = *vec;
            } else {
                spec.tau = tau_with_max(scalar(), spec.categories.size());
            }
            break;
        case SweepAxis::p:
            if (const auto* vec = std::get_if<std::vector<double>>(&v)) {
                spec.p = *vec;
            } else {
                throw InvalidArgument("sweep axis p takes vectors");
            }
            break;
        case SweepAxis::raters: raters = count(); break;
        case SweepAxis::items:
            spec.gamma.reset();
            spec.items = count();
            break;
    }
    if (raters < 2) {
        throw InvalidArgument("need at least two raters");
    }
    return ConfigPoint{spec.build(), raters,     cfg.replications, cfg.master_seed, index,
                       cfg.use_refine,           cfg.refine,       cfg.baselines,   cfg.threads};
}

struct ReplicationOutcome {
    std::vector<double> errors;  ///< successful replications, in replication order
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;  ///< distinct messages, first occurrence order
    std::optional<CoefficientReport> baseline_means;
};

/// Sample, estimate (and refine) one experiment; returns beta_hat.
inline double estimate_replication(const ConfigPoint& pt, std::uint64_t seed, CoefficientReport* baseline)
{
    const auto ratings = sample_ratings(pt.model, pt.raters, seed);
    const auto stats = empirical_stats(ratings);
    auto est = estimate(stats);
    if (pt.use_refine) {
        est = refine(stats, est, pt.refine);
    }
    if (baseline) {
        *baseline = coefficients(ratings);
    }
    return est.beta_hat;
}

inline ReplicationOutcome run_replications(const ConfigPoint& pt)
{
    const std::size_t reps = pt.replications;
    struct Slot {
        std::optional<double> beta_hat;
        std::string error;
        CoefficientReport baseline;
    };
    std::vector<Slot> slots(reps);

    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t rep = first; rep < reps; rep += stride) {
            const std::uint64_t seed = mix_seed(pt.master_seed, pt.sweep_index, rep);
            try {
                slots[rep].beta_hat = estimate_replication(pt, seed, pt.baselines ? &slots[rep].baseline : nullptr);
            } catch (const std::exception& e) {
                slots[rep].error = e.what();
            }
        }
    };

    unsigned threads = pt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : pt.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(work, t, threads);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    ReplicationOutcome out;
    CoefficientReport sum;
    for (const auto& s : slots) {
        if (s.beta_hat) {
            out.errors.push_back(std::abs(*s.beta_hat - pt.model.beta()));
            sum.s_value += s.baseline.s_value;
            sum.cohen_kappa_mean += s.baseline.cohen_kappa_mean;
            sum.fleiss_pi += s.baseline.fleiss_pi;
            sum.percent_agreement += s.baseline.percent_agreement;
        } else {
            ++out.failures;
            if (std::find(out.failure_messages.begin(), out.failure_messages.end(), s.error) ==
                out.failure_messages.end()) {
                out.failure_messages.push_back(s.error);
            }
        }
    }
    if (pt.baselines && !out.errors.empty()) {
        const double n = static_cast<double>(out.errors.size());
        sum.s_value /= n;
        sum.cohen_kappa_mean /= n;
        sum.fleiss_pi /= n;
        sum.percent_agreement /= n;
        out.baseline_means = sum;
    }
    return out;
}

/// Inverse empirical CDF: level q maps to the ceil(q n)-th smallest value.
inline std::vector<double> quantiles(std::vector<double> values, const std::vector<double>& levels)
{
    if (values.empty()) {
        throw ComputeError("no successful replications");
    }
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    std::vector<double> out;
    for (double q : levels) {
        if (!(q > 0.0 && q <= 1.0)) {
            throw InvalidArgument("quantile levels must lie in (0,1]");
        }
        // the 1e-9 slack keeps e.g. 0.07 * 100 = 7.000000000000001 at rank 7
        auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
        rank = std::clamp<std::size_t>(rank, 1, values.size());
        out.push_back(values[rank - 1]);
    }
    return out;
}

struct QuantileRow {
    std::string sweep_value;
    std::size_t n_success = 0;
    std::size_t n_fail = 0;
    std::vector<double> quantiles;
    bool flagged = false;  ///< more than 1% of replications failed
    std::optional<CoefficientReport> baselines;
    std::vector<std::string> failure_messages;
};

struct QuantileReport {
    SweepAxis axis = SweepAxis::beta;
    std::vector<double> levels;
    std::vector<QuantileRow> rows;
    bool baselines = false;

    /// Quantile at `level` for row `row`.
    double at(std::size_t row, double level) const
    {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (std::abs(levels[i] - level) < 1e-12) {
                return rows.at(row).quantiles[i];
            }
        }
        throw InvalidArgument("quantile level not in report");
    }
};

inline QuantileReport sweep(const SweepConfig& cfg)
{
    cfg.validate();
    if (cfg.values.empty()) {
        throw InvalidArgument("sweep needs at least one value");
    }
    QuantileReport report;
    report.axis = cfg.axis;
    report.levels = cfg.quantile_levels;
    report.baselines = cfg.baselines;
    for (std::size_t i = 0; i < cfg.values.size(); ++i) {
        const auto point = resolve_point(cfg, i);
        auto outcome = run_replications(point);
        QuantileRow row;
        row.sweep_value = format_sweep_value(cfg.values[i]);
        row.n_success = outcome.errors.size();
        row.n_fail = outcome.failures;
        row.failure_messages = std::move(outcome.failure_messages);
        if (outcome.errors.empty()) {
            throw ComputeError("no successful replications at sweep value " + row.sweep_value +
                               (row.failure_messages.empty() ? "" : ": " + row.failure_messages.front()));
        }
        row.quantiles = quantiles(outcome.errors, cfg.quantile_levels);
        row.flagged = static_cast<double>(row.n_fail) > 0.01 * static_cast<double>(cfg.replications);
        row.baselines = outcome.baseline_means;
        report.rows.push_back(std::move(row));
    }
    return report;
}

inline std::string quantile_column(double level)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "q%g", level * 100.0);
    return buf;
}

/// sweep_value,n_success,n_fail,q50,...,q100[,s_value,kappa,pi]
inline std::string report_to_csv(const QuantileReport& report)
{
    std::string out = "sweep_value,n_success,n_fail";
    for (double q : report.levels) {
        out += "," + quantile_column(q);
    }
    if (report.baselines) {
        out += ",s_value,kappa,pi";
    }
    out += '\n';
    for (const auto& row : report.rows) {
        out += row.sweep_value + "," + std::to_string(row.n_success) + "," + std::to_string(row.n_fail);
        for (double v : row.quantiles) {
            out += "," + csv::format_double(v);
        }
        if (report.baselines) {
            const CoefficientReport b = row.baselines.value_or(CoefficientReport{});
            out += "," + csv::format_double(b.s_value) + "," + csv::format_double(b.cohen_kappa_mean) + "," +
                   csv::format_double(b.fleiss_pi);
        }
        out += '\n';
    }
    return out;
}

}  // namespace icr
