#pragma once

// Closed-form recovery of the reliability parameter beta from coincidence statistics.
//
// Which formula applies depends on what is known besides the moments:
//   tau known           beta = sqrt(excess_c / (tau_c (1 - tau_c)))
//   p known             root of a quadratic in beta per category
//   tau_c == p_c        beta = sqrt(excess_c / (e1_c (1 - e1_c)))
//   nothing known       dispatch on C* = {c : excess_c > 0}: two-star (|C*| = 2) or
//                       triple (|C*| >= 3) formulas using e3, pairwise formula as cross-check
// where excess_c = e2[c][c] - e1[c]^2 = beta^2 tau_c (1 - tau_c).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "icr/coincidence.hpp"
#include "icr/csv.hpp"
#include "icr/error.hpp"

namespace icr {

enum class Method { tau_known, p_known, tau_eq_p, two_star, triple, pairwise, refined };

inline const char* to_string(Method m)
{
    switch (m) {
        case Method::tau_known: return "tau_known";
        case Method::p_known: return "p_known";
        case Method::tau_eq_p: return "tau_eq_p";
        case Method::two_star: return "two_star";
        case Method::triple: return "triple";
        case Method::pairwise: return "pairwise";
        case Method::refined: return "refined";
    }
    return "unknown";
}

struct EstimateResult {
    explicit EstimateResult(CategorySet cats) : categories(std::move(cats)) {}

    CategorySet categories;
    double beta_hat = 0.0;
    std::optional<std::vector<double>> tau_hat;
    std::optional<std::vector<double>> p_hat;
    std::vector<Category> cstar;
    Method method = Method::triple;
    std::vector<std::string> diagnostics;
    std::optional<double> objective;  ///< set by refinement
    std::size_t iterations = 0;       ///< set by refinement

    void note(std::string msg) { diagnostics.push_back(std::move(msg)); }

    bool has_diagnostic(std::string_view prefix) const
    {
        return std::any_of(diagnostics.begin(), diagnostics.end(),
                           [&](const std::string& d) { return d.rfind(prefix, 0) == 0; });
    }
};

struct BetaInterval {
    double lo = 0.0;
    double hi = 1.0;
};

namespace detail {

inline std::string fmt(double v)
{
    return csv::format_double(v);
}

/// Clips to [0,1] and rescales to unit sum. Returns nullopt if nothing positive remains.
inline std::optional<std::vector<double>> to_simplex(std::vector<double> v)
{
    double sum = 0.0;
    for (double& x : v) {
        x = std::clamp(std::isfinite(x) ? x : 0.0, 0.0, 1.0);
        sum += x;
    }
    if (!(sum > 0.0)) {
        return std::nullopt;
    }
    for (double& x : v) {
        x /= sum;
    }
    return v;
}

/// p from e1 = beta tau + (1 - beta) p; undefined at beta = 1.
inline std::optional<std::vector<double>> p_from_e1(const CoincidenceStats& s, double beta, const std::vector<double>& tau)
{
    if (beta >= 1.0) {
        return std::nullopt;
    }
    std::vector<double> p(s.m());
    for (std::size_t c = 0; c < s.m(); ++c) {
        p[c] = (s.e1[c] - beta * tau[c]) / (1.0 - beta);
    }
    return to_simplex(std::move(p));
}

inline double clamp_beta(double beta, EstimateResult& r)
{
    if (!std::isfinite(beta)) {
        r.note("beta not finite, set to 0");
        return 0.0;
    }
    if (beta < 0.0 || beta > 1.0) {
        r.note("clamped beta " + fmt(beta) + " to [0,1]");
        return std::clamp(beta, 0.0, 1.0);
    }
    return beta;
}

/// Mean of per-category estimates with the spread recorded when there are several.
inline double aggregate(const std::vector<double>& values, EstimateResult& r)
{
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        r.note("averaged " + std::to_string(values.size()) + " categories, spread " + fmt(*hi - *lo));
    }
    return mean;
}

inline void require_vector(const CoincidenceStats& s, const std::vector<double>& v, const char* what)
{
    if (v.size() != s.m()) {
        throw InvalidArgument(std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " +
                              std::to_string(s.m()));
    }
    require_simplex(v, what, 1e-9);
}

inline EstimateResult make_result(const CoincidenceStats& s, Method method)
{
    EstimateResult r{s.categories};
    r.method = method;
    return r;
}

}  // namespace detail

/// Threshold separating real excess from sampling noise: 1e-12 for exact moments,
/// 2 / sqrt(N R (R - 1)) (the standard-error scale of the pooled excess) for empirical ones.
inline double default_threshold(const CoincidenceStats& s)
{
    if (s.source == StatsSource::theoretical || s.items == 0 || s.raters < 2) {
        return 1e-12;
    }
    const double n = static_cast<double>(s.items);
    const double r = static_cast<double>(s.raters);
    return 2.0 / std::sqrt(n * r * (r - 1.0));
}

/// {c : e2[c][c] - e1[c]^2 > eps}, in category order.
inline std::vector<Category> detect_cstar(const CoincidenceStats& s, double eps)
{
    if (eps < 0.0) {
        throw InvalidArgument("threshold must be non-negative");
    }
    std::vector<Category> out;
    for (std::size_t c = 0; c < s.m(); ++c) {
        if (s.excess(c) > eps) {
            out.push_back(static_cast<Category>(c));
        }
    }
    return out;
}

inline EstimateResult beta_tau_known(const CoincidenceStats& s, const std::vector<double>& tau)
{
    detail::require_vector(s, tau, "tau");
    for (double t : tau) {
        if (t >= 1.0) {
            throw InvalidArgument("degenerate true distribution: all items in one category, beta is not identifiable");
        }
    }
    auto r = detail::make_result(s, Method::tau_known);
    std::vector<double> per_cat;
    for (std::size_t c = 0; c < s.m(); ++c) {
        const double ex = s.excess(c);
        if (tau[c] > 0.0 && ex > 0.0) {
            per_cat.push_back(std::sqrt(ex / (tau[c] * (1.0 - tau[c]))));
            r.cstar.push_back(static_cast<Category>(c));
        }
    }
    if (per_cat.empty()) {
        r.note("no excess");
        r.beta_hat = 0.0;
    } else {
        r.beta_hat = detail::clamp_beta(detail::aggregate(per_cat, r), r);
    }
    r.tau_hat = tau;
    r.p_hat = detail::p_from_e1(s, r.beta_hat, tau);
    return r;
}

/// Bounds on beta given pi0 <= p_c <= pi1 for every c. With pi0 = pi1 = 1/m both
/// collapse to the square root of Bennett's S.
inline BetaInterval beta_bounds(const CoincidenceStats& s, double pi0, double pi1)
{
    if (pi1 >= 1.0) {
        throw InvalidArgument("upper a-priori bound must be < 1");
    }
    if (pi0 < 0.0 || pi0 > pi1) {
        throw InvalidArgument("a-priori bounds must satisfy 0 <= pi0 <= pi1");
    }
    const double e2 = s.agreement();
    BetaInterval out;
    out.lo = std::clamp(std::sqrt(std::max(0.0, e2 - pi1) / (1.0 - pi1)), 0.0, 1.0);
    out.hi = std::clamp(std::sqrt(std::max(0.0, e2 - pi0) / (1.0 - pi0)), 0.0, 1.0);
    out.lo = std::min(out.lo, out.hi);
    return out;
}

inline EstimateResult beta_p_known(const CoincidenceStats& s, const std::vector<double>& p)
{
    detail::require_vector(s, p, "p");
    auto r = detail::make_result(s, Method::p_known);
    std::vector<double> per_cat;
    for (std::size_t c = 0; c < s.m(); ++c) {
        const double pc = p[c];
        if (!(pc > 0.0)) {
            continue;
        }
        const double e1 = s.e1[c];
        const double d = e1 - s.e2(c, c);
        // f(u) = pc (1 - pc) u^2 + lin u + d with u = beta - 1; we want the root in [-1, 0].
        const double quad = pc * (1.0 - pc);
        const double lin = pc * (1.0 - e1) + e1 * (1.0 - pc);
        double beta = 0.0;
        if (pc >= 1.0) {
            beta = e1 >= 1.0 ? 0.0 : 1.0 - d / (1.0 - e1);
        } else {
            double disc = lin * lin - 4.0 * quad * d;
            if (disc < 0.0) {
                r.note("negative discriminant for " + s.categories.label(static_cast<Category>(c)) + ", set to 0");
                disc = 0.0;
            }
            // larger root, written without the cancellation of -lin + sqrt(disc)
            beta = 1.0 - 2.0 * d / (lin + std::sqrt(disc));
        }
        per_cat.push_back(beta);
    }
    if (per_cat.empty()) {
        throw InvalidArgument("p has no positive entry");
    }
    r.beta_hat = detail::clamp_beta(detail::aggregate(per_cat, r), r);
    r.cstar = detect_cstar(s, default_threshold(s));
    r.p_hat = p;
    if (r.beta_hat > 0.0) {
        std::vector<double> tau(s.m());
        for (std::size_t c = 0; c < s.m(); ++c) {
            tau[c] = (s.e1[c] - (1.0 - r.beta_hat) * p[c]) / r.beta_hat;
        }
        r.tau_hat = detail::to_simplex(std::move(tau));
    }
    return r;
}

inline EstimateResult beta_tau_eq_p(const CoincidenceStats& s, Category c)
{
    if (c >= s.m()) {
        throw InvalidArgument("category index out of range");
    }
    const double e1 = s.e1[c];
    if (!(e1 > 0.0 && e1 < 1.0)) {
        throw InvalidArgument("base-rate category degenerate: e1 must lie strictly inside (0,1)");
    }
    auto r = detail::make_result(s, Method::tau_eq_p);
    const double ex = s.excess(c);
    if (ex < 0.0) {
        r.note("negative excess, set to 0");
    }
    r.beta_hat = detail::clamp_beta(std::sqrt(std::max(0.0, ex) / (e1 * (1.0 - e1))), r);
    r.cstar = detect_cstar(s, default_threshold(s));
    return r;
}

namespace detail {

/// (e3 - e1^3) / (e2 - e1^2) = beta (1 + tau_c) + 3 (1 - beta) p_c
inline double triple_ratio(const CoincidenceStats& s, std::size_t c)
{
    return ((*s.e3)[c] - s.e1[c] * s.e1[c] * s.e1[c]) / s.excess(c);
}

inline void require_e3(const CoincidenceStats& s)
{
    if (!s.has_e3()) {
        throw InvalidArgument("need triple coincidences (at least three raters)");
    }
}

}  // namespace detail

/// |C*| = 2: beta = sqrt(4a + b^2) with a = excess_c, b = ratio_c - 3 e1_c for either c in C*.
/// The pivot defaults to the category with the larger excess.
inline EstimateResult beta_two_star(const CoincidenceStats& s, const std::vector<Category>& cstar,
                                    std::optional<Category> pivot = std::nullopt)
{
    detail::require_e3(s);
    if (cstar.size() != 2) {
        throw InvalidArgument("two-star estimator needs exactly two categories in C*");
    }
    auto r = detail::make_result(s, Method::two_star);
    r.cstar = cstar;
    const Category c = pivot ? *pivot : (s.excess(cstar[0]) >= s.excess(cstar[1]) ? cstar[0] : cstar[1]);
    if (std::find(cstar.begin(), cstar.end(), c) == cstar.end()) {
        throw InvalidArgument("pivot category must belong to C*");
    }
    const Category other = c == cstar[0] ? cstar[1] : cstar[0];
    const double a = s.excess(c);
    if (!(a > 0.0)) {
        r.note("no excess on pivot category, beta set to 0");
        r.beta_hat = 0.0;
        r.p_hat = detail::to_simplex(s.e1);
        return r;
    }
    const double b = detail::triple_ratio(s, c) - 3.0 * s.e1[c];
    const double v = 4.0 * a + b * b;
    r.beta_hat = detail::clamp_beta(std::sqrt(v), r);
    if (r.beta_hat > 0.0) {
        // b = beta (1 - 2 tau_c) fixes the sign of tau_c - 1/2
        std::vector<double> tau(s.m(), 0.0);
        tau[c] = std::clamp(0.5 * (1.0 - b / r.beta_hat), 0.0, 1.0);
        tau[other] = 1.0 - tau[c];
        r.tau_hat = tau;
        r.p_hat = detail::p_from_e1(s, r.beta_hat, tau);
    }
    return r;
}

/// |C*| >= 3:
///   beta = (sum_{c in C*} ratio_c + 3 sum_{c not in C*} e1_c - 3) / (|C*| - 2)
inline EstimateResult beta_triple(const CoincidenceStats& s, const std::vector<Category>& cstar)
{
    if (cstar.size() < 3) {
        throw InvalidArgument("triple estimator needs |C*| >= 3; use two-star path");
    }
    detail::require_e3(s);
    auto r = detail::make_result(s, Method::triple);
    r.cstar = cstar;
    std::vector<bool> in_star(s.m(), false);
    double ratio_sum = 0.0;
    for (Category c : cstar) {
        if (!(s.excess(c) > 0.0)) {
            throw InvalidArgument("category " + s.categories.label(c) + " has no excess and cannot be in C*");
        }
        in_star[c] = true;
        ratio_sum += detail::triple_ratio(s, c);
    }
    double outside = 0.0;
    for (std::size_t c = 0; c < s.m(); ++c) {
        if (!in_star[c]) {
            outside += s.e1[c];
        }
    }
    const double beta = (ratio_sum + 3.0 * outside - 3.0) / static_cast<double>(cstar.size() - 2);
    r.beta_hat = detail::clamp_beta(beta, r);
    if (r.beta_hat > 0.0) {
        std::vector<double> tau(s.m(), 0.0);
        for (Category c : cstar) {
            tau[c] = 0.5 * (1.0 - (detail::triple_ratio(s, c) - 3.0 * s.e1[c]) / r.beta_hat);
        }
        r.tau_hat = detail::to_simplex(std::move(tau));
        if (r.tau_hat) {
            r.p_hat = detail::p_from_e1(s, r.beta_hat, *r.tau_hat);
        }
    }
    return r;
}

/// |C*| >= 3 from pairwise moments only. With
///   rho_ij = (e2[i][j] - e1_i e1_j) / (e2[i][i] - e1_i^2)
/// the system lambda_i rho_ij = lambda_k rho_kj, sum lambda = |C*| - 1 has the unique
/// solution lambda_i = 1 - tau_i, and beta^2 = sum_c excess_c / (1 - sum_i tau_i^2).
/// Numerically fragile on noisy data; the dispatcher only uses it as a cross-check.
inline EstimateResult beta_pairwise(const CoincidenceStats& s, const std::vector<Category>& cstar)
{
    const std::size_t ms = cstar.size();
    if (ms < 3) {
        throw InvalidArgument("pairwise estimator needs |C*| >= 3");
    }
    for (Category c : cstar) {
        if (!(s.excess(c) > 0.0)) {
            throw ComputeError("category " + s.categories.label(c) + " not in C*: non-positive excess");
        }
    }
    auto rho = [&](std::size_t i, std::size_t j) {
        const Category ci = cstar[i];
        const Category cj = cstar[j];
        return (s.e2(ci, cj) - s.e1[ci] * s.e1[cj]) / s.excess(ci);
    };
    auto r = detail::make_result(s, Method::pairwise);
    r.cstar = cstar;

    // Column 0 ties lambda_1..lambda_{m*-1} to lambda_1; column 1 ties lambda_0 to lambda_2.
    std::vector<double> lambda(ms);
    double smallest = std::abs(rho(0, 1));
    lambda[1] = 1.0;
    const double anchor = rho(1, 0);
    for (std::size_t j = 2; j < ms; ++j) {
        const double den = rho(j, 0);
        smallest = std::min(smallest, std::abs(den));
        lambda[j] = anchor / den;
    }
    lambda[0] = lambda[2] * rho(2, 1) / rho(0, 1);
    const double sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    if (!std::isfinite(sum) || sum == 0.0) {
        throw ComputeError("inconsistent pairwise stats: lambda system is singular");
    }
    const double scale = static_cast<double>(ms - 1) / sum;
    for (double& l : lambda) {
        l *= scale;
    }
    if (smallest < 1e-8) {
        r.note("ill-conditioned: |rho| down to " + detail::fmt(smallest));
    }

    double worst = 0.0;  // residual of the equations not used by the substitution
    for (std::size_t j = 0; j < ms; ++j) {
        for (std::size_t i = 0; i < ms; ++i) {
            for (std::size_t k = 0; k < ms; ++k) {
                if (i != j && k != j) {
                    worst = std::max(worst, std::abs(lambda[i] * rho(i, j) - lambda[k] * rho(k, j)));
                }
            }
        }
    }
    if (worst > 1e-6) {
        r.note("ill-conditioned: lambda system residual " + detail::fmt(worst));
    }

    double tau_sq = 0.0;
    std::vector<double> tau(s.m(), 0.0);
    for (std::size_t i = 0; i < ms; ++i) {
        tau[cstar[i]] = 1.0 - lambda[i];
        tau_sq += tau[cstar[i]] * tau[cstar[i]];
        if (lambda[i] < 0.0 || lambda[i] > 1.0) {
            r.note("ill-conditioned: lambda outside [0,1]");
        }
    }
    const double den = 1.0 - tau_sq;
    if (!(den > 0.0)) {
        throw ComputeError("inconsistent pairwise stats: 1 - sum (1 - lambda)^2 <= 0");
    }
    double excess = 0.0;
    for (std::size_t c = 0; c < s.m(); ++c) {
        excess += s.excess(c);
    }
    r.beta_hat = detail::clamp_beta(std::sqrt(std::max(0.0, excess) / den), r);
    r.tau_hat = detail::to_simplex(std::move(tau));
    if (r.tau_hat) {
        r.p_hat = detail::p_from_e1(s, r.beta_hat, *r.tau_hat);
    }
    return r;
}

/// Dispatch when neither tau nor p is known.
inline EstimateResult estimate(const CoincidenceStats& s, std::optional<double> eps = std::nullopt)
{
    const double threshold = eps ? *eps : default_threshold(s);
    auto cstar = detect_cstar(s, threshold);

    if (cstar.empty()) {
        auto r = detail::make_result(s, Method::triple);
        r.note("no excess");
        r.beta_hat = 0.0;
        r.p_hat = detail::to_simplex(s.e1);
        return r;
    }

    std::vector<std::string> pre;
    if (cstar.size() == 1) {
        pre.emplace_back("noise-dominated C*");
        std::optional<Category> next;
        for (std::size_t c = 0; c < s.m(); ++c) {
            if (c != cstar[0] && (!next || s.excess(c) > s.excess(*next))) {
                next = static_cast<Category>(c);
            }
        }
        cstar.push_back(*next);
        std::sort(cstar.begin(), cstar.end());
    }

    EstimateResult r{s.categories};
    if (cstar.size() == 2) {
        if (!s.has_e3()) {
            throw ComputeError("two categories need three raters: pairwise statistics do not determine beta");
        }
        r = beta_two_star(s, cstar);
    } else if (s.has_e3()) {
        r = beta_triple(s, cstar);
        try {
            const auto cross = beta_pairwise(s, cstar);
            r.note("pairwise cross-check beta " + detail::fmt(cross.beta_hat));
        } catch (const std::exception& e) {
            r.note(std::string("pairwise cross-check failed: ") + e.what());
        }
    } else {
        r = beta_pairwise(s, cstar);
        r.note("no triple coincidences, used pairwise estimator");
    }
    r.diagnostics.insert(r.diagnostics.begin(), pre.begin(), pre.end());
    return r;
}

/// Flat key=value record, one entry per line.
inline std::string to_record(const EstimateResult& r)
{
    std::ostringstream out;
    out << "beta_hat=" << csv::format_double(r.beta_hat) << '\n';
    out << "method=" << to_string(r.method) << '\n';
    out << "cstar=";
    for (std::size_t i = 0; i < r.cstar.size(); ++i) {
        out << (i ? ";" : "") << r.categories.label(r.cstar[i]);
    }
    out << '\n';
    const auto& lab = r.categories.labels();
    if (r.tau_hat) {
        for (std::size_t c = 0; c < lab.size(); ++c) {
            out << "tau_hat_" << lab[c] << '=' << csv::format_double((*r.tau_hat)[c]) << '\n';
        }
    }
    if (r.p_hat) {
        for (std::size_t c = 0; c < lab.size(); ++c) {
            out << "p_hat_" << lab[c] << '=' << csv::format_double((*r.p_hat)[c]) << '\n';
        }
    }
    if (r.objective) {
        out << "objective=" << csv::format_double(*r.objective) << '\n';
        out << "iterations=" << r.iterations << '\n';
    }
    for (const auto& d : r.diagnostics) {
        out << "diagnostic=" << d << '\n';
    }
    return out.str();
}

inline std::string csv_header(const EstimateResult& r)
{
    std::string h = "beta_hat,method,cstar";
    for (const auto& l : r.categories.labels()) {
        h += ",tau_hat_" + l;
    }
    for (const auto& l : r.categories.labels()) {
        h += ",p_hat_" + l;
    }
    return h + ",diagnostics";
}

inline std::string csv_row(const EstimateResult& r)
{
    std::string row = csv::format_double(r.beta_hat) + "," + to_string(r.method) + ",";
    std::string star;
    for (std::size_t i = 0; i < r.cstar.size(); ++i) {
        star += (i ? ";" : "") + r.categories.label(r.cstar[i]);
    }
    row += csv::quote(star);
    for (const auto* v : {&r.tau_hat, &r.p_hat}) {
        for (std::size_t c = 0; c < r.categories.size(); ++c) {
            row += "," + (*v ? csv::format_double((**v)[c]) : std::string());
        }
    }
    std::string diag;
    for (std::size_t i = 0; i < r.diagnostics.size(); ++i) {
        diag += (i ? "; " : "") + r.diagnostics[i];
    }
    return row + "," + csv::quote(diag);
}

}  // namespace icr
