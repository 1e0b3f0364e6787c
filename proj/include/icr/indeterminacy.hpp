#pragma once

// Constructions showing when beta is not determined by the observable moments.

#include <algorithm>
#include <cmath>
#include <vector>

#include "icr/coincidence.hpp"
#include "icr/error.hpp"
#include "icr/model.hpp"

namespace icr {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct AlternativeBeta {
    std::size_t n = 0;  ///< the alternative labeling puts (n + N) / 2 items in the dominant category
    double beta = 0.0;
};

struct IndeterminacyRegion {
    std::vector<Interval> region;            ///< disjoint, ascending
    std::vector<AlternativeBeta> admissible; ///< discrete beta' realisable with N items, ascending
};

namespace detail {

inline std::vector<Interval> intersect(const Interval& a, const std::vector<Interval>& bs)
{
    std::vector<Interval> out;
    for (const auto& b : bs) {
        const double lo = std::max(a.lo, b.lo);
        const double hi = std::min(a.hi, b.hi);
        if (lo <= hi) {
            out.push_back({lo, hi});
        }
    }
    std::sort(out.begin(), out.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::vector<Interval> merged;
    for (const auto& iv : out) {
        if (!merged.empty() && iv.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        } else {
            merged.push_back(iv);
        }
    }
    return merged;
}

inline bool contains(const std::vector<Interval>& region, double x)
{
    constexpr double slack = 1e-12;
    return std::any_of(region.begin(), region.end(),
                       [&](const Interval& iv) { return x >= iv.lo - slack && x <= iv.hi + slack; });
}

}  // namespace detail

/// Two categories, pairwise statistics only. For the true beta, tau = tau_{c1} and
/// e1_max = max(e1_{c1}, e1_{c2}), every beta' in
///   [2 beta sqrt(tau (1 - tau)), e1 + beta^2 tau (1 - tau) / e1]  intersected with  I
/// with beta'^2 = 4 beta^2 tau (1 - tau) / (1 - n^2 / N^2), n + N even, is produced by
/// another coder model with identical e1 and e2.
inline IndeterminacyRegion indeterminacy_region(double beta, double tau, double e1_max, std::size_t n_items)
{
    if (!(beta >= 0.0 && beta <= 1.0) || !(tau >= 0.0 && tau < 1.0) || !(e1_max >= 0.5 && e1_max <= 1.0)) {
        throw InvalidArgument("indeterminacy region needs beta in [0,1], tau in [0,1), e1 in [1/2,1]");
    }
    if (n_items == 0) {
        throw InvalidArgument("need at least one item");
    }
    const double spread = beta * beta * tau * (1.0 - tau);
    const Interval base{2.0 * beta * std::sqrt(tau * (1.0 - tau)), std::min(1.0, e1_max + spread / e1_max)};

    std::vector<Interval> allowed;
    if (e1_max >= 1.0) {
        allowed.push_back({0.0, 1.0});
    } else {
        const double q = 1.0 - e1_max;
        allowed.push_back({0.0, std::min(1.0, 2.0 * q)});
        allowed.push_back({q + spread / q, 1.0});
    }

    IndeterminacyRegion out;
    out.region = detail::intersect(base, allowed);

    const double nd = static_cast<double>(n_items);
    for (std::size_t n = n_items - 1;; --n) {
        if ((n + n_items) % 2 == 0 && n >= 1) {
            const double ratio = static_cast<double>(n) / nd;
            const double bp = std::sqrt(4.0 * spread / (1.0 - ratio * ratio));
            if (detail::contains(out.region, bp) &&
                (out.admissible.empty() || bp != out.admissible.back().beta)) {
                out.admissible.push_back({n, bp});
            }
        }
        if (n <= 1) {
            break;
        }
    }
    std::sort(out.admissible.begin(), out.admissible.end(),
              [](const AlternativeBeta& a, const AlternativeBeta& b) { return a.beta < b.beta; });
    return out;
}

/// The model (beta', gamma', p') with beta'^2 = 4 beta^2 tau (1 - tau) / (1 - n^2 / N^2),
/// gamma' putting the first (n + N) / 2 items in the category with the larger e1,
/// and p' solving e1' = e1. It reproduces every e1 and e2 of `model` but not e3.
inline CoderModel two_category_alternative(const CoderModel& model, std::size_t n)
{
    if (model.m() != 2) {
        throw InvalidArgument("alternative models are constructed for two categories only");
    }
    const std::size_t big_n = model.items();
    if (n == 0 || n >= big_n || (n + big_n) % 2 != 0) {
        throw InvalidArgument("n must satisfy 1 <= n < N with n + N even");
    }
    const auto theo = theoretical_stats(model);
    const Category dom = theo.e1[0] >= theo.e1[1] ? 0 : 1;
    const double tau = model.tau()[dom];
    const double beta = model.beta();
    const double ratio = static_cast<double>(n) / static_cast<double>(big_n);
    const double beta_p = std::sqrt(4.0 * beta * beta * tau * (1.0 - tau) / (1.0 - ratio * ratio));
    const std::size_t dom_items = (n + big_n) / 2;
    const double tau_p = static_cast<double>(dom_items) / static_cast<double>(big_n);

    std::vector<double> p = model.p();
    if (beta_p < 1.0) {
        const double pd = (theo.e1[dom] - beta_p * tau_p) / (1.0 - beta_p);
        if (pd < -1e-12 || pd > 1.0 + 1e-12) {
            throw InvalidArgument("beta' lies outside the indeterminacy region");
        }
        p[dom] = std::clamp(pd, 0.0, 1.0);
        p[1 - dom] = 1.0 - p[dom];
    }
    std::vector<std::size_t> counts(2);
    counts[dom] = dom_items;
    counts[1 - dom] = big_n - dom_items;
    return CoderModel(std::min(beta_p, 1.0), TrueLabeling::from_counts(counts), AprioriDist(p), model.categories());
}

/// If every item has the same true category c0, any beta' <= beta + (1 - beta) p_{c0}
/// yields the same cell distributions with
///   p'_c = (1 - beta) p_c / (1 - beta'),  c != c0
///   p'_{c0} = (beta - beta' + (1 - beta) p_{c0}) / (1 - beta')
inline CoderModel single_category_equivalent(const CoderModel& model, double beta_prime)
{
    const auto& counts = model.labeling().counts();
    const auto c0_it = std::find(counts.begin(), counts.end(), model.items());
    if (c0_it == counts.end()) {
        throw InvalidArgument("model has more than one true category");
    }
    const auto c0 = static_cast<std::size_t>(c0_it - counts.begin());
    const double beta = model.beta();
    const double limit = beta + (1.0 - beta) * model.p()[c0];
    if (!(beta_prime >= 0.0) || beta_prime > limit + 1e-15) {
        throw InvalidArgument("beta' must lie in [0, beta + (1 - beta) p_c0]");
    }
    std::vector<double> p = model.p();
    if (beta_prime < 1.0) {
        for (std::size_t c = 0; c < p.size(); ++c) {
            p[c] = c == c0 ? (beta - beta_prime + (1.0 - beta) * model.p()[c0]) / (1.0 - beta_prime)
                           : (1.0 - beta) * model.p()[c] / (1.0 - beta_prime);
            p[c] = std::clamp(p[c], 0.0, 1.0);
        }
        double sum = 0.0;
        for (double x : p) {
            sum += x;
        }
        for (double& x : p) {
            x /= sum;
        }
    }
    return CoderModel(beta_prime, model.labeling(), AprioriDist(p), model.categories());
}

}  // namespace icr
