#pragma once

// Coder model: parameter types and the generative sampler.
//
// A rater recognises the true category of an item with probability beta and
// otherwise draws a category from the a-priori distribution p, so
//   Prob(X_k = c) = beta * [c == gamma(k)] + (1 - beta) * p_c.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "icr/error.hpp"
#include "icr/rng.hpp"

namespace icr {

/// Index of a category within its CategorySet.
using Category = std::uint32_t;

class CategorySet {
public:
    explicit CategorySet(std::vector<std::string> labels) : labels_(std::move(labels))
    {
        if (labels_.size() < 2) {
            throw InvalidArgument("category set needs at least two categories");
        }
        std::unordered_set<std::string> seen;
        for (const auto& l : labels_) {
            if (!seen.insert(l).second) {
                throw InvalidArgument("duplicate category label '" + l + "'");
            }
        }
    }

    /// c1, c2, ..., cm
    static CategorySet numbered(std::size_t m)
    {
        std::vector<std::string> labels;
        for (std::size_t i = 1; i <= m; ++i) {
            labels.push_back("c" + std::to_string(i));
        }
        return CategorySet(std::move(labels));
    }

    std::size_t size() const { return labels_.size(); }
    const std::string& label(Category c) const { return labels_.at(c); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<Category> find(std::string_view label) const
    {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] == label) {
                return static_cast<Category>(i);
            }
        }
        return std::nullopt;
    }

    Category index_of(std::string_view label) const
    {
        if (auto c = find(label)) {
            return *c;
        }
        throw InvalidArgument("unknown category '" + std::string(label) + "'");
    }

    bool operator==(const CategorySet&) const = default;

private:
    std::vector<std::string> labels_;
};

/// Splits n items over weights by largest remainder (Hamilton). Ties go to the lower index.
inline std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& weights)
{
    std::vector<std::size_t> counts(weights.size(), 0);
    std::vector<double> remainder(weights.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        const double exact = weights[c] * static_cast<double>(n);
        counts[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        remainder[c] = exact - static_cast<double>(counts[c]);
        assigned += counts[c];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
        ++counts[order[i % order.size()]];
    }
    while (assigned > n) {
        // only reachable through the +1e-9 slack on weights summing slightly above 1
        for (auto it = order.rbegin(); it != order.rend() && assigned > n; ++it) {
            if (counts[*it] > 0) {
                --counts[*it];
                --assigned;
            }
        }
    }
    return counts;
}

/// The true category gamma(k) of every item, with tau_c = N_c / N.
class TrueLabeling {
public:
    TrueLabeling(std::vector<Category> gamma, std::size_t m) : gamma_(std::move(gamma)), counts_(m, 0)
    {
        if (gamma_.empty()) {
            throw InvalidArgument("labeling needs at least one item");
        }
        for (Category c : gamma_) {
            if (c >= m) {
                throw InvalidArgument("labeling entry outside the category set");
            }
            ++counts_[c];
        }
        tau_.resize(m);
        for (std::size_t c = 0; c < m; ++c) {
            tau_[c] = static_cast<double>(counts_[c]) / static_cast<double>(gamma_.size());
        }
    }

    /// Blocked labeling: the first N*tau_1 items get category 0, the next N*tau_2 category 1, ...
    /// Every N*tau_c must be integral (within 1e-9).
    static TrueLabeling from_tau(std::size_t n, const std::vector<double>& tau)
    {
        std::vector<std::size_t> counts(tau.size());
        std::size_t total = 0;
        for (std::size_t c = 0; c < tau.size(); ++c) {
            const double exact = tau[c] * static_cast<double>(n);
            const double rounded = std::round(exact);
            if (tau[c] < 0.0 || std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact)) {
                throw InvalidArgument("N * tau_" + std::to_string(c + 1) + " = " + std::to_string(exact) +
                                      " is not a whole number of items");
            }
            counts[c] = static_cast<std::size_t>(rounded);
            total += counts[c];
        }
        if (total != n) {
            throw InvalidArgument("tau does not sum to one over N items");
        }
        return from_counts(counts);
    }

    /// Blocked labeling with counts apportioned by largest remainder, for tau with
    /// non-integral N*tau_c.
    static TrueLabeling apportioned(std::size_t n, const std::vector<double>& tau)
    {
        return from_counts(apportion(n, tau));
    }

    static TrueLabeling from_counts(const std::vector<std::size_t>& counts)
    {
        std::vector<Category> gamma;
        for (std::size_t c = 0; c < counts.size(); ++c) {
            gamma.insert(gamma.end(), counts[c], static_cast<Category>(c));
        }
        return TrueLabeling(std::move(gamma), counts.size());
    }

    std::size_t items() const { return gamma_.size(); }
    std::size_t categories() const { return counts_.size(); }
    Category operator[](std::size_t k) const { return gamma_[k]; }
    const std::vector<Category>& gamma() const { return gamma_; }
    const std::vector<double>& tau() const { return tau_; }
    const std::vector<std::size_t>& counts() const { return counts_; }

private:
    std::vector<Category> gamma_;
    std::vector<std::size_t> counts_;
    std::vector<double> tau_;
};

/// Checks p_c in [0,1] and |sum - 1| <= tol.
inline void require_simplex(const std::vector<double>& v, const char* what, double tol = 1e-12)
{
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw InvalidArgument(std::string(what) + " entries must lie in [0,1]");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol) {
        throw InvalidArgument(std::string(what) + " must sum to 1");
    }
}

/// The distribution a rater draws from when not certain of the true category.
class AprioriDist {
public:
    explicit AprioriDist(std::vector<double> p) : p_(std::move(p)) { require_simplex(p_, "a-priori distribution"); }

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t c) const { return p_[c]; }
    const std::vector<double>& values() const { return p_; }

    /// Inverse CDF over label order. u in [0,1).
    Category draw(double u) const
    {
        double cdf = 0.0;
        Category last_positive = 0;
        for (std::size_t c = 0; c < p_.size(); ++c) {
            if (p_[c] > 0.0) {
                last_positive = static_cast<Category>(c);
            }
            cdf += p_[c];
            if (u < cdf) {
                return static_cast<Category>(c);
            }
        }
        return last_positive;  // cdf summed to slightly below 1
    }

private:
    std::vector<double> p_;
};

class CoderModel {
public:
    CoderModel(double beta, TrueLabeling labeling, AprioriDist apriori, CategorySet categories)
        : beta_(beta), labeling_(std::move(labeling)), apriori_(std::move(apriori)), categories_(std::move(categories))
    {
        if (!(beta_ >= 0.0 && beta_ <= 1.0)) {
            throw InvalidArgument("beta must lie in [0,1]");
        }
        if (labeling_.categories() != categories_.size() || apriori_.size() != categories_.size()) {
            throw InvalidArgument("labeling, a-priori distribution and category set disagree on m");
        }
    }

    /// Convenience: numbered categories, blocked labeling with integral N*tau.
    static CoderModel from_tau(double beta, std::size_t n, const std::vector<double>& tau, const std::vector<double>& p)
    {
        return CoderModel(beta, TrueLabeling::from_tau(n, tau), AprioriDist(p), CategorySet::numbered(tau.size()));
    }

    double beta() const { return beta_; }
    const TrueLabeling& labeling() const { return labeling_; }
    const AprioriDist& apriori() const { return apriori_; }
    const CategorySet& categories() const { return categories_; }
    const std::vector<double>& tau() const { return labeling_.tau(); }
    const std::vector<double>& p() const { return apriori_.values(); }
    std::size_t items() const { return labeling_.items(); }
    std::size_t m() const { return categories_.size(); }

    /// Prob(X_k = c) for one cell.
    double cell_probability(std::size_t item, Category c) const
    {
        return (labeling_[item] == c ? beta_ : 0.0) + (1.0 - beta_) * apriori_[c];
    }

private:
    double beta_;
    TrueLabeling labeling_;
    AprioriDist apriori_;
    CategorySet categories_;
};

/// N items x R raters, row-major.
class RatingsMatrix {
public:
    RatingsMatrix(std::size_t items, std::size_t raters, std::vector<Category> entries, CategorySet categories)
        : items_(items), raters_(raters), entries_(std::move(entries)), categories_(std::move(categories))
    {
        if (items_ == 0 || raters_ == 0) {
            throw InvalidArgument("ratings need at least one item and one rater");
        }
        if (entries_.size() != items_ * raters_) {
            throw InvalidArgument("ratings entry count does not match N*R");
        }
        for (Category c : entries_) {
            if (c >= categories_.size()) {
                throw InvalidArgument("rating outside the category set");
            }
        }
    }

    std::size_t items() const { return items_; }
    std::size_t raters() const { return raters_; }
    Category operator()(std::size_t item, std::size_t rater) const { return entries_[item * raters_ + rater]; }
    const std::vector<Category>& entries() const { return entries_; }
    const CategorySet& categories() const { return categories_; }

    bool operator==(const RatingsMatrix&) const = default;

private:
    std::size_t items_;
    std::size_t raters_;
    std::vector<Category> entries_;
    CategorySet categories_;
};

/// Samples R raters' assignments for every item.
///
/// Cells are visited row-major (item-major, then rater). Each cell consumes exactly
/// two uniforms from one Xoshiro256 stream: the first decides certainty (certain iff
/// u < beta), the second is the inverse-CDF draw from p and is consumed even when
/// unused, so cell (k, i) always reads stream positions 2(kR+i) and 2(kR+i)+1.
inline RatingsMatrix sample_ratings(const CoderModel& model, std::size_t raters, std::uint64_t seed)
{
    if (raters == 0) {
        throw InvalidArgument("need at least one rater");
    }
    Xoshiro256 rng(seed);
    const std::size_t n = model.items();
    std::vector<Category> entries(n * raters);
    for (std::size_t k = 0; k < n; ++k) {
        const Category truth = model.labeling()[k];
        for (std::size_t i = 0; i < raters; ++i) {
            const double certainty = rng.uniform();
            const double chance = rng.uniform();
            entries[k * raters + i] = certainty < model.beta() ? truth : model.apriori().draw(chance);
        }
    }
    return RatingsMatrix(n, raters, std::move(entries), model.categories());
}

/// A category relabeling Phi, keyed by source label.
using CategoryMapping = std::map<std::string, std::string>;

namespace detail {

inline std::vector<Category> resolve_mapping(const CategorySet& source, const CategoryMapping& phi,
                                             const CategorySet& target, const std::vector<bool>& needed)
{
    std::vector<Category> idx(source.size(), 0);
    for (std::size_t c = 0; c < source.size(); ++c) {
        auto it = phi.find(source.label(static_cast<Category>(c)));
        if (it == phi.end()) {
            if (needed[c]) {
                throw InvalidArgument("unmapped category '" + source.label(static_cast<Category>(c)) + "'");
            }
            continue;
        }
        auto t = target.find(it->second);
        if (!t) {
            throw InvalidArgument("mapping target '" + it->second + "' is not in the target category set");
        }
        idx[c] = *t;
    }
    return idx;
}

}  // namespace detail

/// Applies Phi entrywise. Phi only needs to be defined on labels that occur.
inline RatingsMatrix map_categories(const RatingsMatrix& ratings, const CategoryMapping& phi, const CategorySet& target)
{
    std::vector<bool> occurs(ratings.categories().size(), false);
    for (Category c : ratings.entries()) {
        occurs[c] = true;
    }
    const auto idx = detail::resolve_mapping(ratings.categories(), phi, target, occurs);
    std::vector<Category> mapped(ratings.entries().size());
    for (std::size_t j = 0; j < mapped.size(); ++j) {
        mapped[j] = idx[ratings.entries()[j]];
    }
    return RatingsMatrix(ratings.items(), ratings.raters(), std::move(mapped), target);
}

/// The image model (beta, Phi o gamma, p') with p'_{c'} = sum over Phi(c) = c' of p_c.
/// Phi must be defined on every source category.
inline CoderModel map_categories(const CoderModel& model, const CategoryMapping& phi, const CategorySet& target)
{
    const auto idx =
        detail::resolve_mapping(model.categories(), phi, target, std::vector<bool>(model.m(), true));
    std::vector<Category> gamma(model.items());
    for (std::size_t k = 0; k < gamma.size(); ++k) {
        gamma[k] = idx[model.labeling()[k]];
    }
    std::vector<double> p(target.size(), 0.0);
    for (std::size_t c = 0; c < model.m(); ++c) {
        p[idx[c]] += model.p()[c];
    }
    // re-normalise away the rounding of the additions
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) {
        x = std::min(1.0, x / sum);
    }
    return CoderModel(model.beta(), TrueLabeling(std::move(gamma), target.size()), AprioriDist(std::move(p)), target);
}

}  // namespace icr
