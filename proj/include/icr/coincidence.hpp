#pragma once

// Agreement moments of the coder model.
//
//   e1[c]      = E(#{k : X_{1,k} = c} / N)
//   e2[c1][c2] = E(#{k : X_{1,k} = c1, X_{2,k} = c2} / N)
//   e3[c]      = E(#{k : X_{1,k} = X_{2,k} = X_{3,k} = c} / N)
//
// computed in closed form from model parameters, by brute-force enumeration of the
// joint outcome space (test oracle), or as pooled relative frequencies of a RatingsMatrix.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icr/csv.hpp"
#include "icr/error.hpp"
#include "icr/model.hpp"

namespace icr {

/// Dense row-major m x m matrix.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t m, double fill = 0.0) : m_(m), data_(m * m, fill) {}

    std::size_t size() const { return m_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * m_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * m_ + j]; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t m_ = 0;
    std::vector<double> data_;
};

enum class StatsSource { theoretical, empirical };

struct CoincidenceStats {
    CategorySet categories;
    std::vector<double> e1;
    SquareMatrix e2;
    std::optional<std::vector<double>> e3;  ///< absent when fewer than three raters
    StatsSource source = StatsSource::theoretical;
    std::size_t items = 0;   ///< N, empirical only
    std::size_t raters = 0;  ///< R, empirical only

    std::size_t m() const { return categories.size(); }
    bool has_e3() const { return e3.has_value(); }

    /// e2[c][c] - e1[c]^2, which equals beta^2 tau_c (1 - tau_c) for exact moments.
    double excess(std::size_t c) const { return e2(c, c) - e1[c] * e1[c]; }

    /// Sum of the diagonal of e2: the probability that two raters agree.
    double agreement() const
    {
        double s = 0.0;
        for (std::size_t c = 0; c < m(); ++c) {
            s += e2(c, c);
        }
        return s;
    }

    void validate() const
    {
        const std::size_t n = m();
        if (e1.size() != n || e2.size() != n || (e3 && e3->size() != n)) {
            throw InvalidArgument("coincidence statistics have inconsistent dimensions");
        }
        auto in_unit = [](double v) { return v >= -1e-12 && v <= 1.0 + 1e-12; };
        double s1 = 0.0;
        double s2 = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (!in_unit(e1[c]) || (e3 && !in_unit((*e3)[c]))) {
                throw InvalidArgument("coincidence statistic outside [0,1]");
            }
            s1 += e1[c];
            for (std::size_t d = 0; d < n; ++d) {
                if (!in_unit(e2(c, d))) {
                    throw InvalidArgument("coincidence statistic outside [0,1]");
                }
                if (std::abs(e2(c, d) - e2(d, c)) > 1e-12) {
                    throw InvalidArgument("e2 is not symmetric");
                }
                s2 += e2(c, d);
            }
            if (e2(c, c) > e1[c] + 1e-12 || (e3 && (*e3)[c] > e2(c, c) + 1e-12)) {
                throw InvalidArgument("nested agreement frequencies must not increase (e3 <= e2 <= e1)");
            }
        }
        if (std::abs(s1 - 1.0) > 1e-9 || std::abs(s2 - 1.0) > 1e-9) {
            throw InvalidArgument("e1 and e2 must each sum to 1");
        }
    }
};

/// Closed-form moments for exact expectations.
inline CoincidenceStats theoretical_stats(const CoderModel& model)
{
    const std::size_t m = model.m();
    const double b = model.beta();
    const double nb = 1.0 - b;
    const auto& tau = model.tau();
    const auto& p = model.p();

    CoincidenceStats s{model.categories(), std::vector<double>(m), SquareMatrix(m), std::vector<double>(m)};
    for (std::size_t c = 0; c < m; ++c) {
        s.e1[c] = b * tau[c] + nb * p[c];
        for (std::size_t d = 0; d < m; ++d) {
            s.e2(c, d) = (c == d ? b * b * tau[c] : 0.0) + b * nb * (tau[c] * p[d] + tau[d] * p[c]) + nb * nb * p[c] * p[d];
        }
        (*s.e3)[c] = b * b * b * tau[c] + 3.0 * b * b * nb * tau[c] * p[c] + 3.0 * b * nb * nb * tau[c] * p[c] * p[c] +
                     nb * nb * nb * p[c] * p[c] * p[c];
    }
    s.source = StatsSource::theoretical;
    return s;
}

/// Pooled plug-in estimates. e2 averages over all ordered rater pairs, e3 over all
/// unordered rater triples. Counts are accumulated in integers, so the result does not
/// depend on summation order.
inline CoincidenceStats empirical_stats(const RatingsMatrix& ratings)
{
    const std::size_t n = ratings.items();
    const std::size_t r = ratings.raters();
    const std::size_t m = ratings.categories().size();
    if (r < 2) {
        throw InvalidArgument("need at least two raters");
    }

    std::vector<std::uint64_t> single(m, 0);
    std::vector<std::uint64_t> pairs(m * m, 0);
    std::vector<std::uint64_t> triples(m, 0);
    std::vector<std::uint64_t> count(m);
    for (std::size_t k = 0; k < n; ++k) {
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < r; ++i) {
            ++count[ratings(k, i)];
        }
        for (std::size_t c = 0; c < m; ++c) {
            const std::uint64_t s = count[c];
            single[c] += s;
            if (s == 0) {
                continue;
            }
            for (std::size_t d = 0; d < m; ++d) {
                pairs[c * m + d] += c == d ? s * (s - 1) : s * count[d];
            }
            if (s >= 3) {
                triples[c] += s * (s - 1) * (s - 2);
            }
        }
    }

    const double nd = static_cast<double>(n);
    const double rd = static_cast<double>(r);
    CoincidenceStats st{ratings.categories(), std::vector<double>(m), SquareMatrix(m), std::nullopt};
    for (std::size_t c = 0; c < m; ++c) {
        st.e1[c] = static_cast<double>(single[c]) / (nd * rd);
        for (std::size_t d = 0; d < m; ++d) {
            st.e2(c, d) = static_cast<double>(pairs[c * m + d]) / (nd * rd * (rd - 1.0));
        }
    }
    if (r >= 3) {
        st.e3 = std::vector<double>(m);
        for (std::size_t c = 0; c < m; ++c) {
            (*st.e3)[c] = static_cast<double>(triples[c]) / (nd * rd * (rd - 1.0) * (rd - 2.0));
        }
    }
    st.source = StatsSource::empirical;
    st.items = n;
    st.raters = r;
    return st;
}

/// Exact expectations by summing over every joint outcome of R raters on each item.
/// Independent of the closed-form route; use as an oracle on small instances.
inline CoincidenceStats enumerate_stats_oracle(const CoderModel& model, std::size_t raters)
{
    const std::size_t m = model.m();
    const std::size_t n = model.items();
    if (raters < 2) {
        throw InvalidArgument("need at least two raters");
    }
    double outcomes = 1.0;
    for (std::size_t i = 0; i < raters; ++i) {
        outcomes *= static_cast<double>(m);
    }
    if (outcomes * static_cast<double>(n) > 1e6) {
        throw InvalidArgument("instance too large for oracle");
    }

    CoincidenceStats st{model.categories(), std::vector<double>(m, 0.0), SquareMatrix(m, 0.0), std::nullopt};
    std::vector<double> e3(m, 0.0);
    std::vector<Category> x(raters);
    for (std::size_t k = 0; k < n; ++k) {
        std::fill(x.begin(), x.end(), 0);
        while (true) {
            double prob = 1.0;
            for (std::size_t i = 0; i < raters; ++i) {
                prob *= model.cell_probability(k, x[i]);
            }
            st.e1[x[0]] += prob;
            st.e2(x[0], x[1]) += prob;
            if (raters >= 3 && x[0] == x[1] && x[1] == x[2]) {
                e3[x[0]] += prob;
            }
            std::size_t pos = 0;
            while (pos < raters && ++x[pos] == m) {
                x[pos++] = 0;
            }
            if (pos == raters) {
                break;
            }
        }
    }
    const double nd = static_cast<double>(n);
    for (std::size_t c = 0; c < m; ++c) {
        st.e1[c] /= nd;
        for (std::size_t d = 0; d < m; ++d) {
            st.e2(c, d) /= nd;
        }
        e3[c] /= nd;
    }
    if (raters >= 3) {
        st.e3 = std::move(e3);
    }
    st.source = StatsSource::theoretical;
    return st;
}

// Stats bundle: one sectioned CSV file.
//
//   section,category_1,category_2,value
//   SOURCE,theoretical,,            | SOURCE,empirical,<N>,<R>
//   CATEGORY,"<label>",,            (one per category, in order)
//   E1,"<c>",,<value>
//   E2,"<c1>","<c2>",<value>
//   E3,"<c>",,<value>               (only when e3 is present)

inline std::string stats_to_csv(const CoincidenceStats& s)
{
    std::string out = "section,category_1,category_2,value\n";
    if (s.source == StatsSource::theoretical) {
        out += "SOURCE,theoretical,,\n";
    } else {
        out += "SOURCE,empirical," + std::to_string(s.items) + "," + std::to_string(s.raters) + "\n";
    }
    const auto& lab = s.categories.labels();
    for (const auto& l : lab) {
        out += "CATEGORY," + csv::quote(l) + ",,\n";
    }
    for (std::size_t c = 0; c < s.m(); ++c) {
        out += "E1," + csv::quote(lab[c]) + ",," + csv::format_double(s.e1[c]) + "\n";
    }
    for (std::size_t c = 0; c < s.m(); ++c) {
        for (std::size_t d = 0; d < s.m(); ++d) {
            out += "E2," + csv::quote(lab[c]) + "," + csv::quote(lab[d]) + "," + csv::format_double(s.e2(c, d)) + "\n";
        }
    }
    if (s.e3) {
        for (std::size_t c = 0; c < s.m(); ++c) {
            out += "E3," + csv::quote(lab[c]) + ",," + csv::format_double((*s.e3)[c]) + "\n";
        }
    }
    return out;
}

inline CoincidenceStats stats_from_csv(const std::string& text)
{
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != "section,category_1,category_2,value") {
        throw InvalidArgument("stats bundle header must be section,category_1,category_2,value");
    }
    std::vector<std::string> labels;
    std::vector<std::vector<std::string>> body;
    StatsSource source = StatsSource::theoretical;
    std::size_t items = 0;
    std::size_t raters = 0;
    bool have_source = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].empty()) {
            continue;
        }
        auto f = csv::split(rows[i]);
        if (f.size() != 4) {
            throw InvalidArgument("stats bundle line " + std::to_string(i + 1) + " must have 4 fields");
        }
        if (f[0] == "SOURCE") {
            have_source = true;
            if (f[1] == "theoretical") {
                source = StatsSource::theoretical;
            } else if (f[1] == "empirical") {
                source = StatsSource::empirical;
                items = static_cast<std::size_t>(csv::parse_double(f[2]));
                raters = static_cast<std::size_t>(csv::parse_double(f[3]));
            } else {
                throw InvalidArgument("unknown stats source '" + f[1] + "'");
            }
        } else if (f[0] == "CATEGORY") {
            labels.push_back(f[1]);
        } else {
            body.push_back(std::move(f));
        }
    }
    if (!have_source) {
        throw InvalidArgument("stats bundle lacks a SOURCE line");
    }
    CategorySet cats(labels);
    const std::size_t m = cats.size();
    CoincidenceStats s{cats, std::vector<double>(m, -1.0), SquareMatrix(m, -1.0), std::nullopt};
    s.source = source;
    s.items = items;
    s.raters = raters;
    std::vector<double> e3(m, -1.0);
    bool any_e3 = false;
    for (const auto& f : body) {
        const double v = csv::parse_double(f[3]);
        if (f[0] == "E1") {
            s.e1[cats.index_of(f[1])] = v;
        } else if (f[0] == "E2") {
            s.e2(cats.index_of(f[1]), cats.index_of(f[2])) = v;
        } else if (f[0] == "E3") {
            e3[cats.index_of(f[1])] = v;
            any_e3 = true;
        } else {
            throw InvalidArgument("unknown stats section '" + f[0] + "'");
        }
    }
    auto missing = [](double v) { return v < 0.0; };
    if (std::any_of(s.e1.begin(), s.e1.end(), missing) ||
        std::any_of(s.e2.data().begin(), s.e2.data().end(), missing) ||
        (any_e3 && std::any_of(e3.begin(), e3.end(), missing))) {
        throw InvalidArgument("stats bundle is missing entries");
    }
    if (any_e3) {
        s.e3 = std::move(e3);
    }
    s.validate();
    return s;
}

}  // namespace icr
