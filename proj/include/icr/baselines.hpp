#pragma once

// Classical chance-corrected agreement coefficients, reported next to beta for comparison.

#include <string>
#include <vector>

#include "icr/error.hpp"
#include "icr/model.hpp"

namespace icr {

struct CoefficientReport {
    double percent_agreement = 0.0;  ///< Ao: mean share of agreeing rater pairs per item
    double s_value = 0.0;            ///< Bennett, Alpert & Goldstein: (Ao - 1/m) / (1 - 1/m)
    double cohen_kappa_mean = 0.0;   ///< Cohen's kappa averaged over rater pairs
    double fleiss_pi = 0.0;          ///< Fleiss' multi-rater pi with pooled marginals
    std::vector<std::string> flags;
};

inline CoefficientReport coefficients(const RatingsMatrix& ratings)
{
    const std::size_t n = ratings.items();
    const std::size_t r = ratings.raters();
    const std::size_t m = ratings.categories().size();
    if (r < 2) {
        throw InvalidArgument("need at least two raters");
    }
    constexpr double degenerate = 1e-15;

    CoefficientReport out;
    std::vector<double> pooled(m, 0.0);
    std::vector<std::size_t> count(m);
    double agree_pairs = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < r; ++i) {
            ++count[ratings(k, i)];
        }
        for (std::size_t c = 0; c < m; ++c) {
            if (count[c] > 1) {
                agree_pairs += static_cast<double>(count[c] * (count[c] - 1));
            }
            pooled[c] += static_cast<double>(count[c]);
        }
    }
    const double nd = static_cast<double>(n);
    const double rd = static_cast<double>(r);
    const double md = static_cast<double>(m);
    out.percent_agreement = agree_pairs / (nd * rd * (rd - 1.0));
    out.s_value = (out.percent_agreement - 1.0 / md) / (1.0 - 1.0 / md);

    double pe = 0.0;
    for (double& v : pooled) {
        v /= nd * rd;
        pe += v * v;
    }
    if (1.0 - pe <= degenerate) {
        out.flags.emplace_back("pi undefined");
        out.fleiss_pi = 0.0;
    } else {
        out.fleiss_pi = (out.percent_agreement - pe) / (1.0 - pe);
    }

    // per-rater marginals for Cohen's kappa
    std::vector<std::vector<double>> marg(r, std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < r; ++i) {
            marg[i][ratings(k, i)] += 1.0 / nd;
        }
    }
    double kappa_sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = i + 1; j < r; ++j) {
            double po = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                po += ratings(k, i) == ratings(k, j) ? 1.0 : 0.0;
            }
            po /= nd;
            double pij = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                pij += marg[i][c] * marg[j][c];
            }
            if (1.0 - pij > degenerate) {
                kappa_sum += (po - pij) / (1.0 - pij);
                ++defined;
            }
        }
    }
    if (defined == 0) {
        out.flags.emplace_back("kappa undefined");
    } else {
        out.cohen_kappa_mean = kappa_sum / static_cast<double>(defined);
        if (defined < r * (r - 1) / 2) {
            out.flags.emplace_back("kappa undefined for some rater pairs");
        }
    }
    return out;
}

}  // namespace icr
