#pragma once

// Least-squares refinement of (beta, tau, p) against observed coincidence statistics:
//
//   sum_c (e1_c(beta,tau,p) - e1_c)^2
// + sum_{c1,c2} (e2_{c1,c2}(beta,tau,p) - e2_{c1,c2})^2
// + sum_c (e3_c(beta,tau,p) - e3_c)^2          (only when e3 was observed)
//
// minimised over beta in [0,1] and tau, p on the simplex. The constraints are removed by
// beta = logistic(x_0) and tau, p = softmax of m unconstrained coordinates each.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "icr/coincidence.hpp"
#include "icr/error.hpp"
#include "icr/estimators.hpp"
#include "icr/nelder_mead.hpp"

namespace icr {

/// How the pair block of the objective is indexed.
enum class PairTerm {
    full_cross,  ///< every (c1, c2) cell of e2 against the full cross formula (default)
    diagonal,    ///< only the self-coincidences e2[c][c]
};

struct RefineOptions {
    std::size_t max_iters = 2000;
    double tol = 1e-12;
    std::size_t restarts = 3;
    PairTerm pair_term = PairTerm::full_cross;

    void validate() const
    {
        if (max_iters < 1) {
            throw InvalidArgument("max_iters must be >= 1");
        }
        if (!(tol > 0.0)) {
            throw InvalidArgument("tol must be > 0");
        }
    }
};

inline double lsq_objective(double beta, const std::vector<double>& tau, const std::vector<double>& p,
                            const CoincidenceStats& s, PairTerm pair_term = PairTerm::full_cross)
{
    const std::size_t m = s.m();
    const double b = beta;
    const double nb = 1.0 - beta;
    double sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        const double r1 = b * tau[c] + nb * p[c] - s.e1[c];
        sum += r1 * r1;
        if (pair_term == PairTerm::full_cross) {
            for (std::size_t d = 0; d < m; ++d) {
                const double model = (c == d ? b * b * tau[c] : 0.0) + b * nb * (tau[c] * p[d] + tau[d] * p[c]) +
                                     nb * nb * p[c] * p[d];
                const double r2 = model - s.e2(c, d);
                sum += r2 * r2;
            }
        } else {
            const double model = b * b * tau[c] + 2.0 * b * nb * tau[c] * p[c] + nb * nb * p[c] * p[c];
            const double r2 = model - s.e2(c, c);
            sum += r2 * r2;
        }
        if (s.e3) {
            const double model = b * b * b * tau[c] + 3.0 * b * b * nb * tau[c] * p[c] +
                                 3.0 * b * nb * nb * tau[c] * p[c] * p[c] + nb * nb * nb * p[c] * p[c] * p[c];
            const double r3 = model - (*s.e3)[c];
            sum += r3 * r3;
        }
    }
    return sum;
}

namespace detail {

inline double logistic(double x)
{
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline void softmax(const double* x, std::size_t m, std::vector<double>& out)
{
    const double top = *std::max_element(x, x + m);
    double sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        out[c] = std::exp(x[c] - top);
        sum += out[c];
    }
    for (double& v : out) {
        v /= sum;
    }
}

/// tau from the excess identity tau (1 - tau) = excess / beta^2, taking for each category
/// the root nearer its observed frequency e1.
inline std::vector<double> tau_start(const CoincidenceStats& s, double beta)
{
    if (!(beta > 0.0)) {
        return s.e1;
    }
    std::vector<double> tau(s.m());
    for (std::size_t c = 0; c < s.m(); ++c) {
        const double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * std::max(0.0, s.excess(c)) / (beta * beta)));
        const double lo = 0.5 * (1.0 - root);
        const double hi = 0.5 * (1.0 + root);
        tau[c] = std::abs(lo - s.e1[c]) <= std::abs(hi - s.e1[c]) ? lo : hi;
    }
    auto t = to_simplex(std::move(tau));
    return t ? *t : s.e1;
}

}  // namespace detail

/// Local least-squares refinement started from a closed-form estimate. Missing tau/p in
/// `start` are filled from the excess identity and the e1 relation. Never returns a point
/// with a larger objective than the start.
inline EstimateResult refine(const CoincidenceStats& s, const EstimateResult& start, const RefineOptions& opts = {})
{
    opts.validate();
    const std::size_t m = s.m();
    const double beta0 = std::clamp(start.beta_hat, 0.0, 1.0);
    std::vector<double> tau0 = start.tau_hat ? *start.tau_hat : detail::tau_start(s, beta0);
    std::vector<double> p0;
    if (start.p_hat) {
        p0 = *start.p_hat;
    } else if (auto p = detail::p_from_e1(s, beta0, tau0)) {
        p0 = *p;
    } else {
        p0.assign(m, 1.0 / static_cast<double>(m));
    }

    EstimateResult r = start;
    r.method = Method::refined;
    if (!s.has_e3() && detect_cstar(s, default_threshold(s)).size() == 2) {
        r.note("beta not identifiable for m*=2");
    }

    const double f0 = lsq_objective(beta0, tau0, p0, s, opts.pair_term);
    r.beta_hat = beta0;
    r.tau_hat = tau0;
    r.p_hat = p0;
    r.objective = f0;
    r.iterations = 0;
    if (f0 == 0.0) {
        r.note("objective 0 at start");
        return r;
    }

    constexpr double floor = 1e-8;
    std::vector<double> x0(1 + 2 * m);
    const double b = std::clamp(beta0, 1e-6, 1.0 - 1e-6);
    x0[0] = std::log(b / (1.0 - b));
    for (std::size_t c = 0; c < m; ++c) {
        x0[1 + c] = std::log(std::max(tau0[c], floor));
        x0[1 + m + c] = std::log(std::max(p0[c], floor));
    }

    std::vector<double> tau(m), p(m);
    auto objective = [&](const std::vector<double>& x) {
        detail::softmax(x.data() + 1, m, tau);
        detail::softmax(x.data() + 1 + m, m, p);
        return lsq_objective(detail::logistic(x[0]), tau, p, s, opts.pair_term);
    };

    NelderMeadOptions nm;
    nm.max_iters = opts.max_iters;
    nm.tol = opts.tol;
    nm.restarts = opts.restarts;
    const auto best = nelder_mead(objective, x0, nm);

    r.iterations = best.iterations;
    if (best.value < f0) {
        detail::softmax(best.x.data() + 1, m, tau);
        detail::softmax(best.x.data() + 1 + m, m, p);
        r.beta_hat = detail::logistic(best.x[0]);
        r.tau_hat = tau;
        r.p_hat = p;
        r.objective = best.value;
    } else {
        r.note("start point kept");
    }
    if (!best.converged) {
        r.note("max iterations");
    }
    r.note("objective " + detail::fmt(*r.objective));
    r.note("iterations " + std::to_string(r.iterations));
    return r;
}

}  // namespace icr
