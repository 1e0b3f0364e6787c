#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "icr/rng.hpp"

namespace icr {

/// Reflection 1, expansion 2, contraction 1/2, shrink 1/2.
struct NelderMeadOptions {
    std::size_t max_iters = 2000;  ///< per restart
    double tol = 1e-12;            ///< stop when f_worst - f_best <= tol and the simplex is small
    double x_tol = 1e-9;           ///< simplex size bound (max coordinate distance to the best vertex)
    std::size_t restarts = 3;      ///< fresh simplices around the incumbent after the first run
    double step = 0.5;             ///< initial edge length
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Minimises f over R^n. Restart r > 0 rebuilds the simplex around the incumbent with
/// edge lengths jittered by a generator seeded with r, so the whole search is a
/// deterministic function of (f, x0, options). Restarting stops early once a restart
/// improves the incumbent by no more than tol.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt = {})
{
    const std::size_t n = x0.size();
    NelderMeadResult best;
    best.x = x0;
    best.value = f(x0);
    best.evaluations = 1;

    std::vector<std::vector<double>> simplex(n + 1);
    std::vector<double> values(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    std::vector<std::size_t> order(n + 1);

    auto eval = [&](const std::vector<double>& x) {
        ++best.evaluations;
        const double v = f(x);
        return std::isnan(v) ? HUGE_VAL : v;
    };
    auto along = [&](double t, std::vector<double>& out, const std::vector<double>& worst) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = centroid[i] + t * (worst[i] - centroid[i]);
        }
    };

    for (std::size_t restart = 0; restart <= opt.restarts; ++restart) {
        Xoshiro256 jitter(restart);
        simplex[0] = best.x;
        values[0] = best.value;
        for (std::size_t i = 0; i < n; ++i) {
            simplex[i + 1] = best.x;
            double h = opt.step;
            if (restart > 0) {
                h *= (0.5 + jitter.uniform()) * (jitter.uniform() < 0.5 ? -1.0 : 1.0);
            }
            simplex[i + 1][i] += h;
            values[i + 1] = eval(simplex[i + 1]);
        }

        const double start_value = best.value;
        bool converged = false;
        std::size_t it = 0;
        for (; it < opt.max_iters; ++it) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return values[a] < values[b] || (values[a] == values[b] && a < b);
            });
            const std::size_t lo = order.front();
            const std::size_t hi = order.back();
            const std::size_t second = order[n - 1];

            double size = 0.0;
            for (std::size_t v = 0; v <= n; ++v) {
                for (std::size_t i = 0; i < n; ++i) {
                    size = std::max(size, std::abs(simplex[v][i] - simplex[lo][i]));
                }
            }
            if (values[hi] - values[lo] <= opt.tol && size <= opt.x_tol) {
                converged = true;
                break;
            }

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t v = 0; v <= n; ++v) {
                if (v != hi) {
                    for (std::size_t i = 0; i < n; ++i) {
                        centroid[i] += simplex[v][i];
                    }
                }
            }
            for (double& c : centroid) {
                c /= static_cast<double>(n);
            }

            along(-1.0, trial, simplex[hi]);
            const double fr = eval(trial);
            if (fr < values[lo]) {
                along(-2.0, trial2, simplex[hi]);
                const double fe = eval(trial2);
                if (fe < fr) {
                    simplex[hi] = trial2;
                    values[hi] = fe;
                } else {
                    simplex[hi] = trial;
                    values[hi] = fr;
                }
                continue;
            }
            if (fr < values[second]) {
                simplex[hi] = trial;
                values[hi] = fr;
                continue;
            }
            // contraction, outside if the reflected point beat the worst vertex
            const bool outside = fr < values[hi];
            along(outside ? -0.5 : 0.5, trial2, simplex[hi]);
            const double fc = eval(trial2);
            if (fc < (outside ? fr : values[hi])) {
                simplex[hi] = trial2;
                values[hi] = fc;
                continue;
            }
            for (std::size_t v = 0; v <= n; ++v) {
                if (v == lo) {
                    continue;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    simplex[v][i] = simplex[lo][i] + 0.5 * (simplex[v][i] - simplex[lo][i]);
                }
                values[v] = eval(simplex[v]);
            }
        }
        best.iterations += it;

        const auto lo = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
        if (values[lo] < best.value) {
            best.value = values[lo];
            best.x = simplex[lo];
        }
        best.converged = converged;
        if (restart > 0 && converged && start_value - best.value <= opt.tol) {
            break;
        }
    }
    return best;
}

}  // namespace icr
