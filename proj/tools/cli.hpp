#pragma once

// Command-line front end. run() is separate from main() so tests can drive it in-process.
// Exit codes: 0 success, 1 computation error, 2 usage or input error.

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icr/icr.hpp"

namespace icr::cli {

enum ExitCode { ok = 0, compute_failure = 1, usage = 2 };

namespace detail {

inline void emit(const std::string& out_path, const std::string& text, std::ostream& out)
{
    if (out_path.empty() || out_path == "-") {
        out << text;
    } else {
        csv::write_file(out_path, text);
    }
}

inline std::string region_to_csv(const IndeterminacyRegion& r)
{
    std::string s = "kind,lo,hi,n,beta_prime\n";
    for (const auto& iv : r.region) {
        s += "interval," + csv::format_double(iv.lo) + "," + csv::format_double(iv.hi) + ",,\n";
    }
    for (const auto& a : r.admissible) {
        s += "admissible,,," + std::to_string(a.n) + "," + csv::format_double(a.beta) + "\n";
    }
    return s;
}

inline std::string bounds_to_csv(const BetaInterval& b)
{
    return "lo,hi\n" + csv::format_double(b.lo) + "," + csv::format_double(b.hi) + "\n";
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Coder-model reliability estimation for nominal ratings", "icr"};
    app.require_subcommand(1);

    std::string config_path, out_path, ratings_path, stats_path, categories, tau_eq_p;
    std::vector<double> tau, p;
    bool no_refine = false;
    std::optional<double> eps;
    std::optional<unsigned> threads;
    double beta = 0.0, tau_scalar = 0.0, e1 = 0.0, pi0 = 0.0, pi1 = 0.0;
    std::size_t items = 0;
    std::optional<std::uint64_t> seed;

    auto* simulate = app.add_subcommand("simulate", "sample a ratings matrix from a config's model");
    simulate->add_option("--config", config_path, "JSON run configuration")->required();
    simulate->add_option("--out", out_path, "ratings CSV (default: stdout)");
    simulate->add_option("--seed", seed, "override the config seed");

    auto* est = app.add_subcommand("estimate", "estimate beta from ratings or coincidence statistics");
    auto* o_ratings = est->add_option("--ratings", ratings_path, "ratings CSV");
    auto* o_stats = est->add_option("--stats", stats_path, "coincidence statistics CSV");
    o_ratings->excludes(o_stats);
    est->add_option("--categories", categories, "comma-separated category order for the ratings file");
    auto* o_tau = est->add_option("--tau", tau, "known true-category frequencies")->delimiter(',');
    auto* o_p = est->add_option("--p", p, "known a-priori distribution")->delimiter(',');
    auto* o_eq = est->add_option("--tau-eq-p", tau_eq_p, "category whose tau equals its p");
    o_tau->excludes(o_p)->excludes(o_eq);
    o_p->excludes(o_eq);
    est->add_flag("--no-refine", no_refine, "skip least-squares refinement");
    est->add_option("--eps", eps, "C* threshold (default 2/sqrt(N R (R-1)))");
    est->add_option("--out", out_path, "result record (default: stdout)");

    auto* sw = app.add_subcommand("sweep", "Monte-Carlo error quantiles over a sweep axis");
    sw->add_option("--config", config_path, "JSON run configuration with a sweep block")->required();
    sw->add_option("--out", out_path, "report CSV (default: stdout)");
    sw->add_option("--threads", threads, "worker threads, 0 = hardware concurrency");

    auto* region = app.add_subcommand("region", "two-category indeterminacy region for beta'");
    region->add_option("--beta", beta, "true beta")->required();
    region->add_option("--tau", tau_scalar, "true frequency of one category")->required();
    region->add_option("--e1", e1, "largest single-category frequency")->required();
    region->add_option("--n", items, "number of items")->required();
    region->add_option("--out", out_path, "region CSV (default: stdout)");

    auto* stats = app.add_subcommand("stats", "coincidence statistics of a ratings file");
    stats->add_option("--ratings", ratings_path, "ratings CSV")->required();
    stats->add_option("--categories", categories, "comma-separated category order");
    stats->add_option("--out", out_path, "statistics CSV (default: stdout)");

    auto* bounds = app.add_subcommand("bounds", "beta interval from bounds on the chance agreement");
    auto* b_ratings = bounds->add_option("--ratings", ratings_path, "ratings CSV");
    auto* b_stats = bounds->add_option("--stats", stats_path, "coincidence statistics CSV");
    b_ratings->excludes(b_stats);
    bounds->add_option("--categories", categories, "comma-separated category order");
    bounds->add_option("--pi0", pi0, "lower bound on sum of squared a-priori probabilities")->required();
    bounds->add_option("--pi1", pi1, "upper bound on sum of squared a-priori probabilities")->required();
    bounds->add_option("--out", out_path, "interval CSV (default: stdout)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }

    auto category_set = [&]() -> std::optional<CategorySet> {
        if (categories.empty()) {
            return std::nullopt;
        }
        std::vector<std::string> labels;
        std::stringstream ss(categories);
        for (std::string l; std::getline(ss, l, ',');) {
            labels.push_back(l);
        }
        return CategorySet(labels);
    };
    auto load_stats = [&]() {
        if (!stats_path.empty()) {
            return stats_from_csv(csv::read_file(stats_path));
        }
        if (ratings_path.empty()) {
            throw InvalidArgument("one of --ratings and --stats is required");
        }
        return empirical_stats(read_ratings_csv(ratings_path, category_set()));
    };

    try {
        if (*simulate) {
            const auto cfg = load_config(config_path);
            const auto model = cfg.model.build();
            detail::emit(out_path, ratings_to_csv(sample_ratings(model, cfg.raters, seed.value_or(cfg.seed))), out);
        } else if (*est) {
            const auto s = load_stats();
            EstimateResult r{s.categories};
            if (!tau.empty()) {
                r = beta_tau_known(s, tau);
            } else if (!p.empty()) {
                r = beta_p_known(s, p);
            } else if (!tau_eq_p.empty()) {
                r = beta_tau_eq_p(s, s.categories.index_of(tau_eq_p));
            } else {
                r = estimate(s, eps);
                if (!no_refine) {
                    r = refine(s, r);
                }
            }
            detail::emit(out_path, to_record(r), out);
        } else if (*sw) {
            const auto cfg = load_config(config_path);
            if (!cfg.sweep) {
                throw InvalidArgument("config '" + config_path + "' has no sweep block");
            }
            SweepConfig sc = *cfg.sweep;
            if (threads) {
                sc.threads = *threads;
            }
            const auto report = sweep(sc);
            for (const auto& row : report.rows) {
                if (row.flagged) {
                    err << "warning: sweep value " << row.sweep_value << ": " << row.n_fail
                        << " failed replications (" << row.failure_messages.front() << ")\n";
                }
            }
            detail::emit(out_path, report_to_csv(report), out);
        } else if (*region) {
            detail::emit(out_path, detail::region_to_csv(indeterminacy_region(beta, tau_scalar, e1, items)), out);
        } else if (*stats) {
            detail::emit(out_path, stats_to_csv(empirical_stats(read_ratings_csv(ratings_path, category_set()))), out);
        } else if (*bounds) {
            detail::emit(out_path, detail::bounds_to_csv(beta_bounds(load_stats(), pi0, pi1)), out);
        }
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return compute_failure;
    }
    return ok;
}

}  // namespace icr::cli
