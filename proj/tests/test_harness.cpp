#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "icr/harness.hpp"

using namespace icr;

namespace {

ModelSpec fig1_spec(double beta = 0.85)
{
    ModelSpec m;
    m.categories = {"c1", "c2", "c3"};
    m.beta = beta;
    m.tau = {0.3, 0.6, 0.1};
    m.p = {0.33, 0.33, 0.34};
    m.items = 100;
    return m;
}

SweepConfig small_sweep()
{
    SweepConfig c;
    c.base = fig1_spec();
    c.raters = 5;
    c.replications = 40;
    c.master_seed = 9;
    c.axis = SweepAxis::beta;
    c.values = {0.6, 0.9};
    return c;
}

}  // namespace

TEST(Quantiles, Constant)
{
    const auto q = quantiles(std::vector<double>(17, 0.1), default_quantile_levels());
    for (double v : q) {
        EXPECT_EQ(v, 0.1);
    }
}

TEST(Quantiles, OrderStatistics)
{
    std::vector<double> e;
    for (int i = 100; i >= 1; --i) {
        e.push_back(i / 100.0);
    }
    const auto q = quantiles(e, {0.5, 0.98, 1.0, 0.07});
    EXPECT_EQ(q[0], 0.50);
    EXPECT_EQ(q[1], 0.98);
    EXPECT_EQ(q[2], 1.00);
    EXPECT_EQ(q[3], 0.07);
}

TEST(Quantiles, NondecreasingOnRandomInput)
{
    Xoshiro256 g(4);
    std::vector<double> e(333);
    for (double& x : e) {
        x = g.uniform();
    }
    const auto q = quantiles(e, default_quantile_levels());
    EXPECT_TRUE(std::is_sorted(q.begin(), q.end()));
    EXPECT_EQ(q.back(), *std::max_element(e.begin(), e.end()));
}

TEST(Quantiles, Errors)
{
    try {
        (void)quantiles({}, {0.5});
        FAIL();
    } catch (const std::exception& e) {
        EXPECT_STREQ(e.what(), "no successful replications");
    }
    EXPECT_THROW((void)quantiles({0.1}, {0.0}), InvalidArgument);
    EXPECT_THROW((void)quantiles({0.1}, {1.5}), InvalidArgument);
}

TEST(TauAxis, SplitRule)
{
    const auto t = tau_with_max(0.9, 3);
    EXPECT_DOUBLE_EQ(t[0], 0.9);
    EXPECT_NEAR(t[1], 0.1 * 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(t[2], 0.1 / 3.0, 1e-15);
    // at 1/3 the 2:1 split would exceed the maximum, so the rest is shared equally
    const auto u = tau_with_max(1.0 / 3.0, 3);
    for (double x : u) {
        EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
    }
    EXPECT_THROW((void)tau_with_max(0.2, 3), InvalidArgument);
    EXPECT_THROW((void)tau_with_max(1.0, 3), InvalidArgument);
}

TEST(Replications, BetaOneIsExact)
{
    SweepConfig c = small_sweep();
    c.base.beta = 1.0;
    c.replications = 1;
    c.values = {1.0};
    const auto out = run_replications(resolve_point(c, 0));
    ASSERT_EQ(out.errors.size(), 1u);
    EXPECT_LE(out.errors[0], 1e-12);
    EXPECT_EQ(out.failures, 0u);
}

TEST(Replications, SeedsFollowIndex)
{
    SweepConfig c = small_sweep();
    c.replications = 5;
    c.use_refine = false;
    const auto point = resolve_point(c, 1);
    const auto out = run_replications(point);
    ASSERT_EQ(out.errors.size(), 5u);
    for (std::size_t r = 0; r < 5; ++r) {
        const double beta = estimate_replication(point, mix_seed(9, 1, r), nullptr);
        EXPECT_EQ(out.errors[r], std::abs(beta - 0.9));
    }
}

TEST(Replications, FailuresAreCounted)
{
    SweepConfig c = small_sweep();
    c.base.categories = {"a", "b"};
    c.base.tau = {0.7, 0.3};
    c.base.p = {0.6, 0.4};
    c.base.items = 2000;
    c.values = {0.9};
    c.raters = 2;
    c.replications = 5;
    const auto out = run_replications(resolve_point(c, 0));
    EXPECT_EQ(out.failures, 5u);
    EXPECT_TRUE(out.errors.empty());
    ASSERT_EQ(out.failure_messages.size(), 1u);
    EXPECT_NE(out.failure_messages[0].find("two categories need three raters"), std::string::npos);
    EXPECT_THROW((void)sweep(c), ComputeError);
}

TEST(Sweep, ThreadCountDoesNotChangeResults)
{
    SweepConfig c = small_sweep();
    c.baselines = true;
    c.threads = 1;
    const auto serial = report_to_csv(sweep(c));
    c.threads = 4;
    EXPECT_EQ(report_to_csv(sweep(c)), serial);
    c.threads = 0;
    EXPECT_EQ(report_to_csv(sweep(c)), serial);
}

TEST(Sweep, CsvLayout)
{
    SweepConfig c = small_sweep();
    c.baselines = true;
    const auto report = sweep(c);
    const auto text = report_to_csv(report);
    const auto rows = csv::lines(text);
    EXPECT_EQ(rows[0], "sweep_value,n_success,n_fail,q50,q80,q90,q95,q98,q100,s_value,kappa,pi");
    ASSERT_GE(rows.size(), 3u);
    EXPECT_EQ(csv::split(rows[1]).size(), 12u);
    EXPECT_EQ(rows[1].substr(0, rows[1].find(',')), "0.59999999999999998");
    for (const auto& row : report.rows) {
        EXPECT_TRUE(std::is_sorted(row.quantiles.begin(), row.quantiles.end()));
        EXPECT_EQ(row.n_success + row.n_fail, 40u);
        for (double q : row.quantiles) {
            EXPECT_GE(q, 0.0);
            EXPECT_LE(q, 1.0);
        }
    }
    c.baselines = false;
    EXPECT_EQ(csv::lines(report_to_csv(sweep(c)))[0], "sweep_value,n_success,n_fail,q50,q80,q90,q95,q98,q100");
}

TEST(Sweep, AxesResolve)
{
    SweepConfig c = small_sweep();
    c.axis = SweepAxis::tau;
    c.values = {0.9, std::vector<double>{0.2, 0.3, 0.5}};
    EXPECT_NEAR(resolve_point(c, 0).model.tau()[0], 0.9, 1e-15);
    EXPECT_EQ(resolve_point(c, 1).model.labeling().counts(), (std::vector<std::size_t>{20, 30, 50}));
    EXPECT_EQ(format_sweep_value(c.values[1]), "0.20000000000000001;0.29999999999999999;0.5");

    c.axis = SweepAxis::raters;
    c.values = {3.0};
    EXPECT_EQ(resolve_point(c, 0).raters, 3u);
    c.values = {2.5};
    EXPECT_THROW((void)resolve_point(c, 0), InvalidArgument);

    c.axis = SweepAxis::items;
    c.values = {20.0};
    EXPECT_EQ(resolve_point(c, 0).model.items(), 20u);

    c.axis = SweepAxis::p;
    c.values = {std::vector<double>{0.6, 0.3, 0.1}};
    EXPECT_EQ(resolve_point(c, 0).model.p()[0], 0.6);
    c.values = {0.5};
    EXPECT_THROW((void)resolve_point(c, 0), InvalidArgument);
}

TEST(Sweep, ValidatesConfig)
{
    SweepConfig c = small_sweep();
    c.replications = 0;
    EXPECT_THROW((void)sweep(c), InvalidArgument);
    c = small_sweep();
    c.quantile_levels = {0.5, 1.2};
    EXPECT_THROW((void)sweep(c), InvalidArgument);
    c = small_sweep();
    c.values.clear();
    EXPECT_THROW((void)sweep(c), InvalidArgument);
}

TEST(Sweep, MoreItemsShrinkError)
{
    SweepConfig c = small_sweep();
    c.axis = SweepAxis::items;
    c.values = {20.0, 400.0};
    c.replications = 100;
    const auto r = sweep(c);
    EXPECT_GT(r.at(0, 0.98), r.at(1, 0.98));
}
