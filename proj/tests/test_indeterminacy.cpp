#include <gtest/gtest.h>

#include <cmath>

#include "icr/coincidence.hpp"
#include "icr/indeterminacy.hpp"

using namespace icr;

TEST(Region, FigureParameters)
{
    const auto r = indeterminacy_region(0.5, 0.7, 0.65, 100);
    ASSERT_EQ(r.region.size(), 1u);
    EXPECT_NEAR(r.region[0].lo, 0.4583, 5e-5);
    EXPECT_NEAR(r.region[0].hi, 0.7308, 5e-5);
    EXPECT_NEAR(r.region[0].lo, std::sqrt(0.21), 1e-15);
    EXPECT_NEAR(r.region[0].hi, 0.65 + 0.0525 / 0.65, 1e-15);
    EXPECT_GE(0.5, r.region[0].lo);
    EXPECT_LE(0.5, r.region[0].hi);
    ASSERT_FALSE(r.admissible.empty());
    for (std::size_t i = 1; i < r.admissible.size(); ++i) {
        EXPECT_LT(r.admissible[i - 1].beta, r.admissible[i].beta);
    }
}

TEST(Region, BetaZeroHasOnlyZero)
{
    const auto r = indeterminacy_region(0.0, 0.7, 0.6, 50);
    ASSERT_EQ(r.admissible.size(), 1u);
    EXPECT_EQ(r.admissible[0].beta, 0.0);
}

TEST(Region, DiscreteValueForSmallN)
{
    const auto r = indeterminacy_region(0.5, 0.7, 0.65, 10);
    bool found = false;
    for (const auto& a : r.admissible) {
        if (a.n == 2) {
            found = true;
            EXPECT_NEAR(a.beta, std::sqrt(0.21 / 0.96), 1e-15);
            EXPECT_NEAR(a.beta, 0.4677, 5e-5);
        }
    }
    EXPECT_TRUE(found);
}

TEST(Region, SplitIntervalWhenE1Interior)
{
    // with e1 = 0.9 the allowed set is [0, 0.2] u [0.1 + spread / 0.1, 1]
    const auto r = indeterminacy_region(0.3, 0.5, 0.9, 40);
    for (const auto& iv : r.region) {
        EXPECT_LE(iv.lo, iv.hi);
    }
    for (const auto& a : r.admissible) {
        EXPECT_TRUE(detail::contains(r.region, a.beta));
    }
}

TEST(Region, RejectsBadInput)
{
    EXPECT_THROW((void)indeterminacy_region(1.5, 0.5, 0.6, 10), InvalidArgument);
    EXPECT_THROW((void)indeterminacy_region(0.5, 0.5, 0.6, 0), InvalidArgument);
}

TEST(Alternative, ReproducesPairwiseMomentsButNotTriples)
{
    const auto model = CoderModel::from_tau(0.5, 100, {0.7, 0.3}, {0.6, 0.4});
    const auto s = theoretical_stats(model);
    const auto r = indeterminacy_region(0.5, 0.7, s.e1[0], 100);
    int reproduced = 0;
    bool triple_differs = false;
    for (const auto& a : r.admissible) {
        const auto alt = two_category_alternative(model, a.n);
        EXPECT_NEAR(alt.beta(), a.beta, 1e-15);
        const auto t = theoretical_stats(alt);
        double diff = 0.0;
        for (std::size_t c = 0; c < 2; ++c) {
            diff = std::max(diff, std::abs(t.e1[c] - s.e1[c]));
            for (std::size_t d = 0; d < 2; ++d) {
                diff = std::max(diff, std::abs(t.e2(c, d) - s.e2(c, d)));
            }
        }
        EXPECT_LE(diff, 1e-12) << "n=" << a.n;
        reproduced += diff <= 1e-12 ? 1 : 0;
        if (std::abs(a.beta - 0.5) > 1e-6 && std::abs((*t.e3)[0] - (*s.e3)[0]) > 1e-6) {
            triple_differs = true;
        }
    }
    EXPECT_GE(reproduced, 3);
    EXPECT_TRUE(triple_differs);
}

TEST(Alternative, RejectsBadN)
{
    const auto model = CoderModel::from_tau(0.5, 100, {0.7, 0.3}, {0.6, 0.4});
    EXPECT_THROW((void)two_category_alternative(model, 3), InvalidArgument);
    EXPECT_THROW((void)two_category_alternative(model, 100), InvalidArgument);
}
