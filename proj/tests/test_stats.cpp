#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "mgtd/rng.hpp"
#include "mgtd/stats.hpp"
#include "oracles.hpp"

using namespace mgtd;

TEST(Welch, PinnedReferenceValues) {
    for (const auto& c : oracle::welch_cases()) {
        const auto r = welch_ttest(c.a, c.b);
        EXPECT_NEAR(r.t_statistic, c.t, 1e-4);
        EXPECT_NEAR(r.dof, c.dof, 1e-4);
        EXPECT_NEAR(r.p_value, c.p, 1e-4);
        EXPECT_NEAR(r.p_value, c.p, 1e-10 * std::max(1.0, c.p));
        EXPECT_EQ(r.significant_at_005, c.p < 0.05);
    }
}

TEST(Welch, SmallExample) {
    const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
    const auto r = welch_ttest(a, b);
    EXPECT_NEAR(r.t_statistic, -1.2247, 1e-4);
    EXPECT_NEAR(r.dof, 4.0, 1e-12);
    EXPECT_NEAR(r.p_value, 0.2878, 1e-3);
    EXPECT_FALSE(r.significant_at_005);
}

TEST(Welch, IdenticalSamples) {
    const std::vector<double> a{1.5, 2.5, 7.0, 3.0};
    const auto r = welch_ttest(a, a);
    EXPECT_EQ(r.t_statistic, 0.0);
    EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(Welch, ZeroVarianceBoth) {
    const std::vector<double> a{2, 2, 2}, b{2, 2}, c{3, 3, 3};
    auto r = welch_ttest(a, b);
    EXPECT_EQ(r.t_statistic, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
    r = welch_ttest(a, c);
    EXPECT_TRUE(std::isinf(r.t_statistic));
    EXPECT_LT(r.t_statistic, 0.0);
    EXPECT_EQ(r.p_value, 0.0);
    EXPECT_TRUE(r.significant_at_005);
}

TEST(Welch, SeparatedMeansSignificant) {
    const std::vector<double> a{100.0, 100.01, 99.99, 100.02}, b{1.0, 1.01, 0.99, 1.02};
    EXPECT_TRUE(welch_ttest(a, b).significant_at_005);
}

TEST(Welch, TooFewSamples) {
    const std::vector<double> a{1.0}, b{1.0, 2.0};
    try {
        welch_ttest(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
    }
}

TEST(Welch, AntisymmetricAndBounded) {
    Engine eng(3);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> a(2 + uniform_index(eng, 30)), b(2 + uniform_index(eng, 30));
        const double shift = normal01(eng);
        for (auto& v : a) v = normal01(eng) * (0.1 + uniform01(eng) * 3);
        for (auto& v : b) v = shift + normal01(eng) * (0.1 + uniform01(eng) * 3);
        const auto ab = welch_ttest(a, b), ba = welch_ttest(b, a);
        EXPECT_DOUBLE_EQ(ab.t_statistic, -ba.t_statistic);
        EXPECT_DOUBLE_EQ(ab.p_value, ba.p_value);
        EXPECT_GE(ab.p_value, 0.0);
        EXPECT_LE(ab.p_value, 1.0);
        const double lo = std::min<double>(a.size(), b.size()) - 1, hi = static_cast<double>(a.size() + b.size() - 2);
        EXPECT_GE(ab.dof, lo - 1e-9);
        EXPECT_LE(ab.dof, hi + 1e-9);
    }
}

TEST(Welch, TwoSidedPMatchesDistributionOracle) {
    Engine eng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        const double dof = 1.0 + uniform01(eng) * 999.0;
        const double t = uniform01(eng) * 8.0;
        boost::math::students_t dist(dof);
        const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
        const double got = student_t_two_sided_p(t, dof);
        EXPECT_NEAR(got, expected, 1e-10 * std::max(expected, 1e-3)) << "dof=" << dof << " t=" << t;
    }
}

TEST(IncompleteBeta, MatchesBoost) {
    Engine eng(6);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = 0.05 + uniform01(eng) * 50, b = 0.05 + uniform01(eng) * 50, x = uniform01(eng);
        const double expected = boost::math::ibeta(a, b, x);
        EXPECT_NEAR(incomplete_beta(a, b, x), expected, 1e-11) << a << " " << b << " " << x;
    }
    EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(Descriptive, SampleSd) {
    const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_DOUBLE_EQ(mean(x), 5.0);
    EXPECT_NEAR(sample_sd(x), std::sqrt(32.0 / 7.0), 1e-12);
}
