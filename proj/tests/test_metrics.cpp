#include <vector>

#include <gtest/gtest.h>

#include "mgtd/metrics.hpp"
#include "mgtd/rng.hpp"

using namespace mgtd;

namespace {
std::pair<std::vector<int>, std::vector<int>> build(int tp, int fp, int fn, int tn) {
    std::vector<int> t, p;
    auto add = [&](int n, int tv, int pv) {
        for (int i = 0; i < n; ++i) {
            t.push_back(tv);
            p.push_back(pv);
        }
    };
    add(tp, 1, 1);
    add(fp, 0, 1);
    add(fn, 1, 0);
    add(tn, 0, 0);
    return {t, p};
}
} // namespace

TEST(Confusion, Examples) {
    std::vector<int> t{1, 0}, p{1, 0};
    EXPECT_EQ(confusion(t, p), (ConfusionMatrix{1, 0, 0, 1}));
    std::vector<int> t2{1, 1}, p2{0, 0};
    EXPECT_EQ(confusion(t2, p2).fn, 2u);
    const auto [t3, p3] = build(40, 10, 10, 40);
    EXPECT_EQ(confusion(t3, p3), (ConfusionMatrix{40, 10, 10, 40}));
}

TEST(Confusion, LengthMismatch) {
    std::vector<int> t{1, 0}, p{1};
    try {
        confusion(t, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
}

TEST(Metrics, HandComputedFixture) {
    const ConfusionMatrix cm{40, 10, 10, 40};
    for (auto mode : {Averaging::Positive, Averaging::Weighted}) {
        const auto m = metrics(cm, mode);
        EXPECT_EQ(m.accuracy, 0.8);
        EXPECT_EQ(m.precision, 0.8);
        EXPECT_EQ(m.recall, 0.8);
        EXPECT_DOUBLE_EQ(m.f1, 0.8);
    }
}

TEST(Metrics, AsymmetricFixture) {
    // tp30 fp10 fn20 tn40: P1=3/4, R1=3/5, P0=2/3, R0=4/5, supports 50/50.
    const ConfusionMatrix cm{30, 10, 20, 40};
    const auto pos = metrics(cm, Averaging::Positive);
    EXPECT_DOUBLE_EQ(pos.accuracy, 0.7);
    EXPECT_DOUBLE_EQ(pos.precision, 0.75);
    EXPECT_DOUBLE_EQ(pos.recall, 0.6);
    EXPECT_DOUBLE_EQ(pos.f1, 2.0 / 3.0);
    const auto w = metrics(cm, Averaging::Weighted);
    EXPECT_DOUBLE_EQ(w.precision, 0.5 * 0.75 + 0.5 * (2.0 / 3.0));
    EXPECT_DOUBLE_EQ(w.recall, 0.7);
    EXPECT_DOUBLE_EQ(w.f1, 0.5 * (2.0 / 3.0) + 0.5 * (2.0 * (2.0 / 3.0) * 0.8 / (2.0 / 3.0 + 0.8)));
}

TEST(Metrics, AllCorrect) {
    const auto m = metrics({5, 0, 0, 7}, Averaging::Weighted);
    EXPECT_EQ(m, (Metrics{1.0, 1.0, 1.0, 1.0}));
}

TEST(Metrics, ZeroDivisionConventions) {
    const auto m = metrics({0, 0, 5, 5}, Averaging::Positive);
    EXPECT_EQ(m.precision, 0.0);
    EXPECT_EQ(m.recall, 0.0);
    EXPECT_EQ(m.f1, 0.0);
    EXPECT_EQ(metrics({0, 3, 0, 2}, Averaging::Positive).recall, 0.0);
}

TEST(Metrics, EmptyMatrix) {
    try {
        metrics({}, Averaging::Positive);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyMatrix);
    }
}

TEST(Metrics, Properties) {
    Engine eng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const ConfusionMatrix cm{uniform_index(eng, 20), uniform_index(eng, 20), uniform_index(eng, 20),
                                 uniform_index(eng, 20) + 1};
        for (auto mode : {Averaging::Positive, Averaging::Weighted}) {
            const auto m = metrics(cm, mode);
            EXPECT_EQ(m.accuracy, static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total()));
            for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
            if (mode == Averaging::Positive && m.precision > 0 && m.recall > 0) {
                EXPECT_GE(m.f1, std::min(m.precision, m.recall) - 1e-15);
                EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-15);
            }
        }
        const auto w = metrics(cm, Averaging::Weighted);
        EXPECT_NEAR(w.recall, w.accuracy, 1e-12);
    }
}

TEST(Metrics, WeightedIdentityOnBalancedData) {
    // Equal supports, symmetric errors.
    for (std::uint64_t e = 0; e < 20; ++e) {
        const auto m = metrics({50 - e, e, e, 50 - e}, Averaging::Weighted);
        EXPECT_DOUBLE_EQ(m.precision, m.accuracy);
        EXPECT_DOUBLE_EQ(m.recall, m.accuracy);
    }
}
