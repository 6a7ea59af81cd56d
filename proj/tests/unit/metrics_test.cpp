#include <gtest/gtest.h>

#include <cmath>

#include "hfrisk/error.hpp"
#include "hfrisk/metrics.hpp"
#include "hfrisk/random.hpp"
#include "oracles/oracles.hpp"

using namespace hfrisk;

TEST(Auc, MatchesPairCountingWithTies) {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.index(49);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::floor(rng.uniform() * 8.0) / 8.0;
            y[i] = rng.uniform() < 0.4;
        }
        y[0] = 0;
        y[1] = 1;
        const double want = oracle::pair_count_auc(s, y);
        EXPECT_NEAR(auc(s, y), want, 1e-12);
        EXPECT_NEAR(roc_curve(s, y).area(), want, 1e-12);
    }
}

TEST(Auc, KnownValues) {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y{0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(auc(s, y), 0.75);
    const std::vector<double> tied{0.5, 0.5, 0.5, 0.5};
    EXPECT_DOUBLE_EQ(auc(tied, y), 0.5);
}

TEST(Auc, UndefinedAndMalformed) {
    const std::vector<double> s{0.1, 0.2};
    EXPECT_THROW(auc(s, std::vector<int>{1, 1}), NumericError);
    EXPECT_THROW(auc(s, std::vector<int>{1}), DataError);
    EXPECT_THROW(auc(s, std::vector<int>{1, 2}), DataError);
}

TEST(Roc, EndpointsAndMonotone) {
    const std::vector<double> s{0.9, 0.8, 0.8, 0.3, 0.1};
    const std::vector<int> y{1, 0, 1, 0, 0};
    const auto roc = roc_curve(s, y);
    ASSERT_GE(roc.points.size(), 2u);
    EXPECT_EQ(roc.points.front().fpr, 0.0);
    EXPECT_EQ(roc.points.front().tpr, 0.0);
    EXPECT_EQ(roc.points.back().fpr, 1.0);
    EXPECT_EQ(roc.points.back().tpr, 1.0);
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        EXPECT_GE(roc.points[k].fpr, roc.points[k - 1].fpr);
        EXPECT_GE(roc.points[k].tpr, roc.points[k - 1].tpr);
        EXPECT_LE(roc.points[k].threshold, roc.points[k - 1].threshold);
    }
    const auto doc = to_json(roc);
    EXPECT_EQ(doc.at("points").front().at(2), "inf");
    EXPECT_EQ(doc.at("points").back().at(2), "-inf");
}

TEST(Accuracy, ThresholdInclusive) {
    const std::vector<double> s{0.5, 0.49, 0.9, 0.1};
    const std::vector<int> y{1, 0, 1, 1};
    EXPECT_DOUBLE_EQ(accuracy(s, y), 0.75);
    EXPECT_DOUBLE_EQ(accuracy(s, y, 0.05), 0.75);
}
