#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hfrisk/error.hpp"
#include "hfrisk/metrics.hpp"
#include "hfrisk/special_functions.hpp"
#include "hfrisk/stats.hpp"
#include "hfrisk/synthesis.hpp"
#include "oracles/oracles.hpp"
#include "unit/support.hpp"

using namespace hfrisk;
using testing_support::Cell;

namespace {

std::vector<double> gaussian(Rng& rng, std::size_t n, double mean, double sd) {
    std::vector<double> v(n);
    for (auto& x : v) x = mean + sd * rng.normal();
    return v;
}

Cohort columns_cohort(const std::vector<std::vector<double>>& cols) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < cols.size(); ++j) names.push_back("c" + std::to_string(j));
    std::vector<std::vector<Cell>> rows(cols[0].size());
    std::vector<int> labels(cols[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& c : cols) rows[i].push_back(c[i]);
        labels[i] = static_cast<int>(i % 2);
    }
    return testing_support::make_cohort(names, rows, labels);
}

}  // namespace

TEST(SpecialFunctions, KnownValues) {
    EXPECT_NEAR(student_t_two_sided_p(0.0, 5.0), 1.0, 1e-15);
    EXPECT_NEAR(student_t_two_sided_p(2.0, 10.0), 0.07338803477074, 1e-10);
    EXPECT_NEAR(student_t_cdf(1.0, 1.0), 0.75, 1e-12);
    EXPECT_NEAR(regularized_incomplete_beta(2.0, 3.0, 0.4), 0.5248, 1e-12);
}

TEST(WelchT, IdenticalSamples) {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const auto r = welch_t_test(a, a);
    EXPECT_EQ(r.t_statistic, 0.0);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(WelchT, TableAgeRow) {
    const auto r = welch_t_test(SampleSummary{75.57, 12.13, 941}, SampleSummary{75.59, 11.83, 236});
    EXPECT_NEAR(r.p_value, 0.9832, 0.02);
}

TEST(WelchT, TableRbcRowSignificant) {
    const auto r = welch_t_test(SampleSummary{3.52, 0.57, 941}, SampleSummary{3.63, 0.58, 236});
    EXPECT_LT(r.p_value, 0.05);
}

TEST(WelchT, MatchesQuadratureOracle) {
    Rng rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        const auto a = gaussian(rng, 30, 0.0, 1.0);
        const auto b = gaussian(rng, 30, 0.4, 1.5);
        const auto r = welch_t_test(a, b);
        EXPECT_GT(r.degrees_of_freedom, 0.0);
        EXPECT_NEAR(r.p_value, oracle::t_two_sided_quadrature(r.t_statistic, r.degrees_of_freedom), 1e-6);
    }
}

TEST(WelchT, DegenerateSamples) {
    const std::vector<double> one{1.0};
    const std::vector<double> two{1.0, 2.0};
    const std::vector<double> c{3.0, 3.0};
    EXPECT_THROW(welch_t_test(one, two), NumericError);
    EXPECT_THROW(welch_t_test(c, c), NumericError);
}

TEST(TTestTable, SelfComparison) {
    const auto c = testing_support::random_cohort(50, 4, 2);
    for (const auto& r : t_test_table(c, c)) EXPECT_DOUBLE_EQ(r.p_value, 1.0) << r.feature;
}

TEST(TTestTable, SplitOfOneGenerator) {
    auto spec = *testing_support::planted_config().synthesis;
    spec.schema = bundled_schema();
    const auto parts = split(synthesize(spec), 0.2, true, 42);
    const auto table = t_test_table(parts.train, parts.test);
    std::size_t above = 0;
    for (const auto& r : table) {
        EXPECT_GE(r.p_value, 0.0);
        EXPECT_LE(r.p_value, 1.0);
        above += r.p_value > 0.05;
    }
    EXPECT_GE(double(above), 0.9 * double(table.size()));
}

TEST(TTestTable, ShiftedGeneratorDetected) {
    auto spec = *testing_support::planted_config().synthesis;
    spec.schema = bundled_schema();
    spec.n = 941;
    const auto a = synthesize(spec);
    auto features = bundled_schema().features();
    for (auto& f : features) {
        if (f.name == "Age") f.mean = *f.mean + 5.0;
    }
    spec.schema = Schema(features);
    spec.n = 236;
    spec.seed = 99;
    const auto b = synthesize(spec);
    for (const auto& r : t_test_table(a, b)) {
        if (r.feature == "Age") EXPECT_LT(r.p_value, 0.01);
    }
}

TEST(TTestTable, SchemaMismatch) {
    EXPECT_THROW(t_test_table(testing_support::random_cohort(20, 2, 1), testing_support::random_cohort(20, 3, 1)),
                 SchemaError);
}

TEST(Vif, OrthogonalFeatures) {
    const std::vector<double> a{1, -1, 1, -1, 1, -1, 1, -1};
    const std::vector<double> b{1, 1, -1, -1, 1, 1, -1, -1};
    const auto r = vif_filter(columns_cohort({a, b}), 5.0);
    for (const auto& e : r.entries) {
        EXPECT_NEAR(e.vif, 1.0, 1e-12);
        EXPECT_FALSE(e.removed);
    }
}

TEST(Vif, ExactCollinearTrio) {
    Rng rng(4);
    const auto a = gaussian(rng, 200, 0, 1);
    const auto b = gaussian(rng, 200, 0, 1);
    std::vector<double> c(200);
    for (std::size_t i = 0; i < 200; ++i) c[i] = a[i] + b[i];
    const auto r = vif_filter(columns_cohort({a, b, c}), 5.0);
    ASSERT_EQ(r.removed_features().size(), 1u);
    for (const auto& e : r.entries) {
        if (!e.removed) continue;
        EXPECT_EQ(e.removal_round, 1);
        EXPECT_TRUE(std::isinf(e.vif) || e.vif > 1e8) << e.vif;
    }
}

TEST(Vif, PlantedRSquaredMatchesOracle) {
    Rng rng(6);
    const std::size_t n = 5000;
    const auto a = gaussian(rng, n, 0, 1);
    const auto b = gaussian(rng, n, 0, 1);
    const double w = std::sqrt(0.45);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = w * a[i] + w * b[i] + std::sqrt(0.1) * rng.normal();
    const std::vector<std::vector<double>> cols{a, b, c};
    const auto vifs = variance_inflation(cols);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(vifs[j], oracle::normal_equations_vif(cols, j), 1e-6);
    EXPECT_NEAR(vifs[2], 10.0, 0.5);
    const auto r = vif_filter(columns_cohort(cols), 5.0);
    EXPECT_EQ(r.removed_features(), std::vector<std::string>{"c2"});
    for (const auto& e : r.entries) {
        if (!e.removed) EXPECT_LE(e.vif, 5.0);
    }
}

TEST(Vif, RemovalRoundsIncrease) {
    Rng rng(12);
    std::vector<std::vector<double>> cols;
    const auto base = gaussian(rng, 400, 0, 1);
    for (int j = 0; j < 5; ++j) {
        std::vector<double> c(400);
        for (std::size_t i = 0; i < 400; ++i) c[i] = base[i] + 0.2 * rng.normal();
        cols.push_back(c);
    }
    cols.push_back(gaussian(rng, 400, 0, 1));
    const auto r = vif_filter(columns_cohort(cols), 5.0);
    std::vector<int> rounds;
    for (const auto& e : r.entries) {
        if (!e.removed) {
            EXPECT_LE(e.vif, 5.0);
            continue;
        }
        ASSERT_TRUE(e.removal_round);
        rounds.push_back(*e.removal_round);
    }
    std::sort(rounds.begin(), rounds.end());
    for (std::size_t k = 0; k < rounds.size(); ++k) EXPECT_EQ(rounds[k], static_cast<int>(k) + 1);
    EXPECT_EQ(r.rounds, static_cast<int>(rounds.size()));
    EXPECT_GE(rounds.size(), 3u);
}

TEST(Vif, NotApplicable) {
    EXPECT_THROW(vif_filter(columns_cohort({{1, 2, 3}}), 5.0), DataError);
}

TEST(Bootstrap, ConstantMetric) {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y{0, 0, 1, 1};
    const auto ci = bootstrap_ci([](auto, auto) { return 0.5; }, s, y, 200, 0.05, 1);
    EXPECT_EQ(ci.lower, 0.5);
    EXPECT_EQ(ci.upper, 0.5);
}

TEST(Bootstrap, PerfectSeparation) {
    std::vector<double> s(200);
    std::vector<int> y(200);
    for (int i = 0; i < 200; ++i) {
        y[i] = i % 2;
        s[i] = y[i] + 0.001 * i;
    }
    const auto ci = bootstrap_ci(auc, s, y, 500, 0.05, 3);
    EXPECT_EQ(ci.point, 1.0);
    EXPECT_EQ(ci.upper, 1.0);
    EXPECT_LE(ci.lower, ci.upper);
}

TEST(Bootstrap, WidthScalesWithRootN) {
    auto mean_width = [](std::size_t n) {
        double total = 0;
        for (int rep = 0; rep < 30; ++rep) {
            Rng rng(derive_seed(n, static_cast<std::uint64_t>(rep)));
            std::vector<double> s(n);
            std::vector<int> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                y[i] = i % 2 ? 1 : 0;
                s[i] = y[i] + rng.normal();
            }
            const auto ci = bootstrap_ci(auc, s, y, 300, 0.05, static_cast<std::uint64_t>(rep));
            total += ci.upper - ci.lower;
        }
        return total / 30;
    };
    EXPECT_NEAR(mean_width(400) / mean_width(100), 0.5, 0.1);
}

TEST(Bootstrap, UndefinedMetricPropagates) {
    const std::vector<double> s{0.1, 0.2};
    const std::vector<int> y{1, 1};
    EXPECT_THROW(bootstrap_ci(auc, s, y, 10, 0.05, 1), NumericError);
}

TEST(Bootstrap, Deterministic) {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8, 0.5, 0.2};
    const std::vector<int> y{0, 0, 1, 1, 1, 0};
    EXPECT_EQ(bootstrap_replicates(auc, s, y, 50, 9), bootstrap_replicates(auc, s, y, 50, 9));
}

TEST(Quantile, Interpolation) {
    EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 1.0), 5.0);
}
