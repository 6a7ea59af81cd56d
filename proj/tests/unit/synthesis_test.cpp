#include <gtest/gtest.h>

#include <cmath>

#include "hfrisk/error.hpp"
#include "hfrisk/synthesis.hpp"
#include "unit/support.hpp"

using namespace hfrisk;

namespace {

SynthesisSpec base_spec(std::size_t n, std::uint64_t seed) {
    auto spec = *testing_support::planted_config().synthesis;
    spec.schema = bundled_schema();
    spec.n = n;
    spec.seed = seed;
    return spec;
}

double column_mean(const Cohort& c, std::size_t col, std::optional<int> outcome = {}) {
    double s = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < c.rows(); ++i) {
        if (c.is_missing(i, col)) continue;
        if (outcome && c.outcome(i) != outcome) continue;
        s += c.value(i, col);
        ++k;
    }
    return s / static_cast<double>(k);
}

}  // namespace

TEST(Synthesis, AgeMeanWithinThreeStandardErrors) {
    auto spec = base_spec(10000, 42);
    const auto c = synthesize(spec);
    const auto age = bundled_schema().require("Age");
    EXPECT_NEAR(column_mean(c, age), 75.57, 0.4);
}

TEST(Synthesis, ZeroMissingRate) {
    auto spec = base_spec(500, 1);
    spec.missing_rate = 0.0;
    EXPECT_EQ(synthesize(spec).missing_cells(), 0u);
}

TEST(Synthesis, MissingRateRealised) {
    auto spec = base_spec(2000, 1);
    spec.missing_rate = 0.1;
    const auto c = synthesize(spec);
    const double rate = double(c.missing_cells()) / double(c.rows() * c.cols());
    EXPECT_NEAR(rate, 0.1, 0.005);
}

TEST(Synthesis, PositiveCoefficientRaisesGroupMean) {
    auto spec = base_spec(3000, 7);
    spec.signal = {{.feature = "Leucocyte", .coefficient = 2.0}};
    const auto c = synthesize(spec);
    const auto col = bundled_schema().require("Leucocyte");
    EXPECT_GT(column_mean(c, col, 1), column_mean(c, col, 0));
}

TEST(Synthesis, OutcomeRateAndBinaryPrevalence) {
    auto spec = base_spec(5000, 3);
    const auto c = synthesize(spec);
    EXPECT_NEAR(double(c.positives()) / double(c.rows()), spec.outcome_rate, 0.02);
    const auto& schema = bundled_schema();
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (schema[j].kind != FeatureKind::binary) continue;
        const double se = std::sqrt(*schema[j].prevalence * (1 - *schema[j].prevalence) / 5000.0);
        EXPECT_NEAR(column_mean(c, j), *schema[j].prevalence, 4 * se + 1e-9) << schema[j].name;
    }
}

TEST(Synthesis, DeterministicPerSeed) {
    EXPECT_EQ(synthesize(base_spec(300, 5)), synthesize(base_spec(300, 5)));
    EXPECT_NE(synthesize(base_spec(300, 5)), synthesize(base_spec(300, 6)));
}

TEST(Synthesis, CorrelatedFeatures) {
    auto spec = base_spec(4000, 2);
    std::vector<FeatureSpec> f{{.name = "a", .mean = 0.0, .std = 1.0}, {.name = "b", .mean = 10.0, .std = 2.0}};
    spec.schema = Schema(f);
    spec.signal = {{.feature = "a", .coefficient = 1.0}};
    spec.correlation = std::vector<std::vector<double>>{{1.0, 0.8}, {0.8, 1.0}};
    spec.missing_rate = 0.0;
    const auto c = synthesize(spec);
    double ma = column_mean(c, 0), mb = column_mean(c, 1), sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < c.rows(); ++i) {
        const double da = c.value(i, 0) - ma, db = c.value(i, 1) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    EXPECT_NEAR(sab / std::sqrt(saa * sbb), 0.8, 0.03);
}

TEST(Synthesis, InvalidSpecsRejected) {
    auto spec = base_spec(100, 1);
    spec.outcome_rate = 1.0;
    EXPECT_THROW(synthesize(spec), ConfigError);
    spec = base_spec(100, 1);
    spec.signal = {{.feature = "Not a feature", .coefficient = 1.0}};
    EXPECT_THROW(synthesize(spec), ConfigError);
    spec = base_spec(100, 1);
    spec.correlation = std::vector<std::vector<double>>{{1.0}};
    EXPECT_THROW(synthesize(spec), ConfigError);
}

TEST(Synthesis, UnsatisfiableCalibration) {
    auto spec = base_spec(10, 1);
    spec.signal.clear();
    spec.outcome_rate = 0.01;
    EXPECT_THROW(synthesize(spec), NumericError);
}

TEST(Synthesis, StrongestSignalFeature) {
    const std::vector<SignalTerm> signal{{.feature = "a", .coefficient = 1.0},
                                         {.feature = "b", .coefficient = -2.5},
                                         {.feature = "c", .coefficient = 2.0}};
    EXPECT_EQ(strongest_signal_feature(signal), "b");
}
