#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/cohort.hpp"

namespace hfrisk {

// ---------------------------------------------------------------------------
// Two-sample comparison

struct SampleSummary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n - 1 denominator)
    std::size_t n = 0;
};

SampleSummary summarize(std::span<const double> sample);

struct TTestResult {
    std::string feature;
    double mean_a = 0.0;
    double std_a = 0.0;
    std::size_t n_a = 0;
    double mean_b = 0.0;
    double std_b = 0.0;
    std::size_t n_b = 0;
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom and a two-sided p-value. Throws NumericError when either sample
/// has fewer than two values or both variances vanish with equal means.
TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b);
TTestResult welch_t_test(const SampleSummary& a, const SampleSummary& b);

/// One Welch test per continuous feature, in schema order, on observed
/// values. Binary features are skipped.
std::vector<TTestResult> t_test_table(const Cohort& train, const Cohort& test);

// ---------------------------------------------------------------------------
// Multicollinearity

struct VifEntry {
    std::string feature;
    double vif = 1.0;  // at removal for removed features, final round otherwise
    bool removed = false;
    std::optional<int> removal_round;
};

struct VifReport {
    std::vector<VifEntry> entries;  // continuous features in schema order
    double threshold = 5.0;
    int rounds = 0;

    std::vector<std::string> removed_features() const;
    std::vector<std::string> surviving_features() const;
};

/// VIF_j = 1 / (1 - R_j^2) of each column regressed (with intercept) on all
/// other columns; +inf under exact collinearity. `columns` is column-major.
std::vector<double> variance_inflation(const std::vector<std::vector<double>>& columns);

/// Iteratively removes the continuous feature with the largest VIF while it
/// exceeds `threshold`, recomputing after each removal.
VifReport vif_filter(const Cohort& cohort, double threshold = 5.0);

nlohmann::json to_json(const VifReport& report);

// ---------------------------------------------------------------------------
// Bootstrap

/// Statistic over paired (scores, labels).
using PairedMetric = std::function<double(std::span<const double>, std::span<const int>)>;

struct BootstrapCI {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t n_resamples = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

nlohmann::json to_json(const BootstrapCI& ci);

/// Metric values over `n_resamples` paired resamples with replacement.
/// Resamples containing a single class are redrawn. Resample b draws from a
/// stream seeded by (seed, b), so results do not depend on evaluation order.
std::vector<double> bootstrap_replicates(const PairedMetric& metric,
                                         std::span<const double> scores,
                                         std::span<const int> labels,
                                         std::size_t n_resamples,
                                         std::uint64_t seed);

/// Percentile interval [alpha/2, 1 - alpha/2] of the bootstrap replicates
/// around the metric on the original sample. With zero resamples the interval
/// collapses to the point estimate.
BootstrapCI bootstrap_ci(const PairedMetric& metric,
                         std::span<const double> scores,
                         std::span<const int> labels,
                         std::size_t n_resamples = 1000,
                         double alpha = 0.05,
                         std::uint64_t seed = 0);

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double q);

}  // namespace hfrisk
