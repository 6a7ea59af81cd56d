#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/gbt.hpp"

namespace hfrisk {

/// Per-row, per-feature attributions in margin (log-odds) space.
struct ShapMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
    double base_value = 0.0;
    std::vector<std::string> feature_names;
    std::vector<std::string> row_ids;

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

/// Cover-weighted mean output of a tree, the attribution baseline.
double expected_value(const RegressionTree& tree);

/// Adds one tree's exact Shapley values for a row into `phi` (length p).
void tree_shap_row(const RegressionTree& tree, std::span<const double> row, std::span<const std::uint8_t> missing,
                   std::span<double> phi);

/// Exact TreeSHAP of the ensemble margin against the tree-path conditional
/// expectation given by training cover. base_value + row sum equals the
/// margin for every row. Throws SchemaError if a model feature is absent.
ShapMatrix tree_shap(const BoostedEnsemble& model, const Cohort& rows);

struct BeeswarmPoint {
    std::string feature;
    std::optional<double> value;
    double attribution = 0.0;
};

struct ShapSummary {
    /// (feature, mean |attribution|), descending, ties by name; top_k entries.
    std::vector<std::pair<std::string, double>> ranking;
    /// Attribution with the raw feature value for every row of each ranked
    /// feature, in ranking order then row order.
    std::vector<BeeswarmPoint> beeswarm;
    std::optional<std::string> warning;
};

/// Throws DataError unless the cohort rows align with the matrix rows.
ShapSummary shap_summary(const ShapMatrix& shap, const Cohort& cohort, std::size_t top_k = 15);

/// Spearman rank correlation with midranks; 0 when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

/// Sign (-1, 0, +1) of the rank correlation between a feature's observed
/// values and its attributions. Throws ConfigError if the feature is absent.
int direction_check(const ShapMatrix& shap, const Cohort& cohort, const std::string& feature);

nlohmann::json to_json(const ShapSummary& summary);

}  // namespace hfrisk
