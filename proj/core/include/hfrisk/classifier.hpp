#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/cohort.hpp"

namespace hfrisk {

/// Dense feature matrix aligned to a model's feature order, with a missing
/// flag per cell.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;         // row-major
    std::vector<std::uint8_t> missing;  // row-major

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    bool is_missing(std::size_t i, std::size_t j) const { return missing[i * cols + j] != 0; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
    std::span<const std::uint8_t> row_missing(std::size_t i) const { return {missing.data() + i * cols, cols}; }
};

/// Gathers the named columns from a cohort, by name. Throws SchemaError when
/// a feature is absent.
FeatureMatrix align_features(const Cohort& cohort, const std::vector<std::string>& feature_names);

/// Common contract of every fitted learner: immutable, predicts event
/// probabilities, serialises to a JSON envelope tagged with its kind.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual std::string_view kind() const noexcept = 0;
    virtual const std::vector<std::string>& feature_names() const noexcept = 0;
    virtual std::vector<double> predict_proba(const Cohort& rows) const = 0;

    /// {"kind": ..., "feature_names": [...], ...model fields}
    virtual nlohmann::json to_json() const = 0;
};

using ClassifierPtr = std::shared_ptr<const Classifier>;

/// Rebuilds any model from its JSON envelope. Throws ConfigError on an
/// unknown kind or malformed document.
ClassifierPtr classifier_from_json(const nlohmann::json& doc);

double sigmoid(double margin) noexcept;

/// Mean logistic loss for margins against 0/1 labels, computed without
/// overflow.
double logistic_loss(std::span<const double> margins, std::span<const int> labels);

}  // namespace hfrisk
