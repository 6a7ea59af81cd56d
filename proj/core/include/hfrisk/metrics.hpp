#pragma once

#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace hfrisk {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;

    bool operator==(const RocPoint&) const = default;
};

/// Points from threshold +inf (0,0) through one point per distinct score, in
/// descending score order, to the closing (1,1) at -inf.
struct RocCurve {
    std::vector<RocPoint> points;

    /// Trapezoidal area under the curve.
    double area() const;
};

/// Mann-Whitney AUC: (pairs with positive above negative + 0.5 ties) /
/// (n_pos * n_neg). Throws NumericError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Fraction of rows where (score >= threshold) matches the label.
double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

nlohmann::json to_json(const RocCurve& curve);

}  // namespace hfrisk
