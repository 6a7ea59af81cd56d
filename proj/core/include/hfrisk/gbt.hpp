#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/classifier.hpp"

namespace hfrisk {

/// Hyperparameters of the second-order boosted tree learner.
struct BoostParams {
    int n_trees = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    double min_child_weight = 1.0;  // minimum hessian sum per child
    double reg_lambda = 1.0;        // L2 penalty on leaf weights
    double gamma = 0.0;             // minimum split gain
    double subsample = 1.0;         // row fraction per round
    double colsample = 1.0;         // feature fraction per round
    double base_score = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const BoostParams&) const = default;
};

nlohmann::json to_json(const BoostParams& params);
BoostParams boost_params_from_json(const nlohmann::json& doc);

/// Node of a regression tree stored in a flat array. Internal nodes send a
/// row left when value < threshold, and missing values toward
/// `default_left`. Leaf weights already include shrinkage.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    bool default_left = true;
    double weight = 0.0;  // leaves only
    double gain = 0.0;    // split gain, internal nodes only
    double cover = 0.0;   // hessian sum of training rows reaching the node

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    /// Index of the leaf a row lands in.
    std::size_t leaf_index(std::span<const double> row, std::span<const std::uint8_t> missing) const;
    double predict(std::span<const double> row, std::span<const std::uint8_t> missing) const {
        return nodes[leaf_index(row, missing)].weight;
    }
    int depth() const;

    bool operator==(const RegressionTree&) const = default;
};

/// Additive ensemble: margin = base_margin + sum of tree outputs;
/// probability = sigmoid(margin).
class BoostedEnsemble final : public Classifier {
public:
    BoostedEnsemble() = default;
    BoostedEnsemble(BoostParams params, std::vector<std::string> feature_names, std::vector<RegressionTree> trees);

    std::string_view kind() const noexcept override { return "boosted_trees"; }
    const std::vector<std::string>& feature_names() const noexcept override { return feature_names_; }
    std::vector<double> predict_proba(const Cohort& rows) const override;
    nlohmann::json to_json() const override;

    std::vector<double> predict_margin(const Cohort& rows) const;
    std::vector<double> predict_margin(const FeatureMatrix& x) const;

    const BoostParams& params() const noexcept { return params_; }
    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    double base_margin() const noexcept { return base_margin_; }
    double learning_rate() const noexcept { return params_.learning_rate; }

    /// The first `n_trees` rounds. Because every round's randomness is
    /// derived from (seed, round), this equals the model fit with
    /// n_trees = `n_trees` and otherwise identical parameters.
    BoostedEnsemble truncated(int n_trees) const;

    static BoostedEnsemble from_json(const nlohmann::json& doc);

    bool operator==(const BoostedEnsemble& o) const {
        return params_ == o.params_ && feature_names_ == o.feature_names_ && trees_ == o.trees_ &&
               base_margin_ == o.base_margin_;
    }

private:
    BoostParams params_;
    std::vector<std::string> feature_names_;
    std::vector<RegressionTree> trees_;
    double base_margin_ = 0.0;
};

/// Optional per-round diagnostics from fitting.
struct BoostTrace {
    std::vector<double> train_loss;  // mean logistic loss after each round
};

/// Fits the ensemble by second-order boosting on the logistic loss with
/// exact greedy split search. Throws ClassError on a single-class outcome,
/// ConfigError on invalid parameters.
BoostedEnsemble fit_boosted(const Cohort& train, const BoostParams& params, BoostTrace* trace = nullptr);

// ---------------------------------------------------------------------------
// Split search, exposed for verification.

struct SplitRules {
    double reg_lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    bool default_left = true;
    double grad_left = 0.0;
    double hess_left = 0.0;
    double grad_right = 0.0;
    double hess_right = 0.0;

    bool valid() const noexcept { return feature >= 0; }
};

/// 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma
double split_gain(double grad_left, double hess_left, double grad_right, double hess_right,
                  double reg_lambda, double gamma);

/// -G / (H + lambda), with the hessian floored to keep the denominator positive.
double leaf_weight(double grad, double hess, double reg_lambda);

/// Best split of `rows` over `features` (ascending indices) by exact greedy
/// search over midpoints between consecutive distinct values. Ties keep the
/// lowest feature index, then the lowest threshold. Returns an invalid
/// candidate when no split has positive gain.
SplitCandidate find_best_split(const FeatureMatrix& x,
                               std::span<const std::size_t> rows,
                               std::span<const double> grad,
                               std::span<const double> hess,
                               std::span<const std::size_t> features,
                               const SplitRules& rules);

/// Per-feature total realized split gain, descending; ties by name. Features
/// never split on are listed with zero gain.
std::vector<std::pair<std::string, double>> gain_importance(const BoostedEnsemble& model);

nlohmann::json to_json(const RegressionTree& tree);
RegressionTree regression_tree_from_json(const nlohmann::json& doc);

}  // namespace hfrisk
