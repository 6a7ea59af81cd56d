#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/classifier.hpp"

namespace hfrisk {

// ---------------------------------------------------------------------------
// Penalised logistic regression

enum class Penalty { none, l1, l2 };

std::string to_string(Penalty penalty);
Penalty penalty_from_string(const std::string& s);

/// Logistic regression on internally standardised features. The objective is
/// mean logistic loss + strength * ||w||_1 (l1) or strength / 2 * ||w||^2
/// (l2); the intercept is never penalised.
class LinearModel final : public Classifier {
public:
    LinearModel() = default;

    std::string_view kind() const noexcept override { return "logistic"; }
    const std::vector<std::string>& feature_names() const noexcept override { return feature_names_; }
    std::vector<double> predict_proba(const Cohort& rows) const override;
    nlohmann::json to_json() const override;
    static LinearModel from_json(const nlohmann::json& doc);

    /// Weights on the standardised scale.
    const std::vector<double>& weights() const noexcept { return weights_; }
    double intercept() const noexcept { return intercept_; }
    Penalty penalty() const noexcept { return penalty_; }
    double strength() const noexcept { return strength_; }
    const std::vector<double>& means() const noexcept { return means_; }
    const std::vector<double>& stds() const noexcept { return stds_; }
    bool converged() const noexcept { return converged_; }
    int iterations() const noexcept { return iterations_; }
    /// Penalised objective at the solution, on the training data.
    double objective() const noexcept { return objective_; }
    std::size_t nonzero_weights() const;

    std::vector<double> predict_margin(const Cohort& rows) const;

private:
    friend LinearModel fit_logistic(const Cohort&, Penalty, double, int, double);

    std::vector<std::string> feature_names_;
    std::vector<double> weights_;
    double intercept_ = 0.0;
    Penalty penalty_ = Penalty::none;
    double strength_ = 0.0;
    std::vector<double> means_;
    std::vector<double> stds_;
    bool converged_ = false;
    int iterations_ = 0;
    double objective_ = 0.0;
};

/// Accelerated proximal gradient (FISTA with backtracking and
/// function-value restart, so the objective never increases) starting from
/// the zero vector. Converged when the largest parameter change falls below
/// `tol`; reaching `max_iter` returns an unconverged model rather than
/// throwing.
LinearModel fit_logistic(const Cohort& train, Penalty penalty, double strength, int max_iter = 1000,
                         double tol = 1e-8);

/// Penalised objective of (weights, intercept) on standardised data, exposed
/// for verification.
double logistic_objective(const LinearModel& model, const Cohort& data);

/// Smallest l1 strength at which every weight is zero:
/// max_j |mean_i x_ij (y_i - ybar)| on the standardised scale.
double l1_critical_strength(const Cohort& train);

// ---------------------------------------------------------------------------
// Random forest

struct ForestParams {
    int n_trees = 100;
    std::optional<int> max_depth;  // unlimited when empty
    int min_samples_leaf = 1;
    int max_features = 0;  // 0 selects floor(sqrt(p))
    bool bootstrap = true;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ForestParams&) const = default;
};

nlohmann::json to_json(const ForestParams& params);
ForestParams forest_params_from_json(const nlohmann::json& doc);

/// Gini CART node; leaves hold the positive-class fraction of their rows.
/// Missing values route left.
struct ClassNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
    int samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const ClassNode&) const = default;
};

struct ClassificationTree {
    std::vector<ClassNode> nodes;

    double predict(std::span<const double> row, std::span<const std::uint8_t> missing) const;
    bool operator==(const ClassificationTree&) const = default;
};

class ForestModel final : public Classifier {
public:
    ForestModel() = default;
    ForestModel(ForestParams params, std::vector<std::string> feature_names, std::vector<ClassificationTree> trees)
        : params_(std::move(params)), feature_names_(std::move(feature_names)), trees_(std::move(trees)) {}

    std::string_view kind() const noexcept override { return "random_forest"; }
    const std::vector<std::string>& feature_names() const noexcept override { return feature_names_; }
    std::vector<double> predict_proba(const Cohort& rows) const override;
    nlohmann::json to_json() const override;
    static ForestModel from_json(const nlohmann::json& doc);

    const ForestParams& params() const noexcept { return params_; }
    const std::vector<ClassificationTree>& trees() const noexcept { return trees_; }

    /// First `n_trees` trees; equal to a fresh fit with that many trees since
    /// tree t draws from a stream seeded by (seed, t).
    ForestModel truncated(int n_trees) const;

    bool operator==(const ForestModel& o) const {
        return params_ == o.params_ && feature_names_ == o.feature_names_ && trees_ == o.trees_;
    }

private:
    ForestParams params_;
    std::vector<std::string> feature_names_;
    std::vector<ClassificationTree> trees_;
};

ForestModel fit_forest(const Cohort& train, const ForestParams& params);

// ---------------------------------------------------------------------------
// k-nearest neighbours

class KnnModel final : public Classifier {
public:
    KnnModel() = default;

    std::string_view kind() const noexcept override { return "knn"; }
    const std::vector<std::string>& feature_names() const noexcept override { return feature_names_; }
    std::vector<double> predict_proba(const Cohort& rows) const override;
    nlohmann::json to_json() const override;
    static KnnModel from_json(const nlohmann::json& doc);

    int k() const noexcept { return k_; }
    std::size_t training_rows() const noexcept { return labels_.size(); }

private:
    friend KnnModel fit_knn(const Cohort&, int);

    std::vector<std::string> feature_names_;
    int k_ = 1;
    std::vector<double> means_;
    std::vector<double> stds_;
    std::vector<double> train_;  // standardised, row-major
    std::vector<int> labels_;
};

/// Stores the standardised training matrix. k must be odd and at most the
/// training size. Prediction is the positive fraction among the k nearest
/// rows by euclidean distance, ties broken by lower training row index;
/// missing query cells sit at the training mean.
KnnModel fit_knn(const Cohort& train, int k);

}  // namespace hfrisk
