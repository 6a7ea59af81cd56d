#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/classifier.hpp"
#include "hfrisk/metrics.hpp"
#include "hfrisk/stats.hpp"

namespace hfrisk {

// ---------------------------------------------------------------------------
// Single-model evaluation

struct EvalSettings {
    std::size_t n_resamples = 1000;
    double alpha = 0.05;
    double threshold = 0.5;
    std::uint64_t seed = 0;
};

struct EvalReport {
    std::string model_name;
    std::string dataset;  // "train" or "test"
    double auc = 0.0;
    BootstrapCI auc_ci;
    double accuracy = 0.0;
    BootstrapCI accuracy_ci;
    RocCurve roc;
    /// Bootstrap AUC replicates behind auc_ci, kept for boxplots.
    std::vector<double> auc_replicates;
};

/// Point AUC and accuracy with paired percentile bootstrap intervals. Only
/// predictions are resampled; the model is never refit.
EvalReport evaluate(const Classifier& model, const Cohort& cohort, const EvalSettings& settings,
                    std::string model_name = {}, std::string dataset = {});

EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                           const EvalSettings& settings, std::string model_name = {}, std::string dataset = {});

nlohmann::json to_json(const EvalReport& report);

// ---------------------------------------------------------------------------
// Learner families

enum class LearnerFamily { boosted, logistic, forest, lasso, knn };

/// Fixed reporting order.
inline constexpr LearnerFamily all_families[] = {LearnerFamily::boosted, LearnerFamily::logistic,
                                                 LearnerFamily::forest, LearnerFamily::lasso, LearnerFamily::knn};

/// Config key: "boosted_trees", "logistic", "random_forest", "lasso", "knn".
std::string to_string(LearnerFamily family);
LearnerFamily learner_family_from_string(const std::string& s);
/// Report label, e.g. "GradientBoosting".
std::string display_name(LearnerFamily family);

/// Fits one learner from a JSON parameter object. Any "seed" inside `params`
/// is overridden by `seed`. Throws ConfigError on invalid parameters.
ClassifierPtr fit_learner(LearnerFamily family, const nlohmann::json& params, const Cohort& train,
                          std::uint64_t seed);

/// Cartesian product of an object of value lists (keys in sorted order, last
/// key varying fastest). An array of objects is taken as an explicit cell
/// list.
std::vector<nlohmann::json> expand_grid(const nlohmann::json& grid);

// ---------------------------------------------------------------------------
// Grid search

/// Called once per (cell, fold) with the exact training and validation rows
/// used, after any oversampling.
using FoldObserver =
    std::function<void(std::size_t cell, std::size_t fold, const Cohort& fit_rows, const Cohort& validation_rows)>;

struct GridSearchOptions {
    std::size_t folds = 5;
    bool oversample = true;
    std::uint64_t seed = 0;
    FoldObserver observer;
};

struct GridCell {
    nlohmann::json params;
    std::vector<double> fold_auc;
    double mean_auc = 0.0;
    bool failed = false;
    std::string error;
};

struct GridSearchResult {
    LearnerFamily family = LearnerFamily::boosted;
    std::vector<GridCell> cells;
    std::size_t best = 0;
    ClassifierPtr model;  // best cell refit on the full training cohort

    const GridCell& best_cell() const { return cells.at(best); }
};

nlohmann::json to_json(const GridSearchResult& result);

/// Stratified fold index per row: each class is shuffled and dealt round
/// robin, continuing across classes so fold sizes differ by at most one.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed);

/// Scores every cell by mean validation AUC over stratified folds, picks the
/// maximum (earliest cell on ties) and refits it on all of `train`. When
/// enabled, oversampling is applied to each training fold only. Invalid
/// cells are marked failed; NumericError if every cell fails.
GridSearchResult grid_search(LearnerFamily family, const std::vector<nlohmann::json>& grid, const Cohort& train,
                             const GridSearchOptions& options);

// ---------------------------------------------------------------------------
// Comparison tables

struct NamedModel {
    std::string name;
    ClassifierPtr model;
};

struct ComparisonReport {
    std::vector<EvalReport> train;
    std::vector<EvalReport> test;
};

/// Train and test reports per model, in the given order. Each model and
/// block draws bootstrap resamples from the same seed so the intervals are
/// paired across models.
ComparisonReport comparison_report(const std::vector<NamedModel>& models, const Cohort& train, const Cohort& test,
                                   const EvalSettings& settings);

/// model,dataset,auc,auc_lower,auc_upper,accuracy,accuracy_lower,accuracy_upper
void write_report_csv(const std::vector<EvalReport>& reports, std::ostream& out);
/// model,fpr,tpr,threshold
void write_roc_csv(const std::vector<EvalReport>& reports, std::ostream& out);
/// Aligned text table for terminal output.
std::string format_report_table(const std::vector<EvalReport>& reports);

}  // namespace hfrisk
