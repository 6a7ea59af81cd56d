#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/config.hpp"
#include "hfrisk/stats.hpp"

namespace hfrisk {

enum class Stage { cohort, prep, stats, train, eval, shap, ablate, figures };

inline constexpr Stage all_stages[] = {Stage::cohort, Stage::prep, Stage::stats,  Stage::train,
                                       Stage::eval,   Stage::shap, Stage::ablate, Stage::figures};

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// In-memory building blocks

/// Reads the configured csv or synthesizes the planted cohort.
Cohort load_cohort(const RunConfig& config);

struct PreparedCohorts {
    Cohort train;  // imputed, outliers removed, not oversampled
    Cohort test;   // imputed with training medians
    nlohmann::json report;
};

/// clean -> split -> impute (fit on train) -> outlier removal on train.
PreparedCohorts prepare_cohorts(const Cohort& raw, const RunConfig& config);

struct FeatureGate {
    std::vector<TTestResult> ttests;
    VifReport vif;
    std::vector<std::string> features;  // modeling features, schema order
};

/// Train-vs-test t-tests, VIF filter on train, minus configured exclusions.
FeatureGate feature_gate(const Cohort& train, const Cohort& test, const RunConfig& config);

Cohort keep_features(const Cohort& cohort, const std::vector<std::string>& features);

/// Search options for one family; seeds derive from the master seed and
/// the family name.
GridSearchOptions grid_options(const RunConfig& config, LearnerFamily family);

EvalSettings eval_settings(const RunConfig& config, std::string_view purpose);

// ---------------------------------------------------------------------------
// Ablation

struct AblationEntry {
    std::vector<std::string> excluded;
    LearnerFamily family = LearnerFamily::boosted;
    nlohmann::json best_params;
    double test_auc = 0.0;
    std::vector<double> auc_replicates;
    double mean_auc = 0.0;
};

struct AblationReport {
    std::vector<AblationEntry> entries;  // baseline configurations first
    std::size_t best = 0;
};

nlohmann::json to_json(const AblationReport& report);

/// Re-runs grid search and evaluation with each candidate set removed from
/// the prepared cohorts. The empty set is prepended when absent. Unknown
/// feature names raise ConfigError before any training.
AblationReport run_ablation(const Cohort& train, const Cohort& test, const RunConfig& config,
                            const std::vector<std::vector<std::string>>& candidate_sets);
AblationReport run_ablation(const RunConfig& config, const std::vector<std::vector<std::string>>& candidate_sets);

// ---------------------------------------------------------------------------
// Orchestration

struct StageStatus {
    Stage stage = Stage::cohort;
    std::string hash;
    bool ran = false;  // false when reused from a previous run
};

struct RunResult {
    std::filesystem::path directory;
    std::vector<StageStatus> stages;
    nlohmann::json manifest;
};

/// Runs every stage up to and including `until` (all stages when empty)
/// into config.output_dir. A stage is reused when its recorded hash matches
/// and its artifacts exist; it re-executes when any input stage re-executed.
/// On failure the error names the stage and a partial manifest is written.
RunResult run_pipeline(const RunConfig& config, std::optional<Stage> until = {}, std::ostream* log = nullptr);

/// Rebuilds the SVG figures and their CSV inputs from a completed run
/// directory. Throws DataError naming the stage whose artifact is missing.
std::vector<std::filesystem::path> emit_figures(const std::filesystem::path& run_dir);

/// 64-bit FNV-1a as 16 hex digits.
std::string content_hash(std::string_view bytes);

/// Renders a CSV file as an aligned text table.
std::string align_csv(const std::filesystem::path& path);

}  // namespace hfrisk
