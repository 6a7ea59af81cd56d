#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/eval.hpp"
#include "hfrisk/preprocess.hpp"
#include "hfrisk/synthesis.hpp"

namespace hfrisk {

struct AblationConfig {
    /// Feature sets to remove; the empty baseline set is always evaluated
    /// first, whether listed or not.
    std::vector<std::vector<std::string>> candidate_sets;
    std::vector<LearnerFamily> families{LearnerFamily::boosted};
    /// Whether `run` includes the ablation stage.
    bool in_run = true;
};

struct RunConfig {
    Schema schema;
    std::optional<std::filesystem::path> csv;
    /// Synthesis parameters when no csv is given; schema and seed are filled
    /// in from this config.
    std::optional<SynthesisSpec> synthesis;
    double test_fraction = 0.2;
    bool stratified = true;
    PreprocessConfig preprocess;
    double vif_threshold = 5.0;
    std::vector<std::string> exclude;
    /// Grid per learner family, in reporting order.
    std::vector<std::pair<LearnerFamily, nlohmann::json>> grids;
    std::size_t folds = 5;
    EvalSettings eval;
    std::size_t shap_top_k = 15;
    AblationConfig ablation;
    std::filesystem::path output_dir = "hfrisk-run";
    std::uint64_t seed = 42;

    /// Throws ConfigError on unknown feature names, missing paths or
    /// out-of-range settings.
    void validate() const;
};

/// Parses a config document merged over the bundled defaults (JSON merge
/// patch, so null removes a default entry). Relative paths resolve against
/// `base_dir`. A run manifest is accepted too; its embedded config is used.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig default_run_config();

/// Fully resolved config with the schema inlined. The output directory is
/// not part of it, so manifests compare equal across locations.
nlohmann::json to_json(const RunConfig& config);

}  // namespace hfrisk
