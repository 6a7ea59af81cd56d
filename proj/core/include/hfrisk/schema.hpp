#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hfrisk {

enum class FeatureKind { continuous, binary };

/// Identifier columns (patient IDs, cohort group labels) are carried through
/// ingestion but dropped by cleaning; they never reach a learner.
enum class FeatureRole { feature, identifier };

std::string_view to_string(FeatureKind kind) noexcept;
std::string_view to_string(FeatureRole role) noexcept;

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    std::string units;
    std::optional<double> mean;        // continuous only
    std::optional<double> std;         // continuous only
    std::optional<double> prevalence;  // binary only
    FeatureRole role = FeatureRole::feature;

    bool operator==(const FeatureSpec&) const = default;
};

/// Ordered feature catalog. Names are unique; summary statistics are
/// consistent with the feature kind.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<FeatureSpec> features);

    std::size_t size() const noexcept { return features_.size(); }
    bool empty() const noexcept { return features_.empty(); }

    const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
    const std::vector<FeatureSpec>& features() const noexcept { return features_; }

    std::optional<std::size_t> index_of(std::string_view name) const;

    /// Throws ConfigError naming the feature when absent.
    std::size_t require(std::string_view name) const;

    std::vector<std::string> names() const;

    /// Subset in the given column order.
    Schema select(const std::vector<std::size_t>& columns) const;

    bool operator==(const Schema&) const = default;

private:
    std::vector<FeatureSpec> features_;
};

/// Validates kind/statistic consistency for one entry. Throws ConfigError.
void validate(const FeatureSpec& spec);

nlohmann::json to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& doc);
Schema load_schema(const std::filesystem::path& path);

/// Catalog of the study's 48 candidate predictors: the 38 continuous
/// variables with their published training-cohort mean and standard
/// deviation, plus the demographic and comorbidity indicators.
const Schema& bundled_schema();

/// Raw JSON text of the bundled schema file.
std::string_view bundled_schema_json() noexcept;

/// Raw JSON text of the bundled default run configuration.
std::string_view default_run_config_json() noexcept;

}  // namespace hfrisk
