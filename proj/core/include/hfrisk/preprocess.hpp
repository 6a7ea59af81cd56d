#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/cohort.hpp"

namespace hfrisk {

struct PreprocessConfig {
    double outlier_z = 4.0;
    bool oversample_to_balance = true;
    std::string impute_statistic = "median";
    std::uint64_t seed = 0;

    void validate() const;
};

/// Audit trail of the cleaning chain. `steps` records which operations ran,
/// in order; counters accumulate when reports are merged.
struct PreprocessReport {
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
    std::size_t identifier_columns_removed = 0;
    std::size_t duplicates_removed = 0;
    std::size_t constant_columns_removed = 0;
    std::size_t missing_outcome_rows_removed = 0;
    std::size_t cells_imputed = 0;
    std::size_t outlier_rows_removed = 0;
    std::size_t rows_added_by_oversampling = 0;
    std::vector<std::string> removed_columns;
    std::vector<std::pair<std::string, double>> imputation_values;
    std::vector<std::string> steps;

    /// rows_in - row removals + rows added.
    std::size_t expected_rows_out() const;

    /// Appends `later` onto this report: counters add, rows_out is taken
    /// from `later`, and rows_in is kept from this report.
    void absorb(const PreprocessReport& later);
};

nlohmann::json to_json(const PreprocessReport& report);

struct CleanResult {
    Cohort cohort;
    PreprocessReport report;
};

/// Drops identifier-role columns, rows with missing outcome, duplicate rows
/// (identical outcome, missing pattern and observed values; first occurrence
/// kept) and columns whose observed values are all equal. Throws DataError if
/// nothing survives.
CleanResult clean(const Cohort& cohort);

/// Per-feature medians fitted on a training cohort.
class Imputer {
public:
    Imputer() = default;
    explicit Imputer(std::vector<std::pair<std::string, double>> values) : values_(std::move(values)) {}

    const std::vector<std::pair<std::string, double>>& values() const noexcept { return values_; }
    std::optional<double> value_for(const std::string& feature) const;

private:
    std::vector<std::pair<std::string, double>> values_;
};

/// Median of the observed values of every feature. Continuous features use
/// the midpoint of the two central values for even counts; binary features
/// use the majority value (0 on an exact tie) so imputed cells stay binary.
/// Throws DataError naming any feature with no observed value.
Imputer fit_imputer(const Cohort& train);

/// Fills every missing feature cell with the fitted value. Observed cells are
/// untouched. Throws DataError if a feature needing imputation has no value.
CleanResult apply_imputer(const Cohort& cohort, const Imputer& imputer);

/// Removes every row with a continuous cell farther than z standard
/// deviations from its column mean. Column statistics are computed once,
/// before any row is dropped; zero-variance columns never trigger removal.
CleanResult remove_outliers(const Cohort& cohort, double z);

/// Duplicates minority rows, sampled with replacement, until both classes are
/// equally frequent. Copies are appended after the original rows and get ids
/// of the form "<source id>~os<k>".
CleanResult oversample(const Cohort& train, std::uint64_t seed);

/// Recovers the source row id of an oversampled copy.
std::string base_row_id(const std::string& row_id);

/// Median with even-count midpoint. Throws on empty input.
double median(std::vector<double> values);

}  // namespace hfrisk
