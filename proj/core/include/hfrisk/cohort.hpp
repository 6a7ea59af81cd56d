#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hfrisk/schema.hpp"

namespace hfrisk {

/// Row-major table of feature values with an explicit missing mask, a binary
/// outcome that may itself be missing, and a unique identifier per row.
///
/// Cohorts are immutable; every transformation returns a new cohort.
class Cohort {
public:
    Cohort() = default;

    /// Validates shape, binary-column contents and row-id uniqueness.
    /// `missing` holds one flag per cell (nonzero = missing); the value stored
    /// under a missing flag is ignored and normalised to 0.
    Cohort(Schema schema,
           std::vector<double> values,
           std::vector<std::uint8_t> missing,
           std::vector<std::optional<int>> outcome,
           std::vector<std::string> row_ids);

    const Schema& schema() const noexcept { return schema_; }
    std::size_t rows() const noexcept { return outcome_.size(); }
    std::size_t cols() const noexcept { return schema_.size(); }
    bool empty() const noexcept { return outcome_.empty(); }

    bool is_missing(std::size_t row, std::size_t col) const {
        return missing_[row * cols() + col] != 0;
    }
    /// Raw stored value; only meaningful when the cell is not missing.
    double value(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
    std::optional<double> cell(std::size_t row, std::size_t col) const;

    std::span<const double> row_values(std::size_t row) const {
        return {values_.data() + row * cols(), cols()};
    }
    std::span<const std::uint8_t> row_missing(std::size_t row) const {
        return {missing_.data() + row * cols(), cols()};
    }

    std::optional<int> outcome(std::size_t row) const { return outcome_[row]; }
    const std::vector<std::optional<int>>& outcomes() const noexcept { return outcome_; }
    const std::string& row_id(std::size_t row) const { return row_ids_[row]; }
    const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<std::uint8_t>& missing_mask() const noexcept { return missing_; }

    std::size_t missing_cells() const;
    std::size_t missing_in_column(std::size_t col) const;

    /// Non-missing values of one column in row order.
    std::vector<double> observed_column(std::size_t col) const;

    /// Outcome vector as 0/1 ints. Throws DataError if any outcome is missing.
    std::vector<int> labels() const;

    /// Count of rows with outcome 1 (missing outcomes are not counted).
    std::size_t positives() const;

    Cohort select_rows(std::span<const std::size_t> rows) const;
    Cohort select_columns(const std::vector<std::size_t>& cols) const;
    Cohort drop_columns(const std::vector<std::string>& names) const;

    /// Replaces a single cell; used by imputation and tests.
    Cohort with_cell(std::size_t row, std::size_t col, std::optional<double> v) const;

    bool operator==(const Cohort&) const = default;

private:
    Schema schema_;
    std::vector<double> values_;
    std::vector<std::uint8_t> missing_;
    std::vector<std::optional<int>> outcome_;
    std::vector<std::string> row_ids_;
};

/// Throws SchemaError unless both cohorts carry the same feature names in
/// the same order.
void require_same_features(const Cohort& a, const Cohort& b);

// ---------------------------------------------------------------------------
// CSV

/// Reads a comma-separated cohort. The header must name every schema column
/// and an "outcome" column; an optional "row_id" column supplies identifiers
/// (otherwise rows are numbered from the first data line). Extra columns are
/// ignored. Empty or unparseable cells become missing, except that a binary
/// column holding anything other than 0/1 is a ParseError.
Cohort read_csv(std::istream& in, const Schema& schema, std::string_view source = "<stream>");
Cohort load_csv(const std::filesystem::path& path, const Schema& schema);

/// Writes row_id, schema columns, outcome. Numbers use the shortest
/// representation that round-trips exactly.
void write_csv(const Cohort& cohort, std::ostream& out);
void save_csv(const Cohort& cohort, const std::filesystem::path& path);

std::string format_number(double v);

// ---------------------------------------------------------------------------
// Splitting

struct CohortSplit {
    Cohort train;
    Cohort test;
};

/// Partitions rows into train/test. With `stratified`, each outcome class
/// contributes round(test_fraction * class size) rows to the test side.
/// Rows keep their original relative order on both sides.
CohortSplit split(const Cohort& cohort, double test_fraction, bool stratified, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Cohort funnel constants for the MIMIC-III heart-failure extraction. The
// extraction itself needs credentialed access; these document the exclusion
// arithmetic that the synthetic cohort stands in for.
namespace funnel {
inline constexpr int initial_patients = 13389;
inline constexpr int excluded_no_icu_admission = 162;
inline constexpr int excluded_missing_nt_probnp = 4871;
inline constexpr int excluded_missing_echocardiography = 7179;
inline constexpr int final_cohort = 1177;
static_assert(initial_patients - excluded_no_icu_admission - excluded_missing_nt_probnp -
                  excluded_missing_echocardiography ==
              final_cohort);
}  // namespace funnel

}  // namespace hfrisk
