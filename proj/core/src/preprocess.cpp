#include "hfrisk/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hfrisk/error.hpp"
#include "hfrisk/random.hpp"

namespace hfrisk {

void PreprocessConfig::validate() const {
    if (!(outlier_z > 0.0)) {
        throw ConfigError("outlier_z must be positive");
    }
    if (impute_statistic != "median") {
        throw ConfigError("only median imputation is supported");
    }
}

std::size_t PreprocessReport::expected_rows_out() const {
    return rows_in - duplicates_removed - missing_outcome_rows_removed - outlier_rows_removed +
           rows_added_by_oversampling;
}

void PreprocessReport::absorb(const PreprocessReport& later) {
    rows_out = later.rows_out;
    identifier_columns_removed += later.identifier_columns_removed;
    duplicates_removed += later.duplicates_removed;
    constant_columns_removed += later.constant_columns_removed;
    missing_outcome_rows_removed += later.missing_outcome_rows_removed;
    cells_imputed += later.cells_imputed;
    outlier_rows_removed += later.outlier_rows_removed;
    rows_added_by_oversampling += later.rows_added_by_oversampling;
    removed_columns.insert(removed_columns.end(), later.removed_columns.begin(), later.removed_columns.end());
    if (imputation_values.empty()) {
        imputation_values = later.imputation_values;
    }
    steps.insert(steps.end(), later.steps.begin(), later.steps.end());
}

nlohmann::json to_json(const PreprocessReport& r) {
    nlohmann::json imputation = nlohmann::json::array();
    for (const auto& [name, v] : r.imputation_values) {
        imputation.push_back({{"feature", name}, {"value", v}});
    }
    return {{"rows_in", r.rows_in},
            {"rows_out", r.rows_out},
            {"identifier_columns_removed", r.identifier_columns_removed},
            {"duplicates_removed", r.duplicates_removed},
            {"constant_columns_removed", r.constant_columns_removed},
            {"missing_outcome_rows_removed", r.missing_outcome_rows_removed},
            {"cells_imputed", r.cells_imputed},
            {"outlier_rows_removed", r.outlier_rows_removed},
            {"rows_added_by_oversampling", r.rows_added_by_oversampling},
            {"removed_columns", r.removed_columns},
            {"imputation_values", imputation},
            {"steps", r.steps}};
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw NumericError("median of an empty sample");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

CleanResult clean(const Cohort& cohort) {
    PreprocessReport report;
    report.rows_in = cohort.rows();

    std::vector<std::size_t> keep_cols;
    for (std::size_t j = 0; j < cohort.cols(); ++j) {
        if (cohort.schema()[j].role == FeatureRole::identifier) {
            report.removed_columns.push_back(cohort.schema()[j].name);
            ++report.identifier_columns_removed;
        } else {
            keep_cols.push_back(j);
        }
    }
    Cohort current = cohort.select_columns(keep_cols);

    std::vector<std::size_t> with_outcome;
    for (std::size_t i = 0; i < current.rows(); ++i) {
        if (current.outcome(i)) with_outcome.push_back(i);
    }
    report.missing_outcome_rows_removed = current.rows() - with_outcome.size();
    current = current.select_rows(with_outcome);

    // Sort row indices by content so duplicates become adjacent, then keep the
    // first occurrence of each group in original order.
    const std::size_t p = current.cols();
    auto row_less = [&](std::size_t a, std::size_t b) {
        if (*current.outcome(a) != *current.outcome(b)) return *current.outcome(a) < *current.outcome(b);
        for (std::size_t j = 0; j < p; ++j) {
            const bool ma = current.is_missing(a, j);
            const bool mb = current.is_missing(b, j);
            if (ma != mb) return ma < mb;
            if (!ma && current.value(a, j) != current.value(b, j)) return current.value(a, j) < current.value(b, j);
        }
        return false;
    };
    std::vector<std::size_t> order(current.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), row_less);
    std::vector<std::uint8_t> duplicate(current.rows(), 0);
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (!row_less(order[k - 1], order[k]) && !row_less(order[k], order[k - 1])) {
            duplicate[order[k]] = 1;
        }
    }
    std::vector<std::size_t> unique_rows;
    for (std::size_t i = 0; i < current.rows(); ++i) {
        if (!duplicate[i]) unique_rows.push_back(i);
    }
    report.duplicates_removed = current.rows() - unique_rows.size();
    current = current.select_rows(unique_rows);

    std::vector<std::size_t> varying;
    for (std::size_t j = 0; j < current.cols(); ++j) {
        const auto observed = current.observed_column(j);
        const bool constant = std::all_of(observed.begin(), observed.end(),
                                          [&](double v) { return v == observed.front(); });
        if (constant) {
            report.removed_columns.push_back(current.schema()[j].name);
            ++report.constant_columns_removed;
        } else {
            varying.push_back(j);
        }
    }
    current = current.select_columns(varying);

    if (current.rows() == 0 || current.cols() == 0) {
        throw DataError("cohort is empty after cleaning");
    }
    report.rows_out = current.rows();
    report.steps.push_back("clean");
    return {std::move(current), std::move(report)};
}

std::optional<double> Imputer::value_for(const std::string& feature) const {
    for (const auto& [name, v] : values_) {
        if (name == feature) return v;
    }
    return std::nullopt;
}

Imputer fit_imputer(const Cohort& train) {
    std::vector<std::pair<std::string, double>> values;
    for (std::size_t j = 0; j < train.cols(); ++j) {
        const auto& f = train.schema()[j];
        auto observed = train.observed_column(j);
        if (observed.empty()) {
            throw DataError("feature '" + f.name + "' has no observed training value and cannot be imputed");
        }
        if (f.kind == FeatureKind::binary) {
            const auto ones = std::count(observed.begin(), observed.end(), 1.0);
            values.emplace_back(f.name, 2 * static_cast<std::size_t>(ones) > observed.size() ? 1.0 : 0.0);
        } else {
            values.emplace_back(f.name, median(std::move(observed)));
        }
    }
    return Imputer(std::move(values));
}

CleanResult apply_imputer(const Cohort& cohort, const Imputer& imputer) {
    PreprocessReport report;
    report.rows_in = cohort.rows();
    report.imputation_values = imputer.values();
    auto values = cohort.values();
    auto missing = cohort.missing_mask();
    const std::size_t p = cohort.cols();
    for (std::size_t j = 0; j < p; ++j) {
        const auto fill = imputer.value_for(cohort.schema()[j].name);
        if (!fill) {
            throw DataError("imputer has no value for feature '" + cohort.schema()[j].name + "'");
        }
        if (cohort.missing_in_column(j) == 0) continue;
        for (std::size_t i = 0; i < cohort.rows(); ++i) {
            const std::size_t k = i * p + j;
            if (missing[k]) {
                missing[k] = 0;
                values[k] = *fill;
                ++report.cells_imputed;
            }
        }
    }
    report.rows_out = cohort.rows();
    report.steps.push_back("impute");
    return {Cohort(cohort.schema(), std::move(values), std::move(missing), cohort.outcomes(), cohort.row_ids()),
            std::move(report)};
}

CleanResult remove_outliers(const Cohort& cohort, double z) {
    if (!(z > 0.0)) {
        throw ConfigError("outlier threshold z must be positive");
    }
    if (cohort.missing_cells() != 0) {
        throw DataError("outlier removal requires imputed data (missing cells present)");
    }
    const std::size_t n = cohort.rows();
    const std::size_t p = cohort.cols();
    std::vector<double> mean(p, 0.0);
    std::vector<double> sd(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        if (cohort.schema()[j].kind != FeatureKind::continuous || n < 2) continue;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += cohort.value(i, j);
        mean[j] = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = cohort.value(i, j) - mean[j];
            ss += d * d;
        }
        sd[j] = std::sqrt(ss / static_cast<double>(n - 1));
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        bool outlier = false;
        for (std::size_t j = 0; j < p && !outlier; ++j) {
            if (sd[j] > 0.0 && std::abs(cohort.value(i, j) - mean[j]) > z * sd[j]) {
                outlier = true;
            }
        }
        if (!outlier) keep.push_back(i);
    }
    PreprocessReport report;
    report.rows_in = n;
    report.outlier_rows_removed = n - keep.size();
    report.rows_out = keep.size();
    report.steps.push_back("remove_outliers");
    return {cohort.select_rows(keep), std::move(report)};
}

CleanResult oversample(const Cohort& train, std::uint64_t seed) {
    const auto labels = train.labels();
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty()) {
        throw ClassError("oversampling needs both outcome classes");
    }
    const int minority = by_class[1].size() < by_class[0].size() ? 1 : 0;
    const std::size_t deficit = by_class[1 - minority].size() - by_class[minority].size();

    PreprocessReport report;
    report.rows_in = train.rows();
    report.rows_added_by_oversampling = deficit;
    report.rows_out = train.rows() + deficit;
    report.steps.push_back("oversample");
    if (deficit == 0) {
        return {train, std::move(report)};
    }

    Rng rng(seed);
    const std::size_t p = train.cols();
    auto values = train.values();
    auto missing = train.missing_mask();
    auto outcome = train.outcomes();
    auto ids = train.row_ids();
    std::map<std::size_t, std::size_t> copies;
    for (std::size_t k = 0; k < deficit; ++k) {
        const std::size_t src = by_class[minority][rng.index(by_class[minority].size())];
        const std::size_t copy = ++copies[src];
        values.insert(values.end(), train.values().begin() + static_cast<std::ptrdiff_t>(src * p),
                      train.values().begin() + static_cast<std::ptrdiff_t>((src + 1) * p));
        missing.insert(missing.end(), train.missing_mask().begin() + static_cast<std::ptrdiff_t>(src * p),
                       train.missing_mask().begin() + static_cast<std::ptrdiff_t>((src + 1) * p));
        outcome.push_back(minority);
        ids.push_back(train.row_id(src) + "~os" + std::to_string(copy));
    }
    return {Cohort(train.schema(), std::move(values), std::move(missing), std::move(outcome), std::move(ids)),
            std::move(report)};
}

std::string base_row_id(const std::string& row_id) {
    const auto pos = row_id.find("~os");
    return pos == std::string::npos ? row_id : row_id.substr(0, pos);
}

}  // namespace hfrisk
