#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "hfrisk/error.hpp"
#include "hfrisk/preprocess.hpp"
#include "hfrisk/synthesis.hpp"
#include "oracles/oracles.hpp"
#include "unit/support.hpp"

using namespace hfrisk;
using testing_support::Cell;
using testing_support::make_cohort;

TEST(Clean, RemovesDuplicateRows) {
    const auto c = make_cohort({"a", "b"}, {{1.0, 2.0}, {1.0, 2.0}, {3.0, 4.0}}, {0, 0, 1});
    const auto r = clean(c);
    EXPECT_EQ(r.report.duplicates_removed, 1u);
    EXPECT_EQ(r.cohort.rows(), 2u);
    EXPECT_EQ(r.cohort.row_id(0), "r0");
}

TEST(Clean, RemovesConstantColumn) {
    const auto c = make_cohort({"a", "k"}, {{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}}, {0, 1, 0});
    const auto r = clean(c);
    EXPECT_EQ(r.report.constant_columns_removed, 1u);
    EXPECT_EQ(r.cohort.schema().names(), std::vector<std::string>{"a"});
}

TEST(Clean, DropsMissingOutcomeRows) {
    const auto schema = testing_support::continuous_schema({"a"});
    const auto c = make_cohort(schema, {{1.0}, {2.0}, {3.0}, {4.0}, {5.0}}, {0, std::nullopt, 1, std::nullopt, 0});
    const auto r = clean(c);
    EXPECT_EQ(r.report.missing_outcome_rows_removed, 2u);
    EXPECT_EQ(r.report.rows_out, 3u);
    EXPECT_EQ(r.report.rows_out, r.report.expected_rows_out());
}

TEST(Clean, EmptyAfterCleaningFails) {
    const auto schema = testing_support::continuous_schema({"a"});
    EXPECT_THROW(clean(make_cohort(schema, {{1.0}, {2.0}}, {std::nullopt, std::nullopt})), DataError);
}

TEST(Median, OddEvenAndEmpty) {
    EXPECT_DOUBLE_EQ(median({1, 2, 100}), 2.0);
    EXPECT_DOUBLE_EQ(median({1, 3}), 2.0);
    EXPECT_THROW(median({}), NumericError);
}

TEST(Imputer, MedianIgnoresMissing) {
    const auto c = make_cohort({"a"}, {{1.0}, {2.0}, {100.0}, {Cell{}}}, {0, 1, 0, 1});
    const auto imp = fit_imputer(c);
    EXPECT_DOUBLE_EQ(*imp.value_for("a"), 2.0);
}

TEST(Imputer, AllMissingFeatureNamed) {
    const auto c = make_cohort({"a", "b"}, {{1.0, Cell{}}, {2.0, Cell{}}}, {0, 1});
    try {
        fit_imputer(c);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
    }
}

TEST(Imputer, SyntheticAgeMedianMatchesSortOracle) {
    auto spec = *testing_support::planted_config().synthesis;
    spec.schema = bundled_schema();
    spec.n = 941;
    spec.missing_rate = 0.1;
    const auto c = synthesize(spec);
    const auto col = bundled_schema().require("Age");
    const double m = *fit_imputer(c).value_for("Age");
    EXPECT_DOUBLE_EQ(m, oracle::sorted_median(c.observed_column(col)));
    EXPECT_GE(m, 75.57 - 12.13);
    EXPECT_LE(m, 75.57 + 12.13);
}

TEST(Imputer, NoMissingIsNoOp) {
    const auto c = make_cohort({"a"}, {{1.0}, {2.0}}, {0, 1});
    const auto r = apply_imputer(c, fit_imputer(c));
    EXPECT_EQ(r.cohort, c);
    EXPECT_EQ(r.report.cells_imputed, 0u);
}

TEST(Imputer, SubstitutesFittedValue) {
    const auto c = make_cohort({"Age"}, {{70.0}, {Cell{}}}, {0, 1});
    const auto r = apply_imputer(c, Imputer({{"Age", 75.0}}));
    EXPECT_DOUBLE_EQ(r.cohort.value(1, 0), 75.0);
    EXPECT_EQ(r.cohort.missing_cells(), 0u);
    EXPECT_EQ(r.report.cells_imputed, 1u);
}

TEST(Imputer, CoverageError) {
    const auto c = make_cohort({"Age", "b"}, {{70.0, 1.0}}, {0});
    EXPECT_THROW(apply_imputer(c, Imputer({{"Age", 75.0}})), DataError);
}

TEST(Imputer, TestRowsNeverInfluenceValues) {
    const auto all = testing_support::random_cohort(300, 3, 17, 0.2);
    auto config = testing_support::planted_config(5);
    config.test_fraction = 0.3;
    const auto before = prepare_cohorts(all, config);
    std::set<std::string> test_ids(before.test.row_ids().begin(), before.test.row_ids().end());
    auto mutated = all;
    for (std::size_t i = 0; i < mutated.rows(); ++i) {
        if (test_ids.count(mutated.row_id(i))) mutated = mutated.with_cell(i, 0, 1e6 + double(i));
    }
    const auto after = prepare_cohorts(mutated, config);
    EXPECT_EQ(before.report.at("imputation_values"), after.report.at("imputation_values"));
    EXPECT_EQ(before.train, after.train);

    const auto parts = split(all, 0.3, true, 5);
    const auto fitted = fit_imputer(parts.train);
    for (std::size_t j = 0; j < parts.train.cols(); ++j) {
        EXPECT_DOUBLE_EQ(fitted.values()[j].second, oracle::sorted_median(parts.train.observed_column(j)));
    }
    const auto a = apply_imputer(parts.test, fitted).cohort;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (parts.test.is_missing(i, j)) EXPECT_DOUBLE_EQ(a.value(i, j), fitted.values()[j].second);
        }
    }
}

TEST(Outliers, ConstantColumnRemovesNothing) {
    const auto c = make_cohort({"a"}, {{5.0}, {5.0}, {5.0}}, {0, 1, 0});
    EXPECT_EQ(remove_outliers(c, 4.0).report.outlier_rows_removed, 0u);
}

TEST(Outliers, PlantedOutlierRemoved) {
    Rng rng(1);
    std::vector<std::vector<Cell>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        rows.push_back({75.0 + 12.0 * std::clamp(rng.normal(), -3.0, 3.0)});
        labels.push_back(i % 2);
    }
    rows.push_back({75.0 + 10.0 * 12.0});
    labels.push_back(1);
    const auto r = remove_outliers(make_cohort({"Age"}, rows, labels), 4.0);
    EXPECT_EQ(r.report.outlier_rows_removed, 1u);
    for (const auto& id : r.cohort.row_ids()) EXPECT_NE(id, "r200");
}

TEST(Outliers, GaussianFractionSmall) {
    auto spec = *testing_support::planted_config().synthesis;
    spec.schema = bundled_schema();
    spec.n = 10000;
    spec.missing_rate = 0.0;
    const auto c = synthesize(spec);
    const auto r = remove_outliers(c, 4.0);
    EXPECT_LT(double(r.report.outlier_rows_removed) / 10000.0, 0.005);
}

TEST(Outliers, Errors) {
    const auto c = make_cohort({"a"}, {{1.0}, {Cell{}}}, {0, 1});
    EXPECT_THROW(remove_outliers(c, 0.0), ConfigError);
    EXPECT_THROW(remove_outliers(c, 4.0), DataError);
}

TEST(Oversample, BalancesNinetyTen) {
    std::vector<std::vector<Cell>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        rows.push_back({double(i)});
        labels.push_back(i < 10 ? 1 : 0);
    }
    const auto c = make_cohort({"a"}, rows, labels);
    const auto r = oversample(c, 3);
    EXPECT_EQ(r.cohort.rows(), 180u);
    EXPECT_EQ(r.cohort.positives(), 90u);
    EXPECT_EQ(r.report.rows_added_by_oversampling, 80u);
    EXPECT_EQ(r.report.rows_out, r.report.expected_rows_out());
    for (std::size_t i = 100; i < r.cohort.rows(); ++i) {
        const auto base = base_row_id(r.cohort.row_id(i));
        const auto src = std::stoul(base.substr(1));
        EXPECT_LT(src, 10u);
        EXPECT_DOUBLE_EQ(r.cohort.value(i, 0), double(src));
    }
    EXPECT_EQ(oversample(c, 3).cohort, r.cohort);
}

TEST(Oversample, BalancedUnchanged) {
    const auto c = make_cohort({"a"}, {{1.0}, {2.0}}, {0, 1});
    EXPECT_EQ(oversample(c, 1).cohort, c);
}

TEST(Oversample, SingleClassFails) {
    const auto c = make_cohort({"a"}, {{1.0}, {2.0}}, {1, 1});
    EXPECT_THROW(oversample(c, 1), ClassError);
}

TEST(PreprocessConfig, Validation) {
    PreprocessConfig cfg;
    cfg.outlier_z = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.impute_statistic = "mean";
    EXPECT_THROW(cfg.validate(), ConfigError);
}
