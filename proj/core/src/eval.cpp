#include "hfrisk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "hfrisk/baselines.hpp"
#include "hfrisk/error.hpp"
#include "hfrisk/gbt.hpp"
#include "hfrisk/preprocess.hpp"
#include "hfrisk/random.hpp"

namespace hfrisk {

// ---------------------------------------------------------------------------
// Evaluation

EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                           const EvalSettings& settings, std::string model_name, std::string dataset) {
    EvalReport r;
    r.model_name = std::move(model_name);
    r.dataset = std::move(dataset);
    const PairedMetric auc_metric = [](std::span<const double> s, std::span<const int> l) { return auc(s, l); };
    const double threshold = settings.threshold;
    const PairedMetric acc_metric = [threshold](std::span<const double> s, std::span<const int> l) {
        return accuracy(s, l, threshold);
    };
    r.auc = auc(scores, labels);
    r.accuracy = accuracy(scores, labels, threshold);
    r.roc = roc_curve(scores, labels);
    r.auc_replicates = bootstrap_replicates(auc_metric, scores, labels, settings.n_resamples, settings.seed);
    r.auc_ci = bootstrap_ci(auc_metric, scores, labels, settings.n_resamples, settings.alpha, settings.seed);
    r.accuracy_ci = bootstrap_ci(acc_metric, scores, labels, settings.n_resamples, settings.alpha, settings.seed);
    return r;
}

EvalReport evaluate(const Classifier& model, const Cohort& cohort, const EvalSettings& settings,
                    std::string model_name, std::string dataset) {
    const auto scores = model.predict_proba(cohort);
    const auto labels = cohort.labels();
    if (model_name.empty()) model_name = std::string(model.kind());
    return evaluate_scores(scores, labels, settings, std::move(model_name), std::move(dataset));
}

nlohmann::json to_json(const EvalReport& r) {
    return {{"model", r.model_name},
            {"dataset", r.dataset},
            {"auc", r.auc},
            {"auc_ci", to_json(r.auc_ci)},
            {"accuracy", r.accuracy},
            {"accuracy_ci", to_json(r.accuracy_ci)}};
}

// ---------------------------------------------------------------------------
// Learners

std::string to_string(LearnerFamily family) {
    switch (family) {
    case LearnerFamily::boosted: return "boosted_trees";
    case LearnerFamily::logistic: return "logistic";
    case LearnerFamily::forest: return "random_forest";
    case LearnerFamily::lasso: return "lasso";
    case LearnerFamily::knn: return "knn";
    }
    return "unknown";
}

LearnerFamily learner_family_from_string(const std::string& s) {
    for (auto f : all_families) {
        if (to_string(f) == s) return f;
    }
    throw ConfigError("unknown learner family '" + s + "'");
}

std::string display_name(LearnerFamily family) {
    switch (family) {
    case LearnerFamily::boosted: return "GradientBoosting";
    case LearnerFamily::logistic: return "LogisticRegression";
    case LearnerFamily::forest: return "RandomForest";
    case LearnerFamily::lasso: return "Lasso";
    case LearnerFamily::knn: return "KNN";
    }
    return "unknown";
}

namespace {

void reject_unknown_keys(const nlohmann::json& params, std::initializer_list<const char*> known,
                         const std::string& family) {
    for (const auto& [key, _] : params.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            throw ConfigError("unknown " + family + " parameter '" + key + "'");
        }
    }
}

nlohmann::json with_seed(nlohmann::json params, std::uint64_t seed) {
    params["seed"] = seed;
    return params;
}

}  // namespace

ClassifierPtr fit_learner(LearnerFamily family, const nlohmann::json& params, const Cohort& train,
                          std::uint64_t seed) {
    if (!params.is_object()) throw ConfigError("learner parameters must be a JSON object");
    try {
        switch (family) {
        case LearnerFamily::boosted:
            return std::make_shared<BoostedEnsemble>(
                fit_boosted(train, boost_params_from_json(with_seed(params, seed))));
        case LearnerFamily::forest:
            return std::make_shared<ForestModel>(fit_forest(train, forest_params_from_json(with_seed(params, seed))));
        case LearnerFamily::logistic:
        case LearnerFamily::lasso: {
            reject_unknown_keys(params, {"strength", "max_iter", "tol", "seed"}, to_string(family));
            const auto penalty = family == LearnerFamily::lasso ? Penalty::l1 : Penalty::l2;
            return std::make_shared<LinearModel>(fit_logistic(train, penalty, params.value("strength", 1.0),
                                                              params.value("max_iter", 1000),
                                                              params.value("tol", 1e-8)));
        }
        case LearnerFamily::knn:
            reject_unknown_keys(params, {"k", "seed"}, "knn");
            return std::make_shared<KnnModel>(fit_knn(train, params.value("k", 5)));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad " + to_string(family) + " parameters " + params.dump() + ": " + e.what());
    }
    throw ConfigError("unknown learner family");
}

std::vector<nlohmann::json> expand_grid(const nlohmann::json& grid) {
    if (grid.is_array()) {
        std::vector<nlohmann::json> cells(grid.begin(), grid.end());
        for (const auto& c : cells) {
            if (!c.is_object()) throw ConfigError("grid cell list must hold JSON objects");
        }
        if (cells.empty()) throw ConfigError("grid is empty");
        return cells;
    }
    if (!grid.is_object()) throw ConfigError("grid must be an object of value lists or a list of cells");
    std::vector<nlohmann::json> cells{nlohmann::json::object()};
    for (const auto& [key, values] : grid.items()) {
        const auto list = values.is_array() ? values : nlohmann::json::array({values});
        if (list.empty()) throw ConfigError("grid axis '" + key + "' has no values");
        std::vector<nlohmann::json> next;
        for (const auto& cell : cells) {
            for (const auto& v : list) {
                auto c = cell;
                c[key] = v;
                next.push_back(std::move(c));
            }
        }
        cells = std::move(next);
    }
    return cells;
}

// ---------------------------------------------------------------------------
// Grid search

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == 1 ? 1 : 0].push_back(i);
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < folds) {
            throw ClassError(fmt::format("class {} has {} rows, fewer than {} folds", c, by_class[c].size(), folds));
        }
    }
    Rng rng(seed);
    std::vector<std::size_t> assignment(labels.size());
    std::size_t next = 0;
    for (int c = 0; c < 2; ++c) {
        rng.shuffle(std::span<std::size_t>(by_class[c]));
        for (auto row : by_class[c]) assignment[row] = next++ % folds;
    }
    return assignment;
}

namespace {

bool prefix_family(LearnerFamily f) { return f == LearnerFamily::boosted || f == LearnerFamily::forest; }

int default_trees(LearnerFamily f) {
    return f == LearnerFamily::boosted ? BoostParams{}.n_trees : ForestParams{}.n_trees;
}

/// Validates a cell without fitting anything.
void check_cell(LearnerFamily family, const nlohmann::json& params) {
    if (!params.is_object()) throw ConfigError("grid cell must be a JSON object");
    try {
        switch (family) {
        case LearnerFamily::boosted: boost_params_from_json(params).validate(); break;
        case LearnerFamily::forest: forest_params_from_json(params).validate(); break;
        case LearnerFamily::logistic:
        case LearnerFamily::lasso: {
            reject_unknown_keys(params, {"strength", "max_iter", "tol", "seed"}, to_string(family));
            const double s = params.value("strength", 1.0);
            if (!(s >= 0.0) || params.value("max_iter", 1000) < 1 || !(params.value("tol", 1e-8) > 0.0)) {
                throw ConfigError("logistic regression needs strength >= 0, max_iter >= 1, tol > 0");
            }
            break;
        }
        case LearnerFamily::knn: {
            reject_unknown_keys(params, {"k", "seed"}, "knn");
            const int k = params.value("k", 5);
            if (k < 1 || k % 2 == 0) throw ConfigError("k must be a positive odd integer");
            break;
        }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(e.what());
    }
}

ClassifierPtr truncate_model(LearnerFamily family, const ClassifierPtr& model, int n_trees) {
    if (family == LearnerFamily::boosted) {
        return std::make_shared<BoostedEnsemble>(static_cast<const BoostedEnsemble&>(*model).truncated(n_trees));
    }
    return std::make_shared<ForestModel>(static_cast<const ForestModel&>(*model).truncated(n_trees));
}

}  // namespace

GridSearchResult grid_search(LearnerFamily family, const std::vector<nlohmann::json>& grid, const Cohort& train,
                             const GridSearchOptions& options) {
    if (grid.empty()) throw ConfigError("grid is empty");
    const auto labels = train.labels();
    const auto assignment = stratified_folds(labels, options.folds, derive_seed(options.seed, "folds"));

    GridSearchResult result;
    result.family = family;
    result.cells.resize(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        result.cells[c].params = grid[c];
        try {
            check_cell(family, grid[c]);
        } catch (const Error& e) {
            result.cells[c].failed = true;
            result.cells[c].error = e.what();
        }
    }

    // Cells that differ only in n_trees share one fit per fold, truncated.
    std::map<std::string, std::vector<std::size_t>> groups;
    std::vector<std::string> group_order;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        if (result.cells[c].failed) continue;
        std::string key;
        if (prefix_family(family)) {
            auto rest = grid[c];
            rest.erase("n_trees");
            key = rest.dump();
        } else {
            key = std::to_string(c);
        }
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) group_order.push_back(key);
        it->second.push_back(c);
    }

    const auto model_seed_base = derive_seed(options.seed, "cv-model");
    for (std::size_t f = 0; f < options.folds; ++f) {
        std::vector<std::size_t> fit_idx;
        std::vector<std::size_t> val_idx;
        for (std::size_t i = 0; i < assignment.size(); ++i) (assignment[i] == f ? val_idx : fit_idx).push_back(i);
        auto fit_rows = train.select_rows(fit_idx);
        if (options.oversample) fit_rows = oversample(fit_rows, derive_seed(options.seed, "cv-oversample-" + std::to_string(f))).cohort;
        const auto val_rows = train.select_rows(val_idx);
        const auto val_labels = val_rows.labels();
        const auto fold_seed = derive_seed(model_seed_base, static_cast<std::uint64_t>(f));

        for (const auto& key : group_order) {
            const auto& members = groups[key];
            auto params = grid[members.front()];
            int max_trees = 0;
            if (prefix_family(family)) {
                for (auto c : members) {
                    max_trees = std::max(max_trees, grid[c].value("n_trees", default_trees(family)));
                }
                params["n_trees"] = max_trees;
            }
            ClassifierPtr full;
            try {
                full = fit_learner(family, params, fit_rows, fold_seed);
            } catch (const Error& e) {
                for (auto c : members) {
                    result.cells[c].failed = true;
                    result.cells[c].error = e.what();
                }
                continue;
            }
            for (auto c : members) {
                auto& cell = result.cells[c];
                if (cell.failed) continue;
                if (options.observer) options.observer(c, f, fit_rows, val_rows);
                try {
                    auto model = full;
                    if (prefix_family(family)) {
                        const int n = grid[c].value("n_trees", default_trees(family));
                        if (n != max_trees) model = truncate_model(family, full, n);
                    }
                    cell.fold_auc.push_back(auc(model->predict_proba(val_rows), val_labels));
                } catch (const Error& e) {
                    cell.failed = true;
                    cell.error = e.what();
                }
            }
        }
    }

    bool any = false;
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        auto& cell = result.cells[c];
        if (cell.failed) continue;
        cell.mean_auc = std::accumulate(cell.fold_auc.begin(), cell.fold_auc.end(), 0.0) /
                        static_cast<double>(cell.fold_auc.size());
        if (!any || cell.mean_auc > result.cells[result.best].mean_auc) {
            result.best = c;
            any = true;
        }
    }
    if (!any) {
        throw NumericError("grid search for " + to_string(family) + ": every cell failed (first error: " +
                           result.cells.front().error + ")");
    }
    auto refit_rows = options.oversample ? oversample(train, derive_seed(options.seed, "refit-oversample")).cohort : train;
    result.model = fit_learner(family, grid[result.best], refit_rows, derive_seed(options.seed, "refit"));
    return result;
}

nlohmann::json to_json(const GridSearchResult& r) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json j = {{"params", c.params}, {"failed", c.failed}};
        if (c.failed) {
            j["error"] = c.error;
        } else {
            j["fold_auc"] = c.fold_auc;
            j["mean_auc"] = c.mean_auc;
        }
        cells.push_back(std::move(j));
    }
    return {{"family", to_string(r.family)}, {"best", r.best}, {"best_params", r.best_cell().params}, {"cells", cells}};
}

// ---------------------------------------------------------------------------
// Reports

ComparisonReport comparison_report(const std::vector<NamedModel>& models, const Cohort& train, const Cohort& test,
                                   const EvalSettings& settings) {
    require_same_features(train, test);
    ComparisonReport report;
    auto train_settings = settings;
    train_settings.seed = derive_seed(settings.seed, "train");
    auto test_settings = settings;
    test_settings.seed = derive_seed(settings.seed, "test");
    for (const auto& m : models) {
        report.train.push_back(evaluate(*m.model, train, train_settings, m.name, "train"));
        report.test.push_back(evaluate(*m.model, test, test_settings, m.name, "test"));
    }
    return report;
}

void write_report_csv(const std::vector<EvalReport>& reports, std::ostream& out) {
    out << "model,dataset,auc,auc_lower,auc_upper,accuracy,accuracy_lower,accuracy_upper\n";
    for (const auto& r : reports) {
        out << r.model_name << ',' << r.dataset << ',' << format_number(r.auc) << ','
            << format_number(r.auc_ci.lower) << ',' << format_number(r.auc_ci.upper) << ','
            << format_number(r.accuracy) << ',' << format_number(r.accuracy_ci.lower) << ','
            << format_number(r.accuracy_ci.upper) << '\n';
    }
}

void write_roc_csv(const std::vector<EvalReport>& reports, std::ostream& out) {
    out << "model,fpr,tpr,threshold\n";
    for (const auto& r : reports) {
        for (const auto& p : r.roc.points) {
            out << r.model_name << ',' << format_number(p.fpr) << ',' << format_number(p.tpr) << ','
                << (std::isinf(p.threshold) ? (p.threshold > 0 ? "inf" : "-inf") : format_number(p.threshold))
                << '\n';
        }
    }
}

std::string format_report_table(const std::vector<EvalReport>& reports) {
    std::size_t width = 5;
    for (const auto& r : reports) width = std::max(width, r.model_name.size());
    const double level = reports.empty() ? 95.0 : 100.0 * (1.0 - reports.front().auc_ci.alpha);
    std::string s = fmt::format("{:<{}}  {:<7}  {:>6}  {:^17}  {:>8}  {:^17}\n", "Model", width, "Set", "AUC",
                                fmt::format("AUC {:g}% CI", level), "Accuracy", fmt::format("Acc {:g}% CI", level));
    for (const auto& r : reports) {
        s += fmt::format("{:<{}}  {:<7}  {:>6.4f}  [{:.4f} - {:.4f}]  {:>8.4f}  [{:.4f} - {:.4f}]\n", r.model_name,
                         width, r.dataset, r.auc, r.auc_ci.lower, r.auc_ci.upper, r.accuracy, r.accuracy_ci.lower,
                         r.accuracy_ci.upper);
    }
    return s;
}

}  // namespace hfrisk
