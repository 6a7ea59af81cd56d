// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: hfrisk_acceptance [--work-dir DIR] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hfrisk/error.hpp"
#include "hfrisk/explain.hpp"
#include "hfrisk/metrics.hpp"
#include "hfrisk/pipeline.hpp"
#include "hfrisk/preprocess.hpp"
#include "hfrisk/stats.hpp"
#include "hfrisk/synthesis.hpp"
#include "oracles/oracles.hpp"
#include "unit/support.hpp"

using namespace hfrisk;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

struct Context {
    fs::path work;
    // Test-set reports per master seed, read from eval/reports.json.
    std::map<std::uint64_t, json> reports;
    // Directory of the shap-stage run per master seed.
    std::map<std::uint64_t, fs::path> runs;
    double run_seconds = 0.0;
    bool runs_done = false;
};

constexpr std::uint64_t kSeeds = 10;
constexpr std::uint64_t kFirstSeed = 42;

// ---------------------------------------------------------------------------

Outcome auc_oracle(Context&) {
    const auto start = Clock::now();
    Rng rng(1);
    double worst_mw = 0.0;
    double worst_roc = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.index(49);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::floor(rng.uniform() * 10.0) / 10.0;
            y[i] = rng.uniform() < 0.5;
        }
        const auto positives = std::count(y.begin(), y.end(), 1);
        if (positives == 0 || positives == static_cast<long>(n)) {
            const std::size_t k = rng.index(n);
            y[k] = 1 - y[k];
        }
        const double want = oracle::pair_count_auc(s, y);
        worst_mw = std::max(worst_mw, std::abs(auc(s, y) - want));
        worst_roc = std::max(worst_roc, std::abs(roc_curve(s, y).area() - want));
    }
    const double t = seconds_since(start);
    return {worst_mw <= 1e-12 && worst_roc <= 1e-12 && t < 5.0,
            "max |MW - pairs| " + num(worst_mw, 17) + ", max |trapezoid - pairs| " + num(worst_roc, 17) + ", " +
                num(t, 3) + " s"};
}

Outcome shap_exactness(Context&) {
    const auto start = Clock::now();
    Rng rng(2);
    double worst_phi = 0.0;
    double worst_local = 0.0;
    std::size_t rows = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t p = 1 + rng.index(10);
        const std::size_t n_trees = 1 + rng.index(20);
        std::vector<RegressionTree> trees;
        for (std::size_t t = 0; t < n_trees; ++t) trees.push_back(testing_support::random_tree(rng, p, 3));
        std::vector<std::string> names;
        for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
        BoostParams params;
        params.base_score = 0.05 + 0.9 * rng.uniform();
        const BoostedEnsemble model(params, names, trees);
        const auto cohort = testing_support::random_cohort(20, p, rng.bits(), 0.1);
        const auto shap = tree_shap(model, cohort);
        const auto margin = model.predict_margin(cohort);
        for (std::size_t i = 0; i < cohort.rows(); ++i) {
            const auto want = oracle::brute_force_shapley(trees, cohort.row_values(i), cohort.row_missing(i), p);
            for (std::size_t j = 0; j < p; ++j) worst_phi = std::max(worst_phi, std::abs(shap.at(i, j) - want[j]));
            const double total = std::accumulate(shap.row(i).begin(), shap.row(i).end(), shap.base_value);
            worst_local = std::max(worst_local, std::abs(total - margin[i]));
            ++rows;
        }
    }
    const double t = seconds_since(start);
    return {worst_phi <= 1e-9 && worst_local <= 1e-9 && t < 60.0,
            std::to_string(rows) + " rows, max |phi - brute force| " + num(worst_phi, 15) + ", max local error " +
                num(worst_local, 15) + ", " + num(t, 3) + " s"};
}

Outcome split_optimality(Context&) {
    Rng rng(3);
    int exact = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rng.index(29);
        const std::size_t p = 1 + rng.index(4);
        FeatureMatrix x;
        x.rows = n;
        x.cols = p;
        for (std::size_t k = 0; k < n * p; ++k) {
            const bool miss = rng.uniform() < 0.15;
            x.values.push_back(miss ? 0.0 : std::floor(rng.uniform() * 8.0));
            x.missing.push_back(miss ? 1 : 0);
        }
        std::vector<double> g(n), h(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double prob = rng.uniform_open();
            g[i] = prob - (rng.uniform() < 0.5 ? 1.0 : 0.0);
            h[i] = prob * (1.0 - prob);
        }
        std::vector<std::size_t> rows(n), features(p);
        std::iota(rows.begin(), rows.end(), 0);
        std::iota(features.begin(), features.end(), 0);
        const SplitRules rules{.reg_lambda = rng.uniform(), .gamma = 0.0, .min_child_weight = 0.1 * rng.uniform()};
        const auto best = find_best_split(x, rows, g, h, features, rules);
        const double want = oracle::exhaustive_best_gain(x, rows, g, h, rules);
        double got = 0.0;
        if (best.valid()) {
            got = oracle::split_gain_of(x, rows, g, h, rules, static_cast<std::size_t>(best.feature), best.threshold,
                                        best.default_left);
        }
        exact += got == want;
    }
    return {exact == 100, std::to_string(exact) + "/100 chosen splits attain the exhaustive maximum exactly"};
}

Outcome loss_monotone(Context&) {
    const auto config = testing_support::planted_config(42);
    const auto prepared = prepare_cohorts(load_cohort(config), config);
    const auto train = oversample(prepared.train, derive_seed(config.seed, "refit-oversample")).cohort;
    BoostParams p;
    p.n_trees = 200;
    p.max_depth = 3;
    p.learning_rate = 0.1;
    BoostTrace trace;
    fit_boosted(train, p, &trace);
    double worst = -std::numeric_limits<double>::infinity();
    int violations = 0;
    for (std::size_t k = 1; k < trace.train_loss.size(); ++k) {
        const double rise = trace.train_loss[k] - trace.train_loss[k - 1];
        worst = std::max(worst, rise);
        violations += rise > 1e-12;
    }
    return {trace.train_loss.size() == 200 && violations == 0,
            "loss " + num(trace.train_loss.front(), 6) + " -> " + num(trace.train_loss.back(), 6) +
                ", largest round-to-round change " + num(worst, 15) + ", " + std::to_string(violations) +
                " violations"};
}

Outcome welch_table(Context&) {
    const auto age = welch_t_test(SampleSummary{75.57, 12.13, 941}, SampleSummary{75.59, 11.83, 236});
    const auto rbc = welch_t_test(SampleSummary{3.52, 0.57, 941}, SampleSummary{3.63, 0.58, 236});
    return {std::abs(age.p_value - 0.9832) <= 0.02 && rbc.p_value < 0.05,
            "Age p " + num(age.p_value) + ", RBC p " + num(rbc.p_value)};
}

Cohort columns_cohort(const std::vector<std::vector<double>>& cols) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < cols.size(); ++j) names.push_back("c" + std::to_string(j));
    std::vector<std::vector<testing_support::Cell>> rows(cols[0].size());
    std::vector<int> labels(cols[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& c : cols) rows[i].push_back(c[i]);
        labels[i] = static_cast<int>(i % 2);
    }
    return testing_support::make_cohort(names, rows, labels);
}

Outcome vif_oracle(Context&) {
    Rng rng(6);
    bool ok = true;
    std::ostringstream detail;
    // Target column = sqrt(r2/2)(a + b) + sqrt(1 - r2) e has R^2 = r2 on (a, b).
    for (double r2 : {0.5, 0.75, 0.8, 0.9}) {
        const std::size_t n = 5000;
        std::vector<double> a(n), b(n), c(n);
        const double w = std::sqrt(r2 / 2.0);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
            c[i] = w * (a[i] + b[i]) + std::sqrt(1.0 - r2) * rng.normal();
        }
        const std::vector<std::vector<double>> cols{a, b, c};
        const double got = variance_inflation(cols)[2];
        const double via_oracle = oracle::normal_equations_vif(cols, 2);
        const double target = 1.0 / (1.0 - r2);
        ok = ok && std::abs(got - target) <= 0.5 && std::abs(got - via_oracle) <= 1e-6;
        detail << "R2 " << r2 << ": VIF " << num(got, 3) << " (target " << num(target, 3) << ", oracle "
               << num(via_oracle, 3) << "); ";
    }
    int round_one = 0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(300), b(300), c(300), d(300);
        for (std::size_t i = 0; i < 300; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
            d[i] = rng.normal();
            c[i] = a[i] + b[i];
        }
        const auto r = vif_filter(columns_cohort({a, b, c, d}), 5.0);
        for (const auto& e : r.entries) {
            if (e.removal_round == 1 && (e.feature == "c0" || e.feature == "c1" || e.feature == "c2")) ++round_one;
        }
    }
    ok = ok && round_one == 20;
    detail << "collinear trio removed in round 1: " << round_one << "/20; ";

    const auto config = testing_support::planted_config(42);
    const auto prepared = prepare_cohorts(load_cohort(config), config);
    const auto report = vif_filter(prepared.train, 5.0);
    double max_survivor = 0.0;
    for (const auto& e : report.entries) {
        if (!e.removed) max_survivor = std::max(max_survivor, e.vif);
    }
    ok = ok && max_survivor <= 5.0;
    detail << "planted cohort: " << report.removed_features().size() << " removed, max surviving VIF "
           << num(max_survivor, 3);
    return {ok, detail.str()};
}

Outcome synthesis_fidelity(Context&) {
    const auto config = testing_support::planted_config(42);
    auto spec = *config.synthesis;
    spec.schema = config.schema;
    spec.n = 10000;
    spec.seed = derive_seed(config.seed, "cohort");
    const auto c = synthesize(spec);
    int within = 0;
    int total = 0;
    double worst = 0.0;
    std::string worst_name;
    for (std::size_t j = 0; j < c.cols(); ++j) {
        const auto& f = c.schema()[j];
        if (f.kind != FeatureKind::continuous) continue;
        const auto obs = c.observed_column(j);
        const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
        const double se = *f.std / std::sqrt(static_cast<double>(obs.size()));
        const double z = std::abs(mean - *f.mean) / se;
        ++total;
        within += z <= 3.0;
        if (z > worst) {
            worst = z;
            worst_name = f.name;
        }
    }
    const double rate = static_cast<double>(c.positives()) / static_cast<double>(c.rows());
    return {within == total && std::abs(rate - spec.outcome_rate) <= 0.02,
            std::to_string(within) + "/" + std::to_string(total) + " continuous means within 3 SE (worst " +
                worst_name + " at " + num(worst, 2) + " SE); outcome rate " + num(rate)};
}

Outcome leakage(Context&) {
    Rng rng(10);
    int imputer_ok = 0;
    int sentinel_ok = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 80 + rng.index(200);
        const std::size_t p = 2 + rng.index(4);
        // Deduplicated up front: the perturbation below must not change which rows are duplicates.
        const auto cohort =
            clean(testing_support::random_cohort(n, p, rng.bits(), 0.05 + 0.2 * rng.uniform())).cohort;
        auto config = testing_support::planted_config(rng.bits());
        config.test_fraction = 0.2 + 0.3 * rng.uniform();

        // Imputation values must not move when every test-side cell changes.
        const auto before = prepare_cohorts(cohort, config);
        std::set<std::string> test_ids(before.test.row_ids().begin(), before.test.row_ids().end());
        auto mutated = cohort;
        for (std::size_t i = 0; i < mutated.rows(); ++i) {
            if (!test_ids.contains(mutated.row_id(i))) continue;
            for (std::size_t j = 0; j < p; ++j) {
                if (!mutated.is_missing(i, j)) mutated = mutated.with_cell(i, j, 1e6 * rng.normal());
            }
        }
        const auto after = prepare_cohorts(mutated, config);
        bool same = before.report.at("imputation_values") == after.report.at("imputation_values") &&
                    before.train == after.train;
        const auto parts = split(clean(cohort).cohort, config.test_fraction, true, derive_seed(config.seed, "prep"));
        const auto fitted = fit_imputer(parts.train);
        for (std::size_t j = 0; j < p; ++j) {
            const double want = oracle::sorted_median(parts.train.observed_column(j));
            same = same && std::abs(fitted.values()[j].second - want) <= 1e-12 * std::max(1.0, std::abs(want));
        }
        imputer_ok += same;

        // Sentinel ids: no oversampled copy of a validation row in its fit fold.
        bool clean = true;
        std::size_t calls = 0;
        GridSearchOptions options;
        options.folds = 2 + rng.index(4);
        options.seed = rng.bits();
        options.observer = [&](std::size_t, std::size_t, const Cohort& fit_rows, const Cohort& val_rows) {
            ++calls;
            std::set<std::string> val_ids(val_rows.row_ids().begin(), val_rows.row_ids().end());
            for (const auto& id : val_rows.row_ids()) clean = clean && base_row_id(id) == id;
            for (const auto& id : fit_rows.row_ids()) clean = clean && !val_ids.contains(base_row_id(id));
        };
        grid_search(LearnerFamily::knn, expand_grid(json{{"k", {3}}}), parts.train, options);
        sentinel_ok += clean && calls == options.folds;
    }
    return {imputer_ok == 20 && sentinel_ok == 20, "imputer invariant in " + std::to_string(imputer_ok) +
                                                       "/20, sentinel folds clean in " +
                                                       std::to_string(sentinel_ok) + "/20"};
}

// Runs the planted configuration for every seed once; later criteria read
// the artifacts. Seed 42 runs the full pipeline including ablation.
void ensure_runs(Context& ctx) {
    if (ctx.runs_done) return;
    ctx.runs_done = true;
    for (std::uint64_t s = kFirstSeed; s < kFirstSeed + kSeeds; ++s) {
        auto config = testing_support::planted_config(s);
        config.output_dir = ctx.work / ("seed-" + std::to_string(s));
        fs::remove_all(config.output_dir);
        const auto start = Clock::now();
        if (s == kFirstSeed) {
            run_pipeline(config);
            ctx.run_seconds = seconds_since(start);
        } else {
            run_pipeline(config, Stage::shap);
        }
        std::cerr << "  seed " << s << " done in " << num(seconds_since(start), 1) << " s\n";
        ctx.runs[s] = config.output_dir;
        ctx.reports[s] = json::parse(slurp(config.output_dir / "eval/reports.json")).at("test");
    }
}

Outcome end_to_end(Context& ctx) {
    ensure_runs(ctx);
    std::ostringstream detail;
    bool ok = ctx.run_seconds < 300.0;
    detail << "run " << num(ctx.run_seconds, 1) << " s; ";

    const auto& first = ctx.reports.at(kFirstSeed);
    std::set<std::string> models;
    for (const auto& r : first) models.insert(r.at("model").get<std::string>());
    const std::set<std::string> expected{"GradientBoosting", "LogisticRegression", "RandomForest", "Lasso", "KNN"};
    const auto dir = ctx.runs.at(kFirstSeed);
    const bool shaped = models == expected && fs::exists(dir / "eval/table_train.csv") &&
                        fs::exists(dir / "eval/table_test.csv") && read_rows(dir / "eval/table_test.csv").size() == 5;
    ok = ok && shaped;
    detail << (shaped ? "5-model train/test tables present; " : "report tables incomplete; ");

    for (const auto& r : first) {
        if (r.at("model") != "GradientBoosting") continue;
        const double a = r.at("auc").get<double>();
        const double width = r.at("auc_ci").at("upper").get<double>() - r.at("auc_ci").at("lower").get<double>();
        ok = ok && a >= 0.85 && width < 0.15;
        detail << "seed 42 boosted AUC " << num(a) << " CI width " << num(width) << "; ";
    }
    int wins = 0;
    for (std::uint64_t s = kFirstSeed; s < kFirstSeed + 5; ++s) {
        std::string top;
        double best = -1.0;
        for (const auto& r : ctx.reports.at(s)) {
            if (r.at("auc").get<double>() > best) {
                best = r.at("auc").get<double>();
                top = r.at("model").get<std::string>();
            }
        }
        wins += top == "GradientBoosting";
        detail << s << ":" << top << "(" << num(best, 3) << ") ";
    }
    ok = ok && wins >= 4;
    detail << "; boosted top in " << wins << "/5";
    return {ok, detail.str()};
}

Outcome ablation(Context& ctx) {
    ensure_runs(ctx);
    const auto config = testing_support::planted_config(42);
    const std::string noise = "Basophils";
    const std::string strongest = strongest_signal_feature(config.synthesis->signal);
    const auto report = run_ablation(config, {{noise}, {strongest}});
    if (report.entries.size() != 3 || !report.entries[0].excluded.empty()) {
        return {false, "baseline configuration missing from the ablation report"};
    }
    const double base = report.entries[0].mean_auc;
    const double d_noise = report.entries[1].mean_auc - base;
    const double d_signal = report.entries[2].mean_auc - base;

    // The in-run ablation must also lead with the baseline.
    const auto in_run = json::parse(slurp(ctx.runs.at(kFirstSeed) / "ablation/report.json"));
    const bool baseline_in_run = !in_run.at("entries").empty() && in_run.at("entries")[0].at("excluded").empty();
    return {std::abs(d_noise) < 0.02 && d_signal < -0.05 && baseline_in_run,
            "baseline mean AUC " + num(base) + "; minus " + noise + " " + num(d_noise) + "; minus " + strongest +
                " " + num(d_signal) + (baseline_in_run ? "; baseline leads in-run report" : "; in-run baseline missing")};
}

std::map<std::string, std::string> artifact_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    }
    return out;
}

Outcome determinism(Context& ctx) {
    // A reduced grid keeps two complete executions cheap; every stage and
    // artifact kind is still produced.
    auto doc = json{{"models",
                     {{"boosted_trees", {{"n_trees", {50, 100}}, {"max_depth", {3}}, {"learning_rate", {0.1}}}},
                      {"logistic", {{"strength", {0.1}}}},
                      {"random_forest", {{"n_trees", {50}}, {"max_depth", {8}}}},
                      {"lasso", {{"strength", {0.01}}}},
                      {"knn", {{"k", {11}}}}}},
                    {"eval", {{"n_resamples", 200}}},
                    {"ablation", {{"candidate_sets", {{"Heart rate"}}}}}};
    std::map<std::string, std::string> bytes[2];
    for (int k = 0; k < 2; ++k) {
        doc["output_dir"] = (ctx.work / ("determinism-" + std::to_string(k))).string();
        fs::remove_all(doc["output_dir"].get<std::string>());
        run_pipeline(parse_run_config(doc));
        bytes[k] = artifact_bytes(doc["output_dir"].get<std::string>());
    }
    std::size_t differing = 0;
    std::size_t checked = 0;
    std::string first_diff;
    for (const auto& [name, content] : bytes[0]) {
        const auto ext = fs::path(name).extension();
        if (ext != ".csv" && ext != ".json" && ext != ".svg") continue;
        ++checked;
        const auto it = bytes[1].find(name);
        if (it == bytes[1].end() || it->second != content) {
            if (differing++ == 0) first_diff = name;
        }
    }
    const bool ok = differing == 0 && bytes[0].size() == bytes[1].size() && checked > 20;
    return {ok, std::to_string(checked) + " CSV/JSON/SVG artifacts compared, " + std::to_string(differing) +
                    " differ" + (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

Outcome directions(Context& ctx) {
    ensure_runs(ctx);
    int good = 0;
    std::ostringstream detail;
    for (std::uint64_t s = kFirstSeed; s < kFirstSeed + kSeeds; ++s) {
        const auto rows = read_rows(ctx.runs.at(s) / "shap/directions.csv");
        bool all = !rows.empty();
        std::string wrong;
        for (const auto& r : rows) {
            if (r.size() != 4 || r[2] != r[3]) {
                all = false;
                wrong += (wrong.empty() ? "" : "/") + r[0];
            }
        }
        good += all;
        if (!all) detail << "seed " << s << " wrong: " << wrong << "; ";
    }
    const auto features = read_rows(ctx.runs.at(kFirstSeed) / "shap/directions.csv");
    detail << "features checked:";
    for (const auto& r : features) detail << " " << r[0] << "(" << (r[2] == "1" ? "+" : "-") << ")";
    detail << "; all signs recovered in " << good << "/" << kSeeds << " runs";
    return {good >= 9, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
    Context ctx;
    ctx.work = fs::temp_directory_path() / "hfrisk-acceptance";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--work-dir" && i + 1 < argc) {
            ctx.work = argv[++i];
        } else if (arg == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string item;
            while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
        } else {
            std::cerr << "usage: hfrisk_acceptance [--work-dir DIR] [--only N[,N...]]\n";
            return 2;
        }
    }
    fs::create_directories(ctx.work);

    const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
        {"AUC oracle equivalence", auc_oracle},
        {"TreeSHAP exactness", shap_exactness},
        {"split-search optimality", split_optimality},
        {"boosting loss monotonicity", loss_monotone},
        {"Welch t-test against cohort table", welch_table},
        {"VIF oracle", vif_oracle},
        {"synthesis fidelity", synthesis_fidelity},
        {"end-to-end reproduction in shape", end_to_end},
        {"ablation driver", ablation},
        {"leakage", leakage},
        {"determinism", determinism},
        {"SHAP direction recovery", directions},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && !only.contains(id)) continue;
        Outcome out;
        const auto start = Clock::now();
        try {
            out = criteria[k].second(ctx);
        } catch (const std::exception& e) {
            out = {false, std::string("error: ") + e.what()};
        }
        failed += !out.pass;
        std::cout << (out.pass ? "PASS" : "FAIL") << " [" << std::setw(2) << id << "] " << criteria[k].first << ": "
                  << out.detail << " (" << num(seconds_since(start), 1) << " s)" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
