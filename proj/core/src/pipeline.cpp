#include "hfrisk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hfrisk/baselines.hpp"
#include "hfrisk/error.hpp"
#include "hfrisk/explain.hpp"
#include "hfrisk/gbt.hpp"
#include "hfrisk/random.hpp"
#include "hfrisk/svg.hpp"

#ifndef HFRISK_VERSION
#define HFRISK_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace hfrisk {

std::string to_string(Stage stage) {
    switch (stage) {
    case Stage::cohort: return "cohort";
    case Stage::prep: return "prep";
    case Stage::stats: return "stats";
    case Stage::train: return "train";
    case Stage::eval: return "eval";
    case Stage::shap: return "shap";
    case Stage::ablate: return "ablate";
    case Stage::figures: return "figures";
    }
    return "unknown";
}

Stage stage_from_string(const std::string& s) {
    for (auto st : all_stages) {
        if (to_string(st) == s) return st;
    }
    throw ConfigError("unknown stage '" + s + "'");
}

std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ParseError("'" + s + "' is not a number");
    }
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string ablation_label(const std::vector<std::string>& excluded) {
    return excluded.empty() ? "baseline" : "minus " + join(excluded, " + ");
}

}  // namespace

// ---------------------------------------------------------------------------
// Building blocks

Cohort load_cohort(const RunConfig& config) {
    if (config.csv) return load_csv(*config.csv, config.schema);
    if (!config.synthesis) throw ConfigError("no data source configured");
    auto spec = *config.synthesis;
    spec.schema = config.schema;
    spec.seed = derive_seed(config.seed, "cohort");
    return synthesize(spec);
}

PreparedCohorts prepare_cohorts(const Cohort& raw, const RunConfig& config) {
    config.preprocess.validate();
    auto cleaned = clean(raw);
    auto parts = split(cleaned.cohort, config.test_fraction, config.stratified, derive_seed(config.seed, "prep"));
    const auto imputer = fit_imputer(parts.train);
    auto train = apply_imputer(parts.train, imputer);
    auto test = apply_imputer(parts.test, imputer);
    auto trimmed = remove_outliers(train.cohort, config.preprocess.outlier_z);

    PreprocessReport train_report = cleaned.report;
    train_report.rows_out = parts.train.rows();
    train_report.rows_in = cleaned.report.rows_in;
    train_report.absorb(train.report);
    train_report.absorb(trimmed.report);

    nlohmann::json imputation = nlohmann::json::object();
    for (const auto& [name, v] : imputer.values()) imputation[name] = v;
    PreparedCohorts out{trimmed.cohort, test.cohort, {}};
    out.report = {{"clean", to_json(cleaned.report)},
                  {"split",
                   {{"train_rows", parts.train.rows()},
                    {"test_rows", parts.test.rows()},
                    {"train_positives", parts.train.positives()},
                    {"test_positives", parts.test.positives()}}},
                  {"train", to_json(train_report)},
                  {"test_imputation", to_json(test.report)},
                  {"imputation_values", imputation},
                  {"oversampling", config.preprocess.oversample_to_balance ? "inside each training fold and refit"
                                                                           : "disabled"}};
    return out;
}

FeatureGate feature_gate(const Cohort& train, const Cohort& test, const RunConfig& config) {
    FeatureGate gate;
    gate.ttests = t_test_table(train, test);
    gate.vif = vif_filter(train, config.vif_threshold);
    std::set<std::string> drop(config.exclude.begin(), config.exclude.end());
    for (const auto& f : gate.vif.removed_features()) drop.insert(f);
    for (const auto& name : train.schema().names()) {
        if (!drop.contains(name)) gate.features.push_back(name);
    }
    if (gate.features.empty()) throw ConfigError("no features left after exclusions and the VIF filter");
    return gate;
}

Cohort keep_features(const Cohort& cohort, const std::vector<std::string>& features) {
    std::vector<std::size_t> cols;
    for (const auto& f : features) cols.push_back(cohort.schema().require(f));
    return cohort.select_columns(cols);
}

GridSearchOptions grid_options(const RunConfig& config, LearnerFamily family) {
    GridSearchOptions o;
    o.folds = config.folds;
    o.oversample = config.preprocess.oversample_to_balance;
    o.seed = derive_seed(derive_seed(config.seed, "train"), to_string(family));
    return o;
}

EvalSettings eval_settings(const RunConfig& config, std::string_view purpose) {
    auto s = config.eval;
    s.seed = derive_seed(config.seed, purpose);
    return s;
}

// ---------------------------------------------------------------------------
// Ablation

nlohmann::json to_json(const AblationReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"label", ablation_label(e.excluded)},
                           {"excluded", e.excluded},
                           {"family", to_string(e.family)},
                           {"best_params", e.best_params},
                           {"test_auc", e.test_auc},
                           {"mean_bootstrap_auc", e.mean_auc},
                           {"lower", e.auc_replicates.empty() ? e.test_auc : quantile(e.auc_replicates, 0.025)},
                           {"upper", e.auc_replicates.empty() ? e.test_auc : quantile(e.auc_replicates, 0.975)}});
    }
    return {{"entries", entries}, {"best", report.best}};
}

AblationReport run_ablation(const Cohort& train, const Cohort& test, const RunConfig& config,
                            const std::vector<std::vector<std::string>>& candidate_sets) {
    std::vector<std::vector<std::string>> sets{{}};
    for (const auto& s : candidate_sets) {
        if (!s.empty()) sets.push_back(s);
    }
    for (const auto& s : sets) {
        for (const auto& name : s) {
            if (!train.schema().index_of(name)) {
                throw ConfigError("ablation feature '" + name + "' is not among the modeling features");
            }
        }
    }
    std::vector<std::pair<LearnerFamily, nlohmann::json>> grids;
    for (auto f : config.ablation.families) {
        const auto it = std::find_if(config.grids.begin(), config.grids.end(), [f](const auto& g) { return g.first == f; });
        if (it == config.grids.end()) throw ConfigError("ablation family " + to_string(f) + " has no model grid");
        grids.push_back(*it);
    }
    const auto settings = eval_settings(config, "ablate");

    AblationReport report;
    for (const auto& s : sets) {
        const auto tr = train.drop_columns(s);
        const auto te = test.drop_columns(s);
        for (const auto& [family, grid] : grids) {
            const auto gs = grid_search(family, expand_grid(grid), tr, grid_options(config, family));
            const auto ev = evaluate(*gs.model, te, settings, display_name(family), "test");
            AblationEntry e;
            e.excluded = s;
            e.family = family;
            e.best_params = gs.best_cell().params;
            e.test_auc = ev.auc;
            e.auc_replicates = ev.auc_replicates;
            e.mean_auc = e.auc_replicates.empty()
                             ? ev.auc
                             : std::accumulate(e.auc_replicates.begin(), e.auc_replicates.end(), 0.0) /
                                   static_cast<double>(e.auc_replicates.size());
            report.entries.push_back(std::move(e));
        }
    }
    for (std::size_t i = 1; i < report.entries.size(); ++i) {
        if (report.entries[i].mean_auc > report.entries[report.best].mean_auc) report.best = i;
    }
    return report;
}

AblationReport run_ablation(const RunConfig& config, const std::vector<std::vector<std::string>>& candidate_sets) {
    config.validate();
    const auto prepared = prepare_cohorts(load_cohort(config), config);
    const auto gate = feature_gate(prepared.train, prepared.test, config);
    return run_ablation(keep_features(prepared.train, gate.features), keep_features(prepared.test, gate.features),
                        config, candidate_sets);
}

// ---------------------------------------------------------------------------
// Stages

namespace {

struct StageContext {
    const RunConfig& config;
    fs::path dir;
    std::ostream* log;
    std::vector<std::string> artifacts;

    void write(const std::string& rel, std::string_view content) {
        write_file(dir / rel, content);
        artifacts.push_back(rel);
    }
    void note(const std::string& line) const {
        if (log) *log << line << '\n';
    }
};

std::string to_csv(const Cohort& c) {
    std::ostringstream ss;
    write_csv(c, ss);
    return ss.str();
}

struct Prepared {
    Cohort train;
    Cohort test;
};

Prepared load_prepared(const fs::path& dir) {
    const auto schema = load_schema(dir / "prep/schema.json");
    return {load_csv(dir / "prep/train.csv", schema), load_csv(dir / "prep/test.csv", schema)};
}

std::vector<std::string> load_features(const fs::path& dir) {
    return nlohmann::json::parse(read_file(dir / "stats/features.json")).at("features").get<std::vector<std::string>>();
}

Prepared load_modeling(const fs::path& dir) {
    auto p = load_prepared(dir);
    const auto features = load_features(dir);
    return {keep_features(p.train, features), keep_features(p.test, features)};
}

ClassifierPtr load_model(const fs::path& dir, LearnerFamily f) {
    return classifier_from_json(nlohmann::json::parse(read_file(dir / "models" / (to_string(f) + ".json"))));
}

void stage_cohort(StageContext& ctx) {
    const auto cohort = load_cohort(ctx.config);
    ctx.write("cohort/cohort.csv", to_csv(cohort));
    ctx.write("cohort/schema.json", dump(to_json(cohort.schema())));
    ctx.note(fmt::format("cohort: {} rows, {} features, {} events, {} missing cells", cohort.rows(), cohort.cols(),
                         cohort.positives(), cohort.missing_cells()));
}

void stage_prep(StageContext& ctx) {
    const auto schema = load_schema(ctx.dir / "cohort/schema.json");
    const auto raw = load_csv(ctx.dir / "cohort/cohort.csv", schema);
    const auto prepared = prepare_cohorts(raw, ctx.config);
    ctx.write("prep/schema.json", dump(to_json(prepared.train.schema())));
    ctx.write("prep/train.csv", to_csv(prepared.train));
    ctx.write("prep/test.csv", to_csv(prepared.test));
    ctx.write("prep/report.json", dump(prepared.report));
    ctx.note(fmt::format("prep: train {} rows ({} events), test {} rows ({} events)", prepared.train.rows(),
                         prepared.train.positives(), prepared.test.rows(), prepared.test.positives()));
}

void stage_stats(StageContext& ctx) {
    const auto p = load_prepared(ctx.dir);
    const auto gate = feature_gate(p.train, p.test, ctx.config);
    std::string t = "feature,train_mean,train_std,test_mean,test_std,t,df,p_value\n";
    for (const auto& r : gate.ttests) {
        t += fmt::format("{},{},{},{},{},{},{},{}\n", r.feature, format_number(r.mean_a), format_number(r.std_a),
                         format_number(r.mean_b), format_number(r.std_b), format_number(r.t_statistic),
                         format_number(r.degrees_of_freedom), format_number(r.p_value));
    }
    ctx.write("stats/ttest.csv", t);
    std::string v = "feature,vif,removed,removal_round\n";
    for (const auto& e : gate.vif.entries) {
        v += fmt::format("{},{},{},{}\n", e.feature, format_number(e.vif), e.removed ? 1 : 0,
                         e.removal_round ? std::to_string(*e.removal_round) : "");
    }
    ctx.write("stats/vif.csv", v);
    ctx.write("stats/vif.json", dump(to_json(gate.vif)));
    ctx.write("stats/features.json", dump({{"features", gate.features},
                                           {"excluded", ctx.config.exclude},
                                           {"vif_removed", gate.vif.removed_features()}}));
    ctx.note(fmt::format("stats: {} t-tests, {} removed by VIF, {} modeling features", gate.ttests.size(),
                         gate.vif.removed_features().size(), gate.features.size()));
}

void stage_train(StageContext& ctx) {
    const auto m = load_modeling(ctx.dir);
    std::string summary = "model,family,cells,failed_cells,best_cell,cv_auc,params\n";
    for (const auto& [family, grid] : ctx.config.grids) {
        const auto cells = expand_grid(grid);
        const auto gs = grid_search(family, cells, m.train, grid_options(ctx.config, family));
        ctx.write("models/" + to_string(family) + ".json", dump(gs.model->to_json()));
        ctx.write("models/" + to_string(family) + "_grid.json", dump(to_json(gs)));
        const auto failed = std::count_if(gs.cells.begin(), gs.cells.end(), [](const auto& c) { return c.failed; });
        std::string params = gs.best_cell().params.dump();
        std::replace(params.begin(), params.end(), ',', ';');
        summary += fmt::format("{},{},{},{},{},{},{}\n", display_name(family), to_string(family), gs.cells.size(),
                               failed, gs.best, format_number(gs.best_cell().mean_auc), params);
        ctx.note(fmt::format("train: {} best cv AUC {:.4f} with {}", display_name(family), gs.best_cell().mean_auc,
                             gs.best_cell().params.dump()));
        if (family == LearnerFamily::boosted) {
            std::string imp = "feature,gain\n";
            for (const auto& [name, g] : gain_importance(static_cast<const BoostedEnsemble&>(*gs.model))) {
                imp += name + "," + format_number(g) + "\n";
            }
            ctx.write("models/importance.csv", imp);
        }
    }
    ctx.write("models/grid_summary.csv", summary);
}

void stage_eval(StageContext& ctx) {
    const auto m = load_modeling(ctx.dir);
    std::vector<NamedModel> models;
    for (const auto& [family, _] : ctx.config.grids) {
        models.push_back({display_name(family), load_model(ctx.dir, family)});
    }
    const auto report = comparison_report(models, m.train, m.test, eval_settings(ctx.config, "eval"));
    for (const auto& [name, block] : {std::pair{"train", &report.train}, std::pair{"test", &report.test}}) {
        std::ostringstream table;
        write_report_csv(*block, table);
        ctx.write(std::string("eval/table_") + name + ".csv", table.str());
        std::ostringstream roc;
        write_roc_csv(*block, roc);
        ctx.write(std::string("eval/roc_") + name + ".csv", roc.str());
    }
    nlohmann::json j = {{"train", nlohmann::json::array()}, {"test", nlohmann::json::array()}};
    for (const auto& r : report.train) j["train"].push_back(to_json(r));
    for (const auto& r : report.test) j["test"].push_back(to_json(r));
    ctx.write("eval/reports.json", dump(j));
    for (const auto& r : report.test) {
        ctx.note(fmt::format("eval: {} test AUC {:.4f} [{:.4f} - {:.4f}] accuracy {:.4f}", r.model_name, r.auc,
                             r.auc_ci.lower, r.auc_ci.upper, r.accuracy));
    }
}

void stage_shap(StageContext& ctx) {
    const auto has_boost = std::any_of(ctx.config.grids.begin(), ctx.config.grids.end(),
                                       [](const auto& g) { return g.first == LearnerFamily::boosted; });
    if (!has_boost) {
        ctx.write("shap/summary.json", dump({{"skipped", "no boosted_trees model configured"}}));
        ctx.note("shap: skipped, no boosted model");
        return;
    }
    const auto m = load_modeling(ctx.dir);
    const auto model = load_model(ctx.dir, LearnerFamily::boosted);
    const auto& ensemble = static_cast<const BoostedEnsemble&>(*model);
    const auto shap = tree_shap(ensemble, m.train);

    std::string values = "row_id," + join(shap.feature_names, ",") + "\n";
    for (std::size_t i = 0; i < shap.rows; ++i) {
        values += shap.row_ids[i];
        for (double v : shap.row(i)) values += "," + format_number(v);
        values += "\n";
    }
    ctx.write("shap/values.csv", values);

    const auto summary = shap_summary(shap, m.train, ctx.config.shap_top_k);
    if (summary.warning) ctx.note("shap: warning: " + *summary.warning);
    std::string ranking = "rank,feature,mean_abs_shap\n";
    for (std::size_t k = 0; k < summary.ranking.size(); ++k) {
        ranking += fmt::format("{},{},{}\n", k + 1, summary.ranking[k].first, format_number(summary.ranking[k].second));
    }
    ctx.write("shap/ranking.csv", ranking);
    std::string bees = "feature,value,attribution\n";
    for (const auto& p : summary.beeswarm) {
        bees += p.feature + "," + (p.value ? format_number(*p.value) : "") + "," + format_number(p.attribution) + "\n";
    }
    ctx.write("shap/beeswarm.csv", bees);

    auto j = to_json(summary);
    j["base_value"] = shap.base_value;
    j["rows"] = shap.rows;
    j["cohort"] = "train";
    if (ctx.config.synthesis) {
        std::string dirs = "feature,coefficient,expected_sign,observed_sign\n";
        for (const auto& t : ctx.config.synthesis->signal) {
            const bool monotone = t.shape == SignalShape::linear || t.shape == SignalShape::step;
            if (!monotone || !m.train.schema().index_of(t.feature)) continue;
            const int expected = t.coefficient > 0 ? 1 : (t.coefficient < 0 ? -1 : 0);
            const int observed = direction_check(shap, m.train, t.feature);
            dirs += fmt::format("{},{},{},{}\n", t.feature, format_number(t.coefficient), expected, observed);
        }
        ctx.write("shap/directions.csv", dirs);
    }
    ctx.write("shap/summary.json", dump(j));
    if (!summary.ranking.empty()) {
        ctx.note(fmt::format("shap: top feature {} (mean |shap| {:.4f})", summary.ranking.front().first,
                             summary.ranking.front().second));
    }
}

void stage_ablate(StageContext& ctx) {
    const auto m = load_modeling(ctx.dir);
    const auto report = run_ablation(m.train, m.test, ctx.config, ctx.config.ablation.candidate_sets);
    std::string summary = "configuration,family,test_auc,mean_bootstrap_auc,lower,upper\n";
    std::string reps = "configuration,family,resample,auc\n";
    for (const auto& e : report.entries) {
        const auto label = ablation_label(e.excluded);
        const double lo = e.auc_replicates.empty() ? e.test_auc : quantile(e.auc_replicates, 0.025);
        const double hi = e.auc_replicates.empty() ? e.test_auc : quantile(e.auc_replicates, 0.975);
        summary += fmt::format("{},{},{},{},{},{}\n", label, to_string(e.family), format_number(e.test_auc),
                               format_number(e.mean_auc), format_number(lo), format_number(hi));
        for (std::size_t b = 0; b < e.auc_replicates.size(); ++b) {
            reps += fmt::format("{},{},{},{}\n", label, to_string(e.family), b, format_number(e.auc_replicates[b]));
        }
        ctx.note(fmt::format("ablate: {} {} mean AUC {:.4f}", label, display_name(e.family), e.mean_auc));
    }
    ctx.write("ablation/summary.csv", summary);
    ctx.write("ablation/replicates.csv", reps);
    ctx.write("ablation/report.json", dump(to_json(report)));
}

void stage_figures(StageContext& ctx) {
    for (const auto& p : emit_figures(ctx.dir)) ctx.artifacts.push_back(fs::relative(p, ctx.dir).generic_string());
}

std::vector<Stage> inputs_of(Stage s) {
    switch (s) {
    case Stage::cohort: return {};
    case Stage::prep: return {Stage::cohort};
    case Stage::stats: return {Stage::prep};
    case Stage::train: return {Stage::stats};
    case Stage::eval: return {Stage::train};
    case Stage::shap: return {Stage::train};
    case Stage::ablate: return {Stage::stats};
    case Stage::figures: return {Stage::eval, Stage::shap, Stage::ablate};
    }
    return {};
}

nlohmann::json stage_slice(Stage s, const nlohmann::json& cfg) {
    switch (s) {
    case Stage::cohort: return {cfg.at("schema"), cfg.at("data"), cfg.at("seed")};
    case Stage::prep: return {cfg.at("split"), cfg.at("preprocess")};
    case Stage::stats: return {cfg.at("vif_threshold"), cfg.at("exclude")};
    case Stage::train: return {cfg.at("models"), cfg.at("eval").at("folds"), cfg.at("preprocess")};
    case Stage::eval: return {cfg.at("eval")};
    case Stage::shap: return {cfg.at("shap")};
    case Stage::ablate: return {cfg.at("ablation"), cfg.at("models"), cfg.at("eval"), cfg.at("preprocess")};
    case Stage::figures: return {};
    }
    return {};
}

void run_stage(Stage s, StageContext& ctx) {
    switch (s) {
    case Stage::cohort: stage_cohort(ctx); break;
    case Stage::prep: stage_prep(ctx); break;
    case Stage::stats: stage_stats(ctx); break;
    case Stage::train: stage_train(ctx); break;
    case Stage::eval: stage_eval(ctx); break;
    case Stage::shap: stage_shap(ctx); break;
    case Stage::ablate: stage_ablate(ctx); break;
    case Stage::figures: stage_figures(ctx); break;
    }
}

}  // namespace

RunResult run_pipeline(const RunConfig& config, std::optional<Stage> until, std::ostream* log) {
    config.validate();
    RunResult result;
    result.directory = config.output_dir;
    const fs::path& dir = config.output_dir;
    fs::create_directories(dir);

    const auto cfg = to_json(config);
    nlohmann::json manifest = {{"tool", "hfrisk"},
                               {"version", HFRISK_VERSION},
                               {"config", cfg},
                               {"config_hash", content_hash(cfg.dump())},
                               {"stages", nlohmann::json::array()}};
    if (config.csv) manifest["data_hash"] = content_hash(read_file(*config.csv));

    const auto last = until.value_or(Stage::figures);
    const bool with_ablation = last == Stage::ablate || (config.ablation.in_run && last == Stage::figures);
    std::map<Stage, std::string> hashes;
    std::set<Stage> executed;

    for (auto s : all_stages) {
        if (static_cast<int>(s) > static_cast<int>(last)) break;
        if (s == Stage::ablate && !with_ablation) continue;
        if (last == Stage::ablate && (s == Stage::train || s == Stage::eval || s == Stage::shap)) continue;
        const auto name = to_string(s);

        std::string key = stage_slice(s, cfg).dump();
        if (s == Stage::cohort && manifest.contains("data_hash")) key += manifest["data_hash"].get<std::string>();
        bool upstream_ran = false;
        for (auto in : inputs_of(s)) {
            const auto it = hashes.find(in);
            if (it != hashes.end()) key += it->second;
            upstream_ran = upstream_ran || executed.contains(in);
        }
        const auto hash = content_hash(key);
        const auto record_path = dir / "stages" / (name + ".json");

        std::vector<std::string> artifacts;
        bool reuse = false;
        if (!upstream_ran && fs::exists(record_path)) {
            try {
                const auto record = nlohmann::json::parse(read_file(record_path));
                artifacts = record.at("artifacts").get<std::vector<std::string>>();
                reuse = record.at("hash").get<std::string>() == hash &&
                        std::all_of(artifacts.begin(), artifacts.end(),
                                    [&](const std::string& a) { return fs::exists(dir / a); });
            } catch (const std::exception&) {
                reuse = false;
            }
        }
        if (!reuse) {
            StageContext ctx{config, dir, log, {}};
            try {
                if (log) *log << "[" << name << "]\n";
                fs::remove(record_path);
                run_stage(s, ctx);
            } catch (const std::exception& e) {
                manifest["failed_stage"] = name;
                manifest["error"] = e.what();
                write_file(dir / "manifest.json", dump(manifest));
                const auto category = dynamic_cast<const Error*>(&e) ? dynamic_cast<const Error&>(e).category()
                                                                      : ErrorCategory::data;
                throw Error(category, "stage '" + name + "' failed: " + e.what());
            }
            artifacts = ctx.artifacts;
            write_file(record_path, dump({{"stage", name}, {"hash", hash}, {"artifacts", artifacts}}));
            executed.insert(s);
        } else if (log) {
            *log << "[" << name << "] up to date\n";
        }
        hashes[s] = hash;

        nlohmann::json files = nlohmann::json::object();
        for (const auto& a : artifacts) files[a] = content_hash(read_file(dir / a));
        manifest["stages"].push_back(
            {{"name", name}, {"hash", hash}, {"seed", derive_seed(config.seed, name)}, {"artifacts", files}});
        result.stages.push_back({s, hash, !reuse});
    }
    write_file(dir / "manifest.json", dump(manifest));
    result.manifest = std::move(manifest);
    return result;
}

// ---------------------------------------------------------------------------
// Figures

std::vector<fs::path> emit_figures(const fs::path& run_dir) {
    auto require = [&](const std::string& rel, const std::string& stage) {
        const auto p = run_dir / rel;
        if (!fs::exists(p)) throw DataError("missing artifact " + rel + " from stage '" + stage + "'");
        return p;
    };
    std::vector<fs::path> written;
    auto emit = [&](const std::string& rel, const std::string& content) {
        write_file(run_dir / rel, content);
        written.push_back(run_dir / rel);
    };

    // ROC overlay.
    {
        const auto rows = read_csv_rows(require("eval/roc_test.csv", "eval"));
        std::vector<svg::Series> curves;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() < 3) continue;
            if (curves.empty() || curves.back().name != rows[i][0]) curves.push_back({rows[i][0], {}});
            curves.back().points.emplace_back(parse_double(rows[i][1]), parse_double(rows[i][2]));
        }
        emit("figures/roc_test.svg", svg::roc_plot("ROC curves, test set", curves));
    }

    // Gain importance.
    if (fs::exists(run_dir / "models/boosted_trees.json")) {
        const auto rows = read_csv_rows(require("models/importance.csv", "train"));
        std::vector<std::pair<std::string, double>> bars;
        for (std::size_t i = 1; i < rows.size() && bars.size() < 20; ++i) {
            if (rows[i].size() >= 2) bars.emplace_back(rows[i][0], parse_double(rows[i][1]));
        }
        emit("figures/importance.svg", svg::bar_chart("Boosted model feature importance", bars, "Total split gain"));
    }

    // SHAP ranking and beeswarm.
    const auto shap_summary_json = nlohmann::json::parse(read_file(require("shap/summary.json", "shap")));
    if (!shap_summary_json.contains("skipped")) {
        const auto ranking = read_csv_rows(require("shap/ranking.csv", "shap"));
        ShapSummary summary;
        for (std::size_t i = 1; i < ranking.size(); ++i) {
            if (ranking[i].size() >= 3) summary.ranking.emplace_back(ranking[i][1], parse_double(ranking[i][2]));
        }
        const auto bees = read_csv_rows(require("shap/beeswarm.csv", "shap"));
        for (std::size_t i = 1; i < bees.size(); ++i) {
            if (bees[i].size() < 3) continue;
            std::optional<double> v;
            if (!bees[i][1].empty()) v = parse_double(bees[i][1]);
            summary.beeswarm.push_back({bees[i][0], v, parse_double(bees[i][2])});
        }
        emit("figures/shap_bar.svg", svg::bar_chart("Mean |SHAP| per feature", summary.ranking, "Mean |attribution| (log-odds)"));
        emit("figures/shap_beeswarm.svg", svg::beeswarm("SHAP summary", summary));
    }

    // Ablation boxplots, whiskers at the 2.5/97.5 bootstrap percentiles.
    if (fs::exists(run_dir / "stages/ablate.json")) {
        const auto rows = read_csv_rows(require("ablation/replicates.csv", "ablate"));
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() < 4) continue;
            const auto label = rows[i][0] + " (" + rows[i][1] + ")";
            if (groups.empty() || groups.back().first != label) groups.emplace_back(label, std::vector<double>{});
            groups.back().second.push_back(parse_double(rows[i][3]));
        }
        std::vector<svg::Box> boxes;
        std::string csv = "configuration,whisker_low,q1,median,q3,whisker_high\n";
        for (const auto& [label, values] : groups) {
            svg::Box b{label,
                       quantile(values, 0.025),
                       quantile(values, 0.25),
                       quantile(values, 0.5),
                       quantile(values, 0.75),
                       quantile(values, 0.975)};
            csv += fmt::format("{},{},{},{},{},{}\n", label, format_number(b.whisker_low), format_number(b.q1),
                               format_number(b.median), format_number(b.q3), format_number(b.whisker_high));
            boxes.push_back(std::move(b));
        }
        emit("figures/ablation_boxplot.csv", csv);
        emit("figures/ablation_boxplot.svg", svg::box_plot("Bootstrap test AUC by ablation", boxes, "AUC"));
    }
    return written;
}

std::string align_csv(const fs::path& path) {
    const auto rows = read_csv_rows(path);
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        if (width.size() < r.size()) width.resize(r.size(), 0);
        for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
    }
    std::string out;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) line += "  ";
            line += fmt::format("{:<{}}", r[j], width[j]);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }
    return out;
}

}  // namespace hfrisk
