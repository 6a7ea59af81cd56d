#include "hfrisk/config.hpp"

#include <algorithm>
#include <fstream>

#include "hfrisk/error.hpp"

namespace hfrisk {
namespace {

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (p.is_absolute() || base.empty()) return p;
    return base / p;
}

void reject_unknown(const nlohmann::json& doc, std::initializer_list<const char*> known, const std::string& where) {
    if (!doc.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

SynthesisSpec parse_synthesis(const nlohmann::json& doc) {
    reject_unknown(doc, {"n", "outcome_rate", "missing_rate", "signal", "correlation"}, "data.synthesis");
    SynthesisSpec spec;
    spec.n = doc.value("n", std::size_t{1177});
    spec.outcome_rate = doc.value("outcome_rate", spec.outcome_rate);
    spec.missing_rate = doc.value("missing_rate", spec.missing_rate);
    if (doc.contains("signal")) {
        for (const auto& t : doc.at("signal")) spec.signal.push_back(signal_term_from_json(t));
    }
    if (doc.contains("correlation") && !doc.at("correlation").is_null()) {
        spec.correlation = doc.at("correlation").get<std::vector<std::vector<double>>>();
    }
    return spec;
}

}  // namespace

void RunConfig::validate() const {
    if (schema.empty()) throw ConfigError("schema has no features");
    if (csv.has_value() == synthesis.has_value()) {
        throw ConfigError("data source needs exactly one of 'csv' or 'synthesis'");
    }
    if (csv && !std::filesystem::exists(*csv)) throw ConfigError("data file not found: " + csv->string());
    if (synthesis) {
        auto spec = *synthesis;
        spec.schema = schema;
        spec.validate();
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("split.test_fraction must be in (0, 1)");
    preprocess.validate();
    if (!(vif_threshold >= 1.0)) throw ConfigError("vif_threshold must be at least 1");
    for (const auto& name : exclude) schema.require(name);
    if (grids.empty()) throw ConfigError("no model grids configured");
    if (folds < 2) throw ConfigError("eval.folds must be at least 2");
    if (!(eval.alpha > 0.0 && eval.alpha < 1.0)) throw ConfigError("eval.alpha must be in (0, 1)");
    if (shap_top_k < 1) throw ConfigError("shap.top_k must be positive");
    for (const auto& set : ablation.candidate_sets) {
        for (const auto& name : set) schema.require(name);
    }
    for (auto f : ablation.families) {
        if (std::none_of(grids.begin(), grids.end(), [f](const auto& g) { return g.first == f; })) {
            throw ConfigError("ablation family " + to_string(f) + " has no model grid");
        }
    }
}

RunConfig parse_run_config(const nlohmann::json& input, const std::filesystem::path& base_dir) {
    const nlohmann::json& user = input.contains("config") && input.contains("stages") ? input.at("config") : input;
    if (!user.is_object()) throw ConfigError("run config must be a JSON object");
    auto doc = nlohmann::json::parse(default_run_config_json());
    doc.merge_patch(user);
    reject_unknown(doc,
                   {"schema", "data", "split", "preprocess", "vif_threshold", "exclude", "models", "eval", "shap",
                    "ablation", "output_dir", "seed", "version"},
                   "run config");

    RunConfig c;
    try {
        const auto& schema = doc.at("schema");
        if (schema.is_string()) {
            const auto s = schema.get<std::string>();
            c.schema = s == "bundled" ? bundled_schema() : load_schema(resolve(s, base_dir));
        } else {
            c.schema = schema_from_json(schema);
        }

        const auto& data = doc.at("data");
        reject_unknown(data, {"csv", "synthesis"}, "data");
        if (data.contains("csv") && !data.at("csv").is_null()) {
            c.csv = resolve(data.at("csv").get<std::string>(), base_dir);
        }
        if (data.contains("synthesis") && !data.at("synthesis").is_null() && !c.csv) {
            c.synthesis = parse_synthesis(data.at("synthesis"));
        }

        const auto& split = doc.at("split");
        reject_unknown(split, {"test_fraction", "stratified"}, "split");
        c.test_fraction = split.value("test_fraction", c.test_fraction);
        c.stratified = split.value("stratified", c.stratified);

        const auto& prep = doc.at("preprocess");
        reject_unknown(prep, {"outlier_z", "oversample_to_balance", "impute_statistic"}, "preprocess");
        c.preprocess.outlier_z = prep.value("outlier_z", c.preprocess.outlier_z);
        c.preprocess.oversample_to_balance = prep.value("oversample_to_balance", c.preprocess.oversample_to_balance);
        c.preprocess.impute_statistic = prep.value("impute_statistic", c.preprocess.impute_statistic);

        c.vif_threshold = doc.at("vif_threshold").get<double>();
        c.exclude = doc.at("exclude").get<std::vector<std::string>>();

        const auto& models = doc.at("models");
        if (!models.is_object()) throw ConfigError("models must be an object keyed by learner family");
        for (const auto& [key, _] : models.items()) learner_family_from_string(key);
        for (auto f : all_families) {
            const auto key = to_string(f);
            if (models.contains(key) && !models.at(key).is_null()) c.grids.emplace_back(f, models.at(key));
        }

        const auto& ev = doc.at("eval");
        reject_unknown(ev, {"folds", "n_resamples", "alpha", "threshold"}, "eval");
        c.folds = ev.value("folds", c.folds);
        c.eval.n_resamples = ev.value("n_resamples", c.eval.n_resamples);
        c.eval.alpha = ev.value("alpha", c.eval.alpha);
        c.eval.threshold = ev.value("threshold", c.eval.threshold);

        const auto& shap = doc.at("shap");
        reject_unknown(shap, {"top_k"}, "shap");
        c.shap_top_k = shap.value("top_k", c.shap_top_k);

        const auto& abl = doc.at("ablation");
        reject_unknown(abl, {"candidate_sets", "families", "in_run"}, "ablation");
        c.ablation.candidate_sets = abl.value("candidate_sets", std::vector<std::vector<std::string>>{});
        if (abl.contains("families")) {
            c.ablation.families.clear();
            for (const auto& f : abl.at("families")) c.ablation.families.push_back(learner_family_from_string(f.get<std::string>()));
        }
        c.ablation.in_run = abl.value("in_run", c.ablation.in_run);

        c.output_dir = resolve(doc.at("output_dir").get<std::string>(), base_dir);
        c.seed = doc.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed run config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(doc, path.parent_path());
}

RunConfig default_run_config() { return parse_run_config(nlohmann::json::object()); }

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json data;
    if (c.csv) {
        data["csv"] = c.csv->string();
    } else if (c.synthesis) {
        nlohmann::json signal = nlohmann::json::array();
        for (const auto& t : c.synthesis->signal) signal.push_back(to_json(t));
        data["synthesis"] = {{"n", c.synthesis->n},
                             {"outcome_rate", c.synthesis->outcome_rate},
                             {"missing_rate", c.synthesis->missing_rate},
                             {"signal", signal}};
        if (c.synthesis->correlation) data["synthesis"]["correlation"] = *c.synthesis->correlation;
    }
    nlohmann::json models = nlohmann::json::object();
    for (const auto& [f, grid] : c.grids) models[to_string(f)] = grid;
    nlohmann::json families = nlohmann::json::array();
    for (auto f : c.ablation.families) families.push_back(to_string(f));
    return {{"schema", to_json(c.schema)},
            {"data", data},
            {"split", {{"test_fraction", c.test_fraction}, {"stratified", c.stratified}}},
            {"preprocess",
             {{"outlier_z", c.preprocess.outlier_z},
              {"oversample_to_balance", c.preprocess.oversample_to_balance},
              {"impute_statistic", c.preprocess.impute_statistic}}},
            {"vif_threshold", c.vif_threshold},
            {"exclude", c.exclude},
            {"models", models},
            {"eval",
             {{"folds", c.folds},
              {"n_resamples", c.eval.n_resamples},
              {"alpha", c.eval.alpha},
              {"threshold", c.eval.threshold}}},
            {"shap", {{"top_k", c.shap_top_k}}},
            {"ablation",
             {{"candidate_sets", c.ablation.candidate_sets}, {"families", families}, {"in_run", c.ablation.in_run}}},
            {"seed", c.seed}};
}

}  // namespace hfrisk
