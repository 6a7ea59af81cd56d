// hfrisk: command-line driver for the heart-failure mortality pipeline.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hfrisk/error.hpp"
#include "hfrisk/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hfrisk;

namespace {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string data;
    bool quiet = false;
};

RunConfig resolve_config(const GlobalOptions& g) {
    auto config = g.config.empty() ? default_run_config() : load_run_config(g.config);
    if (g.seed) config.seed = *g.seed;
    if (!g.out.empty()) config.output_dir = g.out;
    if (!g.data.empty()) {
        config.csv = fs::path(g.data);
        config.synthesis.reset();
    }
    return config;
}

void print_csv(const fs::path& dir, const std::string& rel, const std::string& title) {
    std::cout << "\n" << title << "\n" << align_csv(dir / rel);
}

RunResult run_until(const GlobalOptions& g, const RunConfig& config, std::optional<Stage> until) {
    return run_pipeline(config, until, g.quiet ? nullptr : &std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heart-failure ICU mortality risk pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "Run configuration JSON (defaults to the bundled config)");
    app.add_option("--seed", g.seed, "Master seed, overriding the config");
    app.add_option("--out", g.out, "Run directory, overriding the config");
    app.add_option("--data", g.data, "Cohort CSV to use instead of synthesis");
    app.add_flag("-q,--quiet", g.quiet, "Suppress stage progress on stderr");

    auto* synth = app.add_subcommand("synth", "Generate (or load) the cohort");
    std::optional<std::size_t> synth_n;
    synth->add_option("-n,--rows", synth_n, "Number of synthetic patients");
    auto* prep = app.add_subcommand("prep", "Clean, split, impute and trim outliers");
    auto* ttest = app.add_subcommand("ttest", "Welch t-tests between train and test");
    auto* vif = app.add_subcommand("vif", "Variance inflation filter on the training set");
    auto* train = app.add_subcommand("train", "Grid search every configured learner family");
    auto* eval = app.add_subcommand("eval", "Train/test comparison tables with bootstrap CIs");
    auto* ablate = app.add_subcommand("ablate", "Feature ablation study");
    auto* shap = app.add_subcommand("shap", "TreeSHAP attributions for the boosted model");
    auto* roc = app.add_subcommand("roc", "ROC points per model plus an SVG overlay");
    bool roc_svg = true;
    roc->add_flag("--svg,!--no-svg", roc_svg, "Write the SVG overlay");
    auto* figures = app.add_subcommand("figures", "Rebuild SVG figures from a completed run directory");
    auto* run = app.add_subcommand("run", "Run the whole pipeline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code_for(ErrorCategory::config);
    }

    try {
        if (figures->parsed()) {
            const fs::path dir = g.out.empty() ? resolve_config(g).output_dir : fs::path(g.out);
            for (const auto& p : emit_figures(dir)) std::cout << p.string() << "\n";
            return 0;
        }

        auto config = resolve_config(g);
        if (synth->parsed() && synth_n) {
            if (!config.synthesis) throw ConfigError("--rows needs a synthesis data source");
            config.synthesis->n = *synth_n;
        }
        const auto& dir = config.output_dir;

        if (synth->parsed()) {
            run_until(g, config, Stage::cohort);
            std::cout << (dir / "cohort/cohort.csv").string() << "\n";
        } else if (prep->parsed()) {
            run_until(g, config, Stage::prep);
            std::cout << (dir / "prep/report.json").string() << "\n";
        } else if (ttest->parsed()) {
            run_until(g, config, Stage::stats);
            print_csv(dir, "stats/ttest.csv", "Welch t-tests, train vs test");
        } else if (vif->parsed()) {
            run_until(g, config, Stage::stats);
            print_csv(dir, "stats/vif.csv", "Variance inflation factors");
        } else if (train->parsed()) {
            run_until(g, config, Stage::train);
            print_csv(dir, "models/grid_summary.csv", "Grid search");
        } else if (eval->parsed()) {
            run_until(g, config, Stage::eval);
            print_csv(dir, "eval/table_train.csv", "Training set");
            print_csv(dir, "eval/table_test.csv", "Test set");
        } else if (ablate->parsed()) {
            run_until(g, config, Stage::ablate);
            print_csv(dir, "ablation/summary.csv", "Ablation");
        } else if (shap->parsed()) {
            run_until(g, config, Stage::shap);
            if (fs::exists(dir / "shap/ranking.csv")) print_csv(dir, "shap/ranking.csv", "Mean |SHAP|");
            if (fs::exists(dir / "shap/directions.csv")) print_csv(dir, "shap/directions.csv", "Direction check");
        } else if (roc->parsed()) {
            run_until(g, config, Stage::eval);
            print_csv(dir, "eval/table_test.csv", "Test set");
            std::cout << (dir / "eval/roc_test.csv").string() << "\n";
            if (roc_svg) {
                for (const auto& p : emit_figures(dir)) {
                    if (p.filename() == "roc_test.svg") std::cout << p.string() << "\n";
                }
            }
        } else if (run->parsed()) {
            run_until(g, config, std::nullopt);
            print_csv(dir, "eval/table_train.csv", "Training set");
            print_csv(dir, "eval/table_test.csv", "Test set");
            if (fs::exists(dir / "shap/ranking.csv")) print_csv(dir, "shap/ranking.csv", "Mean |SHAP|");
            if (fs::exists(dir / "ablation/summary.csv")) print_csv(dir, "ablation/summary.csv", "Ablation");
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "hfrisk: " << e.what() << "\n";
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "hfrisk: " << e.what() << "\n";
        return exit_code_for(ErrorCategory::data);
    }
}
