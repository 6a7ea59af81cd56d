#include "hfrisk/classifier.hpp"

#include <cmath>

#include "hfrisk/baselines.hpp"
#include "hfrisk/error.hpp"
#include "hfrisk/gbt.hpp"

namespace hfrisk {

FeatureMatrix align_features(const Cohort& cohort, const std::vector<std::string>& feature_names) {
    std::vector<std::size_t> source;
    source.reserve(feature_names.size());
    for (const auto& name : feature_names) {
        auto j = cohort.schema().index_of(name);
        if (!j) {
            throw SchemaError("model feature '" + name + "' is not present in the cohort");
        }
        source.push_back(*j);
    }
    FeatureMatrix x;
    x.rows = cohort.rows();
    x.cols = feature_names.size();
    x.values.resize(x.rows * x.cols);
    x.missing.resize(x.rows * x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto vals = cohort.row_values(i);
        const auto miss = cohort.row_missing(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            x.values[i * x.cols + j] = vals[source[j]];
            x.missing[i * x.cols + j] = miss[source[j]];
        }
    }
    return x;
}

double sigmoid(double margin) noexcept {
    if (margin >= 0.0) {
        return 1.0 / (1.0 + std::exp(-margin));
    }
    const double e = std::exp(margin);
    return e / (1.0 + e);
}

double logistic_loss(std::span<const double> margins, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const double m = margins[i];
        // log(1 + e^m) - y m, stable for either sign of m.
        const double softplus = m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
        total += softplus - labels[i] * m;
    }
    return margins.empty() ? 0.0 : total / static_cast<double>(margins.size());
}

ClassifierPtr classifier_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("kind")) {
        throw ConfigError("model document lacks a 'kind' discriminator");
    }
    const auto kind = doc.at("kind").get<std::string>();
    try {
        if (kind == "boosted_trees") return std::make_shared<BoostedEnsemble>(BoostedEnsemble::from_json(doc));
        if (kind == "logistic") return std::make_shared<LinearModel>(LinearModel::from_json(doc));
        if (kind == "random_forest") return std::make_shared<ForestModel>(ForestModel::from_json(doc));
        if (kind == "knn") return std::make_shared<KnnModel>(KnnModel::from_json(doc));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed " + kind + " model document: " + e.what());
    }
    throw ConfigError("unknown model kind '" + kind + "'");
}

}  // namespace hfrisk
