#include <algorithm>
#include <cmath>
#include <numeric>

#include "hfrisk/baselines.hpp"
#include "hfrisk/error.hpp"
#include "hfrisk/random.hpp"

namespace hfrisk {
namespace {

struct TreeBuilder {
    const FeatureMatrix& x;
    std::span<const int> labels;
    const ForestParams& params;
    std::size_t max_features;
    Rng rng;
    ClassificationTree tree;
    std::vector<std::pair<double, int>> scratch;
    std::vector<std::size_t> feature_pool;

    // Missing cells sort first and therefore always fall left of a threshold.
    double key(std::size_t row, std::size_t f) const {
        return x.is_missing(row, f) ? -std::numeric_limits<double>::infinity() : x.at(row, f);
    }

    void build(int node, int depth, std::vector<std::uint32_t>& rows) {
        const auto n = rows.size();
        std::size_t pos = 0;
        for (auto r : rows) pos += static_cast<std::size_t>(labels[r]);
        auto& leaf = tree.nodes[static_cast<std::size_t>(node)];
        leaf.positive_fraction = static_cast<double>(pos) / static_cast<double>(n);
        leaf.samples = static_cast<int>(n);

        const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
        const bool depth_ok = !params.max_depth || depth < *params.max_depth;
        if (pos == 0 || pos == n || n < 2 * min_leaf || !depth_ok) return;

        // Draw max_features candidates without replacement, scan in index order.
        for (std::size_t k = 0; k < max_features; ++k) {
            const std::size_t pick = k + rng.index(feature_pool.size() - k);
            std::swap(feature_pool[k], feature_pool[pick]);
        }
        std::vector<std::size_t> candidates(feature_pool.begin(),
                                            feature_pool.begin() + static_cast<std::ptrdiff_t>(max_features));
        std::sort(candidates.begin(), candidates.end());

        // Weighted child impurity n_L gini_L + n_R gini_R = n_L - S_L/n_L + n_R - S_R/n_R
        // with S = pos^2 + neg^2; minimise it.
        const double parent = static_cast<double>(n) -
                              (static_cast<double>(pos * pos) + static_cast<double>((n - pos) * (n - pos))) /
                                  static_cast<double>(n);
        double best_score = parent;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (std::size_t f : candidates) {
            scratch.clear();
            for (auto r : rows) scratch.emplace_back(key(r, f), labels[r]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::size_t left_pos = 0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                left_pos += static_cast<std::size_t>(scratch[k].second);
                if (!(scratch[k].first < scratch[k + 1].first)) continue;
                const std::size_t nl = k + 1;
                const std::size_t nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const std::size_t right_pos = pos - left_pos;
                const double sl = static_cast<double>(left_pos * left_pos + (nl - left_pos) * (nl - left_pos));
                const double sr = static_cast<double>(right_pos * right_pos + (nr - right_pos) * (nr - right_pos));
                const double score = static_cast<double>(n) - sl / static_cast<double>(nl) - sr / static_cast<double>(nr);
                if (score < best_score - 1e-12) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    const double lo = scratch[k].first;
                    const double hi = scratch[k + 1].first;
                    const double mid = std::isinf(lo) ? hi : lo + (hi - lo) * 0.5;
                    best_threshold = mid > lo ? mid : hi;
                }
            }
        }
        if (best_feature < 0) return;

        const auto f = static_cast<std::size_t>(best_feature);
        std::vector<std::uint32_t> left_rows;
        std::vector<std::uint32_t> right_rows;
        for (auto r : rows) {
            const bool go_left = x.is_missing(r, f) || x.at(r, f) < best_threshold;
            (go_left ? left_rows : right_rows).push_back(r);
        }
        std::vector<std::uint32_t>().swap(rows);
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.resize(tree.nodes.size() + 2);
        auto& split = tree.nodes[static_cast<std::size_t>(node)];
        split.feature = best_feature;
        split.threshold = best_threshold;
        split.left = left;
        split.right = left + 1;
        build(left, depth + 1, left_rows);
        build(left + 1, depth + 1, right_rows);
    }
};

void check(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("forest parameter out of range: ") + what);
}

}  // namespace

void ForestParams::validate() const {
    check(n_trees >= 1, "n_trees >= 1");
    check(!max_depth || *max_depth >= 1, "max_depth >= 1 or unlimited");
    check(min_samples_leaf >= 1, "min_samples_leaf >= 1");
    check(max_features >= 0, "max_features >= 0");
}

nlohmann::json to_json(const ForestParams& p) {
    return {{"n_trees", p.n_trees},
            {"max_depth", p.max_depth ? nlohmann::json(*p.max_depth) : nlohmann::json(nullptr)},
            {"min_samples_leaf", p.min_samples_leaf},
            {"max_features", p.max_features},
            {"bootstrap", p.bootstrap},
            {"seed", p.seed}};
}

ForestParams forest_params_from_json(const nlohmann::json& doc) {
    static const std::vector<std::string> known = {"n_trees", "max_depth", "min_samples_leaf",
                                                   "max_features", "bootstrap", "seed"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown forest parameter '" + key + "'");
        }
    }
    ForestParams p;
    p.n_trees = doc.value("n_trees", p.n_trees);
    if (doc.contains("max_depth") && !doc.at("max_depth").is_null()) {
        p.max_depth = doc.at("max_depth").get<int>();
    }
    p.min_samples_leaf = doc.value("min_samples_leaf", p.min_samples_leaf);
    p.max_features = doc.value("max_features", p.max_features);
    p.bootstrap = doc.value("bootstrap", p.bootstrap);
    p.seed = doc.value("seed", p.seed);
    return p;
}

double ClassificationTree::predict(std::span<const double> row, std::span<const std::uint8_t> missing) const {
    std::size_t k = 0;
    while (!nodes[k].is_leaf()) {
        const auto& n = nodes[k];
        const auto f = static_cast<std::size_t>(n.feature);
        k = static_cast<std::size_t>(missing[f] || row[f] < n.threshold ? n.left : n.right);
    }
    return nodes[k].positive_fraction;
}

std::vector<double> ForestModel::predict_proba(const Cohort& rows) const {
    const auto x = align_features(rows, feature_names_);
    std::vector<double> out(x.rows, 0.0);
    for (const auto& tree : trees_) {
        for (std::size_t i = 0; i < x.rows; ++i) out[i] += tree.predict(x.row(i), x.row_missing(i));
    }
    for (auto& v : out) v /= static_cast<double>(trees_.size());
    return out;
}

ForestModel ForestModel::truncated(int n_trees) const {
    if (n_trees < 1 || static_cast<std::size_t>(n_trees) > trees_.size()) {
        throw ConfigError("cannot truncate forest to " + std::to_string(n_trees) + " trees");
    }
    auto params = params_;
    params.n_trees = n_trees;
    return ForestModel(params, feature_names_,
                       std::vector<ClassificationTree>(trees_.begin(), trees_.begin() + n_trees));
}

ForestModel fit_forest(const Cohort& train, const ForestParams& params) {
    params.validate();
    const auto labels = train.labels();
    if (labels.empty()) {
        throw DataError("random forest needs at least one training row");
    }
    const auto names = train.schema().names();
    const auto x = align_features(train, names);
    const std::size_t p = x.cols;
    std::size_t max_features = params.max_features > 0 ? static_cast<std::size_t>(params.max_features)
                                                        : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p))));
    max_features = std::clamp<std::size_t>(max_features, 1, std::max<std::size_t>(p, 1));

    std::vector<ClassificationTree> trees;
    trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        TreeBuilder builder{x, labels, params, max_features, Rng(derive_seed(params.seed, static_cast<std::uint64_t>(t))),
                            {}, {}, {}};
        builder.feature_pool.resize(p);
        std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), 0);
        std::vector<std::uint32_t> rows(x.rows);
        if (params.bootstrap) {
            for (auto& r : rows) r = static_cast<std::uint32_t>(builder.rng.index(x.rows));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        builder.tree.nodes.resize(1);
        builder.build(0, 0, rows);
        trees.push_back(std::move(builder.tree));
    }
    return ForestModel(params, names, std::move(trees));
}

nlohmann::json ForestModel::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.positive_fraction, n.samples});
        }
        trees.push_back(std::move(nodes));
    }
    return {{"kind", std::string(kind())},
            {"feature_names", feature_names_},
            {"params", hfrisk::to_json(params_)},
            {"node_layout", {"feature", "threshold", "left", "right", "positive_fraction", "samples"}},
            {"trees", trees}};
}

ForestModel ForestModel::from_json(const nlohmann::json& doc) {
    std::vector<ClassificationTree> trees;
    for (const auto& t : doc.at("trees")) {
        ClassificationTree tree;
        for (const auto& n : t) {
            tree.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                  n.at(4).get<double>(), n.at(5).get<int>()});
        }
        trees.push_back(std::move(tree));
    }
    return ForestModel(forest_params_from_json(doc.at("params")),
                       doc.at("feature_names").get<std::vector<std::string>>(), std::move(trees));
}

}  // namespace hfrisk
