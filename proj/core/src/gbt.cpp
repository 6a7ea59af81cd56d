#include "hfrisk/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hfrisk/error.hpp"
#include "hfrisk/random.hpp"

namespace hfrisk {
namespace {

constexpr double kHessianFloor = 1e-16;

using RowList = std::vector<std::uint32_t>;

double structure_score(double grad, double hess, double reg_lambda) {
    return grad * grad / (std::max(hess, kHessianFloor) + reg_lambda);
}

double midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) * 0.5;
    return mid > lo ? mid : hi;
}

struct Entry {
    double value;
    std::uint32_t row;
};

using EntryList = std::vector<Entry>;

struct GradPair {
    double grad;
    double hess;
};

/// Scans one feature's sorted entries. Node rows absent from the list are
/// missing for this feature; their statistics are tried on both sides.
void scan_feature(std::size_t feature,
                  const EntryList& sorted,
                  const GradPair* gh,
                  double grad_total,
                  double hess_total,
                  bool has_missing,
                  const SplitRules& rules,
                  SplitCandidate& best) {
    double grad_missing = 0.0;
    double hess_missing = 0.0;
    if (has_missing) {
        double gs = 0.0;
        double hs = 0.0;
        for (const auto& e : sorted) {
            gs += gh[e.row].grad;
            hs += gh[e.row].hess;
        }
        grad_missing = grad_total - gs;
        hess_missing = hess_total - hs;
    }
    double gl = 0.0;
    double hl = 0.0;
    const std::size_t m = sorted.size();
    for (std::size_t k = 0; k + 1 < m; ++k) {
        gl += gh[sorted[k].row].grad;
        hl += gh[sorted[k].row].hess;
        const double v = sorted[k].value;
        const double next = sorted[k + 1].value;
        if (!(v < next)) continue;
        for (int dir = 0; dir < (has_missing ? 2 : 1); ++dir) {
            const bool default_left = dir == 0;
            const double g_left = default_left ? gl + grad_missing : gl;
            const double h_left = default_left ? hl + hess_missing : hl;
            const double g_right = grad_total - g_left;
            const double h_right = hess_total - h_left;
            if (h_left < rules.min_child_weight || h_right < rules.min_child_weight) continue;
            const double gain = split_gain(g_left, h_left, g_right, h_right, rules.reg_lambda, rules.gamma);
            if (gain > best.gain) {
                best.feature = static_cast<int>(feature);
                best.threshold = midpoint(v, next);
                best.gain = gain;
                best.default_left = default_left;
                best.grad_left = g_left;
                best.hess_left = h_left;
                best.grad_right = g_right;
                best.hess_right = h_right;
            }
        }
    }
}

struct GrowContext {
    const FeatureMatrix& x;
    const GradPair* gh;
    const BoostParams& params;
    SplitRules rules;
    std::vector<std::size_t> features;  // sampled, ascending
    std::vector<std::uint8_t> goes_left;
    RegressionTree tree;
};

void grow(GrowContext& ctx, int node, int depth, const RowList& rows, std::vector<EntryList>& sorted) {
    double grad_total = 0.0;
    double hess_total = 0.0;
    for (auto r : rows) {
        grad_total += ctx.gh[r].grad;
        hess_total += ctx.gh[r].hess;
    }
    ctx.tree.nodes[node].cover = hess_total;

    SplitCandidate best;
    if (depth < ctx.params.max_depth) {
        for (std::size_t f = 0; f < ctx.features.size(); ++f) {
            scan_feature(ctx.features[f], sorted[f], ctx.gh, grad_total, hess_total, sorted[f].size() != rows.size(),
                         ctx.rules, best);
        }
    }
    if (!best.valid()) {
        ctx.tree.nodes[node].weight =
            ctx.params.learning_rate * leaf_weight(grad_total, hess_total, ctx.params.reg_lambda);
        return;
    }

    const auto feature = static_cast<std::size_t>(best.feature);
    for (auto r : rows) {
        ctx.goes_left[r] = ctx.x.is_missing(r, feature) ? best.default_left
                                                         : ctx.x.at(r, feature) < best.threshold;
    }
    RowList rows_left;
    RowList rows_right;
    for (auto r : rows) (ctx.goes_left[r] ? rows_left : rows_right).push_back(r);
    // Children at the depth limit become leaves and never scan.
    std::vector<EntryList> sorted_left(sorted.size());
    std::vector<EntryList> sorted_right(sorted.size());
    if (depth + 1 < ctx.params.max_depth) {
        for (std::size_t f = 0; f < sorted.size(); ++f) {
            sorted_left[f].reserve(rows_left.size());
            sorted_right[f].reserve(rows_right.size());
            for (const auto& e : sorted[f]) (ctx.goes_left[e.row] ? sorted_left[f] : sorted_right[f]).push_back(e);
            EntryList().swap(sorted[f]);
        }
    }

    const int left = static_cast<int>(ctx.tree.nodes.size());
    const int right = left + 1;
    ctx.tree.nodes.resize(ctx.tree.nodes.size() + 2);
    auto& n = ctx.tree.nodes[node];
    n.feature = best.feature;
    n.threshold = best.threshold;
    n.default_left = best.default_left;
    n.gain = best.gain;
    n.left = left;
    n.right = right;
    grow(ctx, left, depth + 1, rows_left, sorted_left);
    grow(ctx, right, depth + 1, rows_right, sorted_right);
}

void check_range(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("boosting parameter out of range: ") + what);
}

}  // namespace

void BoostParams::validate() const {
    check_range(n_trees >= 1, "n_trees >= 1");
    check_range(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate in (0,1]");
    check_range(max_depth >= 1, "max_depth >= 1");
    check_range(min_child_weight >= 0.0, "min_child_weight >= 0");
    check_range(reg_lambda >= 0.0, "reg_lambda >= 0");
    check_range(gamma >= 0.0, "gamma >= 0");
    check_range(subsample > 0.0 && subsample <= 1.0, "subsample in (0,1]");
    check_range(colsample > 0.0 && colsample <= 1.0, "colsample in (0,1]");
    check_range(base_score > 0.0 && base_score < 1.0, "base_score in (0,1)");
}

nlohmann::json to_json(const BoostParams& p) {
    return {{"n_trees", p.n_trees},
            {"learning_rate", p.learning_rate},
            {"max_depth", p.max_depth},
            {"min_child_weight", p.min_child_weight},
            {"reg_lambda", p.reg_lambda},
            {"gamma", p.gamma},
            {"subsample", p.subsample},
            {"colsample", p.colsample},
            {"base_score", p.base_score},
            {"seed", p.seed}};
}

BoostParams boost_params_from_json(const nlohmann::json& doc) {
    static const std::vector<std::string> known = {"n_trees", "learning_rate", "max_depth", "min_child_weight",
                                                   "reg_lambda", "gamma", "subsample", "colsample",
                                                   "base_score", "seed"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown boosting parameter '" + key + "'");
        }
    }
    BoostParams p;
    p.n_trees = doc.value("n_trees", p.n_trees);
    p.learning_rate = doc.value("learning_rate", p.learning_rate);
    p.max_depth = doc.value("max_depth", p.max_depth);
    p.min_child_weight = doc.value("min_child_weight", p.min_child_weight);
    p.reg_lambda = doc.value("reg_lambda", p.reg_lambda);
    p.gamma = doc.value("gamma", p.gamma);
    p.subsample = doc.value("subsample", p.subsample);
    p.colsample = doc.value("colsample", p.colsample);
    p.base_score = doc.value("base_score", p.base_score);
    p.seed = doc.value("seed", p.seed);
    return p;
}

double split_gain(double grad_left, double hess_left, double grad_right, double hess_right,
                  double reg_lambda, double gamma) {
    return 0.5 * (structure_score(grad_left, hess_left, reg_lambda) +
                  structure_score(grad_right, hess_right, reg_lambda) -
                  structure_score(grad_left + grad_right, hess_left + hess_right, reg_lambda)) -
           gamma;
}

double leaf_weight(double grad, double hess, double reg_lambda) {
    return -grad / (std::max(hess, kHessianFloor) + reg_lambda);
}

SplitCandidate find_best_split(const FeatureMatrix& x,
                               std::span<const std::size_t> rows,
                               std::span<const double> grad,
                               std::span<const double> hess,
                               std::span<const std::size_t> features,
                               const SplitRules& rules) {
    double grad_total = 0.0;
    double hess_total = 0.0;
    for (auto r : rows) {
        grad_total += grad[r];
        hess_total += hess[r];
    }
    std::size_t max_row = 0;
    for (auto r : rows) max_row = std::max(max_row, r);
    std::vector<GradPair> gh(rows.empty() ? 0 : max_row + 1);
    for (auto r : rows) gh[r] = {grad[r], hess[r]};
    SplitCandidate best;
    for (std::size_t f : features) {
        EntryList sorted;
        for (auto r : rows) {
            if (!x.is_missing(r, f)) sorted.push_back({x.at(r, f), static_cast<std::uint32_t>(r)});
        }
        std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
        scan_feature(f, sorted, gh.data(), grad_total, hess_total, sorted.size() != rows.size(), rules, best);
    }
    return best;
}

// ---------------------------------------------------------------------------

std::size_t RegressionTree::leaf_index(std::span<const double> row, std::span<const std::uint8_t> missing) const {
    std::size_t k = 0;
    while (!nodes[k].is_leaf()) {
        const auto& n = nodes[k];
        const auto f = static_cast<std::size_t>(n.feature);
        const bool left = missing[f] ? n.default_left : row[f] < n.threshold;
        k = static_cast<std::size_t>(left ? n.left : n.right);
    }
    return k;
}

int RegressionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k].is_leaf()) continue;
        d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
        d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
        deepest = std::max(deepest, d[k] + 1);
    }
    return deepest;
}

BoostedEnsemble::BoostedEnsemble(BoostParams params, std::vector<std::string> feature_names,
                                 std::vector<RegressionTree> trees)
    : params_(params),
      feature_names_(std::move(feature_names)),
      trees_(std::move(trees)),
      base_margin_(std::log(params.base_score / (1.0 - params.base_score))) {}

std::vector<double> BoostedEnsemble::predict_margin(const FeatureMatrix& x) const {
    std::vector<double> margin(x.rows, base_margin_);
    for (const auto& tree : trees_) {
        for (std::size_t i = 0; i < x.rows; ++i) {
            margin[i] += tree.predict(x.row(i), x.row_missing(i));
        }
    }
    return margin;
}

std::vector<double> BoostedEnsemble::predict_margin(const Cohort& rows) const {
    return predict_margin(align_features(rows, feature_names_));
}

std::vector<double> BoostedEnsemble::predict_proba(const Cohort& rows) const {
    auto m = predict_margin(rows);
    for (auto& v : m) v = sigmoid(v);
    return m;
}

BoostedEnsemble BoostedEnsemble::truncated(int n_trees) const {
    if (n_trees < 1 || static_cast<std::size_t>(n_trees) > trees_.size()) {
        throw ConfigError("cannot truncate ensemble to " + std::to_string(n_trees) + " trees");
    }
    auto params = params_;
    params.n_trees = n_trees;
    return BoostedEnsemble(params, feature_names_,
                           std::vector<RegressionTree>(trees_.begin(), trees_.begin() + n_trees));
}

BoostedEnsemble fit_boosted(const Cohort& train, const BoostParams& params, BoostTrace* trace) {
    params.validate();
    const auto labels = train.labels();
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
        throw ClassError("boosting needs both outcome classes in the training data");
    }
    const auto names = train.schema().names();
    const FeatureMatrix x = align_features(train, names);
    const std::size_t n = x.rows;
    const std::size_t p = x.cols;

    // Global per-feature orderings; each tree filters them to its sampled rows.
    std::vector<EntryList> order(p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!x.is_missing(i, j)) order[j].push_back({x.at(i, j), static_cast<std::uint32_t>(i)});
        }
        std::stable_sort(order[j].begin(), order[j].end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
    }

    BoostedEnsemble empty(params, names, {});
    std::vector<double> margin(n, empty.base_margin());
    std::vector<GradPair> gh(n);
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(params.n_trees));
    std::vector<std::uint8_t> in_sample(n);
    const SplitRules rules{params.reg_lambda, params.gamma, params.min_child_weight};

    for (int round = 0; round < params.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double prob = sigmoid(margin[i]);
            gh[i] = {prob - labels[i], prob * (1.0 - prob)};
        }
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(round)));

        std::fill(in_sample.begin(), in_sample.end(), 1);
        if (params.subsample < 1.0) {
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            rng.shuffle(std::span<std::size_t>(idx));
            const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.subsample * n)));
            std::fill(in_sample.begin(), in_sample.end(), 0);
            for (std::size_t k = 0; k < keep; ++k) in_sample[idx[k]] = 1;
        }
        std::vector<std::size_t> features(p);
        std::iota(features.begin(), features.end(), 0);
        if (params.colsample < 1.0) {
            rng.shuffle(std::span<std::size_t>(features));
            const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.colsample * p)));
            features.resize(keep);
            std::sort(features.begin(), features.end());
        }

        RowList rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_sample[i]) rows.push_back(static_cast<std::uint32_t>(i));
        }
        std::vector<EntryList> sorted(features.size());
        for (std::size_t f = 0; f < features.size(); ++f) {
            if (rows.size() == n) {
                sorted[f] = order[features[f]];
                continue;
            }
            sorted[f].reserve(rows.size());
            for (const auto& e : order[features[f]]) {
                if (in_sample[e.row]) sorted[f].push_back(e);
            }
        }

        GrowContext ctx{x, gh.data(), params, rules, features, std::vector<std::uint8_t>(n, 0), {}};
        ctx.tree.nodes.resize(1);
        grow(ctx, 0, 0, rows, sorted);

        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += ctx.tree.predict(x.row(i), x.row_missing(i));
        }
        trees.push_back(std::move(ctx.tree));
        if (trace) {
            trace->train_loss.push_back(logistic_loss(margin, labels));
        }
    }
    return BoostedEnsemble(params, names, std::move(trees));
}

std::vector<std::pair<std::string, double>> gain_importance(const BoostedEnsemble& model) {
    std::vector<double> total(model.feature_names().size(), 0.0);
    for (const auto& tree : model.trees()) {
        for (const auto& n : tree.nodes) {
            if (!n.is_leaf()) total[static_cast<std::size_t>(n.feature)] += n.gain;
        }
    }
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t j = 0; j < total.size(); ++j) {
        out.emplace_back(model.feature_names()[j], total[j]);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Serialisation: nodes are nested; children are rebuilt in the same slot
// order the grower allocates them, so a round trip reproduces the flat array.

namespace {

nlohmann::json node_to_json(const RegressionTree& tree, std::size_t k) {
    const auto& n = tree.nodes[k];
    if (n.is_leaf()) {
        return {{"leaf", n.weight}, {"cover", n.cover}};
    }
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"default_left", n.default_left},
            {"gain", n.gain},
            {"cover", n.cover},
            {"left", node_to_json(tree, static_cast<std::size_t>(n.left))},
            {"right", node_to_json(tree, static_cast<std::size_t>(n.right))}};
}

void node_from_json(const nlohmann::json& doc, RegressionTree& tree, std::size_t k) {
    if (doc.contains("leaf")) {
        tree.nodes[k].weight = doc.at("leaf").get<double>();
        tree.nodes[k].cover = doc.at("cover").get<double>();
        return;
    }
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.resize(tree.nodes.size() + 2);
    auto& n = tree.nodes[k];
    n.feature = doc.at("feature").get<int>();
    n.threshold = doc.at("threshold").get<double>();
    n.default_left = doc.at("default_left").get<bool>();
    n.gain = doc.at("gain").get<double>();
    n.cover = doc.at("cover").get<double>();
    n.left = left;
    n.right = left + 1;
    node_from_json(doc.at("left"), tree, static_cast<std::size_t>(left));
    node_from_json(doc.at("right"), tree, static_cast<std::size_t>(left + 1));
}

}  // namespace

nlohmann::json to_json(const RegressionTree& tree) { return node_to_json(tree, 0); }

RegressionTree regression_tree_from_json(const nlohmann::json& doc) {
    RegressionTree tree;
    tree.nodes.resize(1);
    node_from_json(doc, tree, 0);
    return tree;
}

nlohmann::json BoostedEnsemble::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(hfrisk::to_json(t));
    return {{"kind", std::string(kind())},
            {"params", hfrisk::to_json(params_)},
            {"base_margin", base_margin_},
            {"feature_names", feature_names_},
            {"trees", trees}};
}

BoostedEnsemble BoostedEnsemble::from_json(const nlohmann::json& doc) {
    std::vector<RegressionTree> trees;
    for (const auto& t : doc.at("trees")) trees.push_back(regression_tree_from_json(t));
    BoostedEnsemble model(boost_params_from_json(doc.at("params")),
                          doc.at("feature_names").get<std::vector<std::string>>(), std::move(trees));
    model.base_margin_ = doc.at("base_margin").get<double>();
    return model;
}

}  // namespace hfrisk
