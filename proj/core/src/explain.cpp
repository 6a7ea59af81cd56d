#include "hfrisk/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hfrisk/error.hpp"

namespace hfrisk {
namespace {

struct PathElement {
    int feature = -1;
    double zero_fraction = 0.0;
    double one_fraction = 0.0;
    double pweight = 0.0;
};

using Path = std::vector<PathElement>;

void extend_path(Path& path, int depth, double zero_fraction, double one_fraction, int feature) {
    const auto d = static_cast<std::size_t>(depth);
    path[d] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
    for (int i = depth - 1; i >= 0; --i) {
        const auto k = static_cast<std::size_t>(i);
        path[k + 1].pweight += one_fraction * path[k].pweight * (i + 1) / static_cast<double>(depth + 1);
        path[k].pweight = zero_fraction * path[k].pweight * (depth - i) / static_cast<double>(depth + 1);
    }
}

void unwind_path(Path& path, int depth, int index) {
    const auto& el = path[static_cast<std::size_t>(index)];
    const double one_fraction = el.one_fraction;
    const double zero_fraction = el.zero_fraction;
    double next_one_portion = path[static_cast<std::size_t>(depth)].pweight;
    for (int i = depth - 1; i >= 0; --i) {
        auto& p = path[static_cast<std::size_t>(i)];
        if (one_fraction != 0.0) {
            const double tmp = p.pweight;
            p.pweight = next_one_portion * (depth + 1) / ((i + 1) * one_fraction);
            next_one_portion = tmp - p.pweight * zero_fraction * (depth - i) / static_cast<double>(depth + 1);
        } else {
            p.pweight = p.pweight * (depth + 1) / (zero_fraction * (depth - i));
        }
    }
    for (int i = index; i < depth; ++i) {
        auto& p = path[static_cast<std::size_t>(i)];
        const auto& q = path[static_cast<std::size_t>(i + 1)];
        p.feature = q.feature;
        p.zero_fraction = q.zero_fraction;
        p.one_fraction = q.one_fraction;
    }
}

double unwound_path_sum(const Path& path, int depth, int index) {
    const auto& el = path[static_cast<std::size_t>(index)];
    const double one_fraction = el.one_fraction;
    const double zero_fraction = el.zero_fraction;
    double next_one_portion = path[static_cast<std::size_t>(depth)].pweight;
    double total = 0.0;
    for (int i = depth - 1; i >= 0; --i) {
        const auto& p = path[static_cast<std::size_t>(i)];
        if (one_fraction != 0.0) {
            const double tmp = next_one_portion * (depth + 1) / ((i + 1) * one_fraction);
            total += tmp;
            next_one_portion = p.pweight - tmp * zero_fraction * (depth - i) / static_cast<double>(depth + 1);
        } else if (zero_fraction != 0.0) {
            total += p.pweight / zero_fraction / ((depth - i) / static_cast<double>(depth + 1));
        }
    }
    return total;
}

struct ShapWalker {
    const RegressionTree& tree;
    std::span<const double> row;
    std::span<const std::uint8_t> missing;
    std::span<double> phi;

    bool goes_left(const TreeNode& n) const {
        const auto f = static_cast<std::size_t>(n.feature);
        return missing[f] ? n.default_left : row[f] < n.threshold;
    }

    void recurse(std::size_t node, Path path, int depth, double zero_fraction, double one_fraction, int feature) {
        path.resize(static_cast<std::size_t>(depth) + 1);
        extend_path(path, depth, zero_fraction, one_fraction, feature);
        const auto& n = tree.nodes[node];
        if (n.is_leaf()) {
            for (int i = 1; i <= depth; ++i) {
                const double w = unwound_path_sum(path, depth, i);
                const auto& el = path[static_cast<std::size_t>(i)];
                phi[static_cast<std::size_t>(el.feature)] += w * (el.one_fraction - el.zero_fraction) * n.weight;
            }
            return;
        }
        const bool left = goes_left(n);
        const auto hot = static_cast<std::size_t>(left ? n.left : n.right);
        const auto cold = static_cast<std::size_t>(left ? n.right : n.left);
        const double hot_zero = tree.nodes[hot].cover / n.cover;
        const double cold_zero = tree.nodes[cold].cover / n.cover;
        double incoming_zero = 1.0;
        double incoming_one = 1.0;

        // A feature already on the path is undone and re-entered with the
        // combined fractions.
        int index = 0;
        while (index <= depth && path[static_cast<std::size_t>(index)].feature != n.feature) ++index;
        if (index <= depth) {
            incoming_zero = path[static_cast<std::size_t>(index)].zero_fraction;
            incoming_one = path[static_cast<std::size_t>(index)].one_fraction;
            unwind_path(path, depth, index);
            --depth;
        }
        recurse(hot, path, depth + 1, hot_zero * incoming_zero, incoming_one, n.feature);
        recurse(cold, path, depth + 1, cold_zero * incoming_zero, 0.0, n.feature);
    }
};

double subtree_expectation(const RegressionTree& tree, std::size_t node) {
    const auto& n = tree.nodes[node];
    if (n.is_leaf()) return n.weight;
    const auto& l = tree.nodes[static_cast<std::size_t>(n.left)];
    const auto& r = tree.nodes[static_cast<std::size_t>(n.right)];
    return (l.cover * subtree_expectation(tree, static_cast<std::size_t>(n.left)) +
            r.cover * subtree_expectation(tree, static_cast<std::size_t>(n.right))) /
           n.cover;
}

std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

}  // namespace

double expected_value(const RegressionTree& tree) {
    if (tree.nodes.empty()) return 0.0;
    return subtree_expectation(tree, 0);
}

void tree_shap_row(const RegressionTree& tree, std::span<const double> row, std::span<const std::uint8_t> missing,
                   std::span<double> phi) {
    if (tree.nodes.empty()) return;
    ShapWalker walker{tree, row, missing, phi};
    walker.recurse(0, Path(static_cast<std::size_t>(tree.depth()) + 2), 0, 1.0, 1.0, -1);
}

ShapMatrix tree_shap(const BoostedEnsemble& model, const Cohort& rows) {
    const auto x = align_features(rows, model.feature_names());
    ShapMatrix m;
    m.rows = x.rows;
    m.cols = x.cols;
    m.values.assign(x.rows * x.cols, 0.0);
    m.feature_names = model.feature_names();
    m.row_ids = rows.row_ids();
    m.base_value = model.base_margin();
    for (const auto& tree : model.trees()) m.base_value += expected_value(tree);
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::span<double> phi(m.values.data() + i * x.cols, x.cols);
        for (const auto& tree : model.trees()) tree_shap_row(tree, x.row(i), x.row_missing(i), phi);
    }
    return m;
}

ShapSummary shap_summary(const ShapMatrix& shap, const Cohort& cohort, std::size_t top_k) {
    if (cohort.rows() != shap.rows || cohort.row_ids() != shap.row_ids) {
        throw DataError("attribution matrix rows do not match the cohort rows");
    }
    std::vector<std::pair<std::string, double>> means;
    for (std::size_t j = 0; j < shap.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < shap.rows; ++i) s += std::abs(shap.at(i, j));
        means.emplace_back(shap.feature_names[j], shap.rows ? s / static_cast<double>(shap.rows) : 0.0);
    }
    std::stable_sort(means.begin(), means.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    ShapSummary summary;
    if (top_k > shap.cols) {
        summary.warning = "top_k " + std::to_string(top_k) + " exceeds the " + std::to_string(shap.cols) +
                          " features; showing all";
        top_k = shap.cols;
    }
    means.resize(top_k);
    summary.ranking = means;
    for (const auto& [name, _] : summary.ranking) {
        const auto j = static_cast<std::size_t>(
            std::find(shap.feature_names.begin(), shap.feature_names.end(), name) - shap.feature_names.begin());
        const auto col = cohort.schema().index_of(name);
        for (std::size_t i = 0; i < shap.rows; ++i) {
            summary.beeswarm.push_back({name, col ? cohort.cell(i, *col) : std::nullopt, shap.at(i, j)});
        }
    }
    return summary;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("rank correlation needs equal-length inputs");
    if (a.size() < 2) return 0.0;
    const auto ra = midranks(a);
    const auto rb = midranks(b);
    const double mean = (static_cast<double>(a.size()) + 1.0) / 2.0;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

int direction_check(const ShapMatrix& shap, const Cohort& cohort, const std::string& feature) {
    const auto it = std::find(shap.feature_names.begin(), shap.feature_names.end(), feature);
    if (it == shap.feature_names.end()) throw ConfigError("feature '" + feature + "' is not in the attribution matrix");
    if (cohort.rows() != shap.rows) throw DataError("attribution matrix rows do not match the cohort rows");
    const auto j = static_cast<std::size_t>(it - shap.feature_names.begin());
    const auto col = cohort.schema().require(feature);
    std::vector<double> values;
    std::vector<double> attributions;
    for (std::size_t i = 0; i < shap.rows; ++i) {
        if (cohort.is_missing(i, col)) continue;
        values.push_back(cohort.value(i, col));
        attributions.push_back(shap.at(i, j));
    }
    const double rho = spearman(values, attributions);
    return rho > 0.0 ? 1 : (rho < 0.0 ? -1 : 0);
}

nlohmann::json to_json(const ShapSummary& summary) {
    nlohmann::json ranking = nlohmann::json::array();
    for (const auto& [name, v] : summary.ranking) ranking.push_back({{"feature", name}, {"mean_abs_shap", v}});
    nlohmann::json j = {{"ranking", ranking}};
    if (summary.warning) j["warning"] = *summary.warning;
    return j;
}

}  // namespace hfrisk
