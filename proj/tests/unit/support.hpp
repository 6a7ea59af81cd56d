#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hfrisk/cohort.hpp"
#include "hfrisk/config.hpp"
#include "hfrisk/gbt.hpp"
#include "hfrisk/pipeline.hpp"
#include "hfrisk/random.hpp"

namespace testing_support {

using Cell = std::optional<double>;

inline hfrisk::Schema continuous_schema(const std::vector<std::string>& names) {
    std::vector<hfrisk::FeatureSpec> specs;
    for (const auto& n : names) specs.push_back({.name = n});
    return hfrisk::Schema(specs);
}

inline hfrisk::Cohort make_cohort(const hfrisk::Schema& schema, const std::vector<std::vector<Cell>>& rows,
                                  const std::vector<std::optional<int>>& outcome) {
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& c : rows[i]) {
            values.push_back(c.value_or(0.0));
            missing.push_back(c ? 0 : 1);
        }
        ids.push_back("r" + std::to_string(i));
    }
    return hfrisk::Cohort(schema, std::move(values), std::move(missing), outcome, std::move(ids));
}

inline hfrisk::Cohort make_cohort(const std::vector<std::string>& names, const std::vector<std::vector<Cell>>& rows,
                                  const std::vector<int>& labels) {
    return make_cohort(continuous_schema(names), rows, std::vector<std::optional<int>>(labels.begin(), labels.end()));
}

/// Gaussian features, labels from a logistic model on the first feature.
inline hfrisk::Cohort random_cohort(std::size_t n, std::size_t p, std::uint64_t seed, double missing_rate = 0.0) {
    hfrisk::Rng rng(seed);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    std::vector<std::vector<Cell>> rows(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double v = rng.normal();
            rows[i].push_back(rng.uniform() < missing_rate ? Cell{} : Cell{v});
        }
        const double first = rows[i][0].value_or(0.0);
        labels[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-2.0 * first)) ? 1 : 0;
    }
    labels[0] = 0;
    labels[1] = 1;
    return make_cohort(names, rows, labels);
}

/// Random regression tree with consistent covers: leaves draw a positive
/// cover and internal nodes sum their children.
inline hfrisk::RegressionTree random_tree(hfrisk::Rng& rng, std::size_t p, int max_depth) {
    hfrisk::RegressionTree t;
    auto grow = [&](auto&& self, int depth) -> int {
        const int id = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        if (depth >= max_depth || (depth > 0 && rng.uniform() < 0.25)) {
            t.nodes[id].weight = rng.normal();
            t.nodes[id].cover = 0.5 + rng.uniform() * 10.0;
            return id;
        }
        const int feature = static_cast<int>(rng.index(p));
        const double threshold = rng.normal();
        const bool default_left = rng.uniform() < 0.5;
        const int left = self(self, depth + 1);
        const int right = self(self, depth + 1);
        auto& n = t.nodes[static_cast<std::size_t>(id)];
        n.feature = feature;
        n.threshold = threshold;
        n.default_left = default_left;
        n.left = left;
        n.right = right;
        n.gain = rng.uniform();
        n.cover = t.nodes[static_cast<std::size_t>(left)].cover + t.nodes[static_cast<std::size_t>(right)].cover;
        return id;
    };
    grow(grow, 0);
    return t;
}

/// Default run configuration with a changed master seed.
inline hfrisk::RunConfig planted_config(std::uint64_t seed = 42) {
    auto c = hfrisk::default_run_config();
    c.seed = seed;
    return c;
}

}  // namespace testing_support
