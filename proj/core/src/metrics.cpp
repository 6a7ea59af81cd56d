#include "hfrisk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hfrisk/error.hpp"

namespace hfrisk {
namespace {

struct ClassCounts {
    std::size_t pos = 0;
    std::size_t neg = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw DataError("scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                        std::to_string(labels.size()) + ")");
    }
    ClassCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
        if (std::isnan(scores[i])) throw NumericError("score " + std::to_string(i) + " is NaN");
        (labels[i] == 1 ? c.pos : c.neg) += 1;
    }
    if (c.pos == 0 || c.neg == 0) {
        throw NumericError("undefined metric: AUC needs both outcome classes");
    }
    return c;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return descending ? scores[a] > scores[b] : scores[a] < scores[b];
    });
    return order;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    const auto counts = check_inputs(scores, labels);
    const auto order = order_by_score(scores, false);
    // Sum of midranks of the positives, doubled so it stays integral.
    std::uint64_t twice_rank_sum = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t pos_in_group = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            pos_in_group += static_cast<std::size_t>(labels[order[j]]);
            ++j;
        }
        // Ranks i+1..j have midrank (i+1+j)/2.
        twice_rank_sum += static_cast<std::uint64_t>(pos_in_group) * static_cast<std::uint64_t>(i + 1 + j);
        i = j;
    }
    const auto np = static_cast<std::uint64_t>(counts.pos);
    const auto nn = static_cast<std::uint64_t>(counts.neg);
    // 2U = 2R - n_pos(n_pos + 1)
    const std::uint64_t twice_u = twice_rank_sum - np * (np + 1);
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(np * nn));
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
    const auto counts = check_inputs(scores, labels);
    const auto order = order_by_score(scores, true);
    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    const auto np = static_cast<double>(counts.pos);
    const auto nn = static_cast<double>(counts.neg);
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / nn, static_cast<double>(tp) / np, s});
    }
    curve.points.push_back({1.0, 1.0, -std::numeric_limits<double>::infinity()});
    return curve;
}

double RocCurve::area() const {
    double a = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) {
        a += (points[k].fpr - points[k - 1].fpr) * (points[k].tpr + points[k - 1].tpr) * 0.5;
    }
    return a;
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
    if (scores.size() != labels.size()) {
        throw DataError("scores and labels differ in length");
    }
    if (scores.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        hits += static_cast<std::size_t>((scores[i] >= threshold ? 1 : 0) == labels[i]);
    }
    return static_cast<double>(hits) / static_cast<double>(scores.size());
}

nlohmann::json to_json(const RocCurve& curve) {
    auto encode = [](double t) -> nlohmann::json {
        if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
        return t;
    };
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : curve.points) points.push_back({p.fpr, p.tpr, encode(p.threshold)});
    return {{"layout", {"fpr", "tpr", "threshold"}}, {"points", points}};
}

}  // namespace hfrisk
