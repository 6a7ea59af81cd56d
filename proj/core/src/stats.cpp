#include "hfrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "hfrisk/error.hpp"
#include "hfrisk/random.hpp"
#include "hfrisk/special_functions.hpp"

namespace hfrisk {

SampleSummary summarize(std::span<const double> sample) {
    SampleSummary s;
    s.n = sample.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : sample) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : sample) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

TTestResult welch_t_test(const SampleSummary& a, const SampleSummary& b) {
    if (a.n < 2 || b.n < 2) {
        throw NumericError("t-test needs at least two observations per sample");
    }
    TTestResult r;
    r.mean_a = a.mean;
    r.std_a = a.std;
    r.n_a = a.n;
    r.mean_b = b.mean;
    r.std_b = b.std;
    r.n_b = b.n;
    const double va = a.std * a.std / static_cast<double>(a.n);
    const double vb = b.std * b.std / static_cast<double>(b.n);
    const double se2 = va + vb;
    const double diff = a.mean - b.mean;
    if (se2 == 0.0) {
        if (diff == 0.0) {
            throw NumericError("t-test is degenerate: both samples constant with equal means");
        }
        r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.degrees_of_freedom = static_cast<double>(a.n + b.n - 2);
        r.p_value = 0.0;
        return r;
    }
    r.t_statistic = diff / std::sqrt(se2);
    r.degrees_of_freedom = se2 * se2 / (va * va / static_cast<double>(a.n - 1) + vb * vb / static_cast<double>(b.n - 1));
    r.p_value = student_t_two_sided_p(r.t_statistic, r.degrees_of_freedom);
    return r;
}

TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b) {
    return welch_t_test(summarize(sample_a), summarize(sample_b));
}

std::vector<TTestResult> t_test_table(const Cohort& train, const Cohort& test) {
    require_same_features(train, test);
    std::vector<TTestResult> out;
    for (std::size_t j = 0; j < train.cols(); ++j) {
        const auto& f = train.schema()[j];
        if (f.kind != FeatureKind::continuous || f.role != FeatureRole::feature) continue;
        const auto a = train.observed_column(j);
        const auto b = test.observed_column(j);
        auto r = welch_t_test(a, b);
        r.feature = f.name;
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> VifReport::removed_features() const {
    std::vector<const VifEntry*> removed;
    for (const auto& e : entries) {
        if (e.removed) removed.push_back(&e);
    }
    std::sort(removed.begin(), removed.end(),
              [](const VifEntry* a, const VifEntry* b) { return *a->removal_round < *b->removal_round; });
    std::vector<std::string> out;
    for (const auto* e : removed) out.push_back(e->feature);
    return out;
}

std::vector<std::string> VifReport::surviving_features() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (!e.removed) out.push_back(e.feature);
    }
    return out;
}

std::vector<double> variance_inflation(const std::vector<std::vector<double>>& columns) {
    const std::size_t m = columns.size();
    if (m < 2) {
        throw DataError("VIF needs at least two columns");
    }
    const auto n = static_cast<Eigen::Index>(columns.front().size());
    // Centering absorbs the intercept; scaling to unit norm keeps the QR rank
    // decision independent of the columns' units.
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(m));
    std::vector<bool> constant(m, false);
    for (std::size_t j = 0; j < m; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        for (Eigen::Index i = 0; i < n; ++i) x(i, col) = columns[j][static_cast<std::size_t>(i)];
        x.col(col).array() -= x.col(col).mean();
        const double norm = x.col(col).norm();
        if (norm > 0.0) {
            x.col(col) /= norm;
        } else {
            constant[j] = true;
        }
    }
    std::vector<double> vif(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (constant[j]) {
            vif[j] = std::numeric_limits<double>::infinity();
            continue;
        }
        Eigen::MatrixXd others(n, static_cast<Eigen::Index>(m - 1));
        for (std::size_t k = 0, c = 0; k < m; ++k) {
            if (k != j) others.col(static_cast<Eigen::Index>(c++)) = x.col(static_cast<Eigen::Index>(k));
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
        qr.setThreshold(1e-12);
        const Eigen::VectorXd y = x.col(static_cast<Eigen::Index>(j));
        const Eigen::VectorXd beta = qr.solve(y);
        const double rss = (y - others * beta).squaredNorm();
        // y has unit norm, so TSS = 1 and 1 - R^2 = RSS.
        vif[j] = rss <= 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / rss;
    }
    return vif;
}

VifReport vif_filter(const Cohort& cohort, double threshold) {
    if (!(threshold >= 1.0)) {
        throw ConfigError("VIF threshold must be at least 1");
    }
    std::vector<std::size_t> continuous;
    for (std::size_t j = 0; j < cohort.cols(); ++j) {
        const auto& f = cohort.schema()[j];
        if (f.kind == FeatureKind::continuous && f.role == FeatureRole::feature) continuous.push_back(j);
    }
    if (continuous.size() < 2) {
        throw DataError("VIF filtering is not applicable with fewer than two continuous features");
    }
    if (cohort.missing_cells() != 0) {
        throw DataError("VIF filtering requires complete data");
    }
    VifReport report;
    report.threshold = threshold;
    for (std::size_t j : continuous) {
        report.entries.push_back({cohort.schema()[j].name, 1.0, false, std::nullopt});
    }
    std::vector<std::vector<double>> columns;
    for (std::size_t j : continuous) columns.push_back(cohort.observed_column(j));

    std::vector<std::size_t> alive(continuous.size());
    for (std::size_t k = 0; k < alive.size(); ++k) alive[k] = k;
    int round = 0;
    while (alive.size() >= 2) {
        std::vector<std::vector<double>> current;
        for (std::size_t k : alive) current.push_back(columns[k]);
        const auto vif = variance_inflation(current);
        std::size_t worst = 0;
        for (std::size_t k = 0; k < vif.size(); ++k) {
            report.entries[alive[k]].vif = vif[k];
            if (vif[k] > vif[worst]) worst = k;
        }
        if (!(vif[worst] > threshold)) break;
        ++round;
        auto& e = report.entries[alive[worst]];
        e.removed = true;
        e.removal_round = round;
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    if (alive.size() == 1) {
        report.entries[alive.front()].vif = 1.0;
    }
    report.rounds = round;
    return report;
}

nlohmann::json to_json(const VifReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"feature", e.feature},
                           {"vif", std::isinf(e.vif) ? nlohmann::json("inf") : nlohmann::json(e.vif)},
                           {"removed", e.removed},
                           {"removal_round", e.removal_round ? nlohmann::json(*e.removal_round) : nlohmann::json(nullptr)}});
    }
    return {{"threshold", report.threshold}, {"rounds", report.rounds}, {"entries", entries}};
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const BootstrapCI& ci) {
    return {{"point", ci.point},
            {"lower", ci.lower},
            {"upper", ci.upper},
            {"n_resamples", ci.n_resamples},
            {"alpha", ci.alpha},
            {"seed", ci.seed}};
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw NumericError("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> bootstrap_replicates(const PairedMetric& metric,
                                         std::span<const double> scores,
                                         std::span<const int> labels,
                                         std::size_t n_resamples,
                                         std::uint64_t seed) {
    const std::size_t n = scores.size();
    if (n != labels.size() || n < 2) {
        throw DataError("bootstrap needs matched scores and labels of length >= 2");
    }
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
    if (!has_pos || !has_neg) {
        throw ClassError("bootstrap needs both outcome classes");
    }
    std::vector<double> out;
    out.reserve(n_resamples);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t b = 0; b < n_resamples; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        for (;;) {
            int positives = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t k = rng.index(n);
                s[i] = scores[k];
                y[i] = labels[k];
                positives += y[i];
            }
            if (positives > 0 && positives < static_cast<int>(n)) break;
        }
        out.push_back(metric(s, y));
    }
    return out;
}

BootstrapCI bootstrap_ci(const PairedMetric& metric,
                         std::span<const double> scores,
                         std::span<const int> labels,
                         std::size_t n_resamples,
                         double alpha,
                         std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("bootstrap alpha must lie in (0,1)");
    }
    BootstrapCI ci;
    ci.alpha = alpha;
    ci.seed = seed;
    ci.n_resamples = n_resamples;
    ci.point = metric(scores, labels);
    if (n_resamples == 0) {
        ci.lower = ci.upper = ci.point;
        return ci;
    }
    auto reps = bootstrap_replicates(metric, scores, labels, n_resamples, seed);
    ci.lower = quantile(reps, alpha / 2.0);
    ci.upper = quantile(std::move(reps), 1.0 - alpha / 2.0);
    return ci;
}

}  // namespace hfrisk
