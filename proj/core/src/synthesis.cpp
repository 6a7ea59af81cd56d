#include "hfrisk/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hfrisk/error.hpp"
#include "hfrisk/random.hpp"

namespace hfrisk {
namespace {

constexpr double kTruncation = 4.0;
constexpr double kRateTolerance = 0.02;

double logit(double p) { return std::log(p / (1.0 - p)); }

/// Standardised value of feature `col` used by the planted model.
double standardized(const FeatureSpec& f, double x) {
    if (f.kind == FeatureKind::binary) {
        return x - f.prevalence.value_or(0.5);
    }
    const double sd = f.std.value_or(1.0);
    return sd > 0.0 ? (x - f.mean.value_or(0.0)) / sd : 0.0;
}

}  // namespace

SignalShape signal_shape_from_string(const std::string& s) {
    if (s == "linear") return SignalShape::linear;
    if (s == "quadratic") return SignalShape::quadratic;
    if (s == "step") return SignalShape::step;
    if (s == "interaction") return SignalShape::interaction;
    throw ConfigError("unknown signal shape '" + s + "'");
}

std::string to_string(SignalShape shape) {
    switch (shape) {
    case SignalShape::linear: return "linear";
    case SignalShape::quadratic: return "quadratic";
    case SignalShape::step: return "step";
    case SignalShape::interaction: return "interaction";
    }
    return "linear";
}

nlohmann::json to_json(const SignalTerm& term) {
    nlohmann::json doc{{"feature", term.feature},
                       {"coefficient", term.coefficient},
                       {"shape", to_string(term.shape)}};
    if (term.shape == SignalShape::step) doc["threshold"] = term.threshold;
    if (term.shape == SignalShape::interaction) doc["partner"] = term.partner;
    return doc;
}

SignalTerm signal_term_from_json(const nlohmann::json& doc) {
    SignalTerm t;
    t.feature = doc.at("feature").get<std::string>();
    t.coefficient = doc.at("coefficient").get<double>();
    t.shape = signal_shape_from_string(doc.value("shape", std::string("linear")));
    t.threshold = doc.value("threshold", 0.0);
    t.partner = doc.value("partner", std::string{});
    return t;
}

void SynthesisSpec::validate() const {
    if (n == 0) {
        throw ConfigError("synthesis needs n >= 1");
    }
    if (!(outcome_rate > 0.0 && outcome_rate < 1.0)) {
        throw ConfigError("outcome_rate must lie strictly inside (0,1)");
    }
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
        throw ConfigError("missing_rate must lie in [0,1)");
    }
    for (const auto& f : schema.features()) {
        if (f.role != FeatureRole::feature) continue;
        if (f.kind == FeatureKind::continuous && (!f.mean || !f.std)) {
            throw ConfigError("feature '" + f.name + "' lacks mean/std needed for synthesis");
        }
        if (f.kind == FeatureKind::binary && !f.prevalence) {
            throw ConfigError("feature '" + f.name + "' lacks prevalence needed for synthesis");
        }
    }
    for (const auto& t : signal) {
        schema.require(t.feature);
        if (t.shape == SignalShape::interaction) {
            schema.require(t.partner);
        }
    }
    if (correlation) {
        std::size_t n_cont = 0;
        for (const auto& f : schema.features()) {
            n_cont += f.kind == FeatureKind::continuous ? 1 : 0;
        }
        if (correlation->size() != n_cont) {
            throw ConfigError("correlation matrix must be square over the continuous features");
        }
        for (const auto& r : *correlation) {
            if (r.size() != n_cont) {
                throw ConfigError("correlation matrix must be square over the continuous features");
            }
        }
    }
}

double planted_score(const SynthesisSpec& spec, std::span<const double> row) {
    double eta = 0.0;
    for (const auto& t : spec.signal) {
        const std::size_t j = spec.schema.require(t.feature);
        const double z = standardized(spec.schema[j], row[j]);
        switch (t.shape) {
        case SignalShape::linear: eta += t.coefficient * z; break;
        case SignalShape::quadratic: eta += t.coefficient * (z * z - 1.0); break;
        case SignalShape::step: eta += t.coefficient * (z > t.threshold ? 1.0 : 0.0); break;
        case SignalShape::interaction: {
            const std::size_t k = spec.schema.require(t.partner);
            eta += t.coefficient * z * standardized(spec.schema[k], row[k]);
            break;
        }
        }
    }
    return eta;
}

std::string strongest_signal_feature(const std::vector<SignalTerm>& signal) {
    std::string best;
    double best_abs = -1.0;
    for (const auto& t : signal) {
        if (std::abs(t.coefficient) > best_abs) {
            best_abs = std::abs(t.coefficient);
            best = t.feature;
        }
    }
    return best;
}

Cohort synthesize(const SynthesisSpec& spec) {
    spec.validate();
    const auto& schema = spec.schema;
    const std::size_t n = spec.n;
    const std::size_t p = schema.size();

    std::vector<std::size_t> continuous;
    for (std::size_t j = 0; j < p; ++j) {
        if (schema[j].kind == FeatureKind::continuous) continuous.push_back(j);
    }

    Eigen::MatrixXd factor;
    if (spec.correlation) {
        const auto m = static_cast<Eigen::Index>(continuous.size());
        Eigen::MatrixXd corr(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b) corr(a, b) = (*spec.correlation)[a][b];
        Eigen::LLT<Eigen::MatrixXd> llt(corr);
        if (llt.info() != Eigen::Success) {
            throw ConfigError("correlation matrix is not positive definite");
        }
        factor = llt.matrixL();
    }

    // Separate streams so changing missing_rate leaves feature draws intact.
    Rng feature_rng(derive_seed(spec.seed, "features"));
    Rng outcome_rng(derive_seed(spec.seed, "outcome"));
    Rng missing_rng(derive_seed(spec.seed, "missing"));

    std::vector<double> values(n * p, 0.0);
    Eigen::VectorXd eps(static_cast<Eigen::Index>(continuous.size()));
    for (std::size_t i = 0; i < n; ++i) {
        double* row = values.data() + i * p;
        if (spec.correlation) {
            // Whole-row rejection keeps the joint law a truncated correlated normal.
            Eigen::VectorXd z;
            do {
                for (Eigen::Index a = 0; a < eps.size(); ++a) eps(a) = feature_rng.normal();
                z = factor * eps;
            } while (eps.size() > 0 && z.cwiseAbs().maxCoeff() > kTruncation);
            for (std::size_t a = 0; a < continuous.size(); ++a) {
                const auto& f = schema[continuous[a]];
                row[continuous[a]] = *f.mean + *f.std * z(static_cast<Eigen::Index>(a));
            }
            for (std::size_t j = 0; j < p; ++j) {
                if (schema[j].kind == FeatureKind::binary) {
                    row[j] = feature_rng.bernoulli(*schema[j].prevalence) ? 1.0 : 0.0;
                }
            }
        } else {
            for (std::size_t j = 0; j < p; ++j) {
                const auto& f = schema[j];
                if (f.kind == FeatureKind::binary) {
                    row[j] = feature_rng.bernoulli(*f.prevalence) ? 1.0 : 0.0;
                } else {
                    double z = 0.0;
                    do {
                        z = feature_rng.normal();
                    } while (std::abs(z) > kTruncation);
                    row[j] = *f.mean + *f.std * z;
                }
            }
        }
    }

    // Outcome y_i = [u_i < sigmoid(b + eta_i)] = [b > logit(u_i) - eta_i].
    // With the uniforms fixed, the event count is a step function of the
    // intercept b, so b is placed between the k-th and (k+1)-th order
    // statistics of t_i = logit(u_i) - eta_i to realise exactly k events.
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = outcome_rng.uniform_open();
        t[i] = logit(u) - planted_score(spec, std::span<const double>(values.data() + i * p, p));
    }
    auto target = static_cast<std::size_t>(std::llround(spec.outcome_rate * static_cast<double>(n)));
    if (n >= 2) {
        target = std::clamp<std::size_t>(target, 1, n - 1);
    }
    const double realized = static_cast<double>(target) / static_cast<double>(n);
    if (std::abs(realized - spec.outcome_rate) > kRateTolerance || target == 0 || target == n) {
        throw NumericError("cannot calibrate outcome intercept: nearest achievable event rate " +
                           std::to_string(realized) + " misses target " + std::to_string(spec.outcome_rate));
    }
    std::vector<double> sorted = t;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[target - 1] == sorted[target]) {
        throw NumericError("cannot calibrate outcome intercept: tied latent scores at the cut");
    }
    const double intercept = 0.5 * (sorted[target - 1] + sorted[target]);
    std::vector<std::optional<int>> outcome(n);
    for (std::size_t i = 0; i < n; ++i) {
        outcome[i] = intercept > t[i] ? 1 : 0;
    }

    std::vector<std::uint8_t> missing(n * p, 0);
    if (spec.missing_rate > 0.0) {
        for (auto& m : missing) {
            m = missing_rng.bernoulli(spec.missing_rate) ? 1 : 0;
        }
    }

    std::vector<std::string> ids(n);
    const int width = static_cast<int>(std::to_string(n).size());
    for (std::size_t i = 0; i < n; ++i) {
        auto num = std::to_string(i + 1);
        ids[i] = "P" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    }
    return Cohort(schema, std::move(values), std::move(missing), std::move(outcome), std::move(ids));
}

}  // namespace hfrisk
