#include <algorithm>
#include <cmath>
#include <numeric>

#include "hfrisk/baselines.hpp"
#include "hfrisk/error.hpp"

namespace hfrisk {
namespace {

struct Standardized {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> x;  // row-major
    std::vector<double> means;
    std::vector<double> stds;
};

void column_moments(const Cohort& data, std::vector<double>& means, std::vector<double>& stds) {
    const std::size_t n = data.rows();
    const std::size_t p = data.cols();
    means.assign(p, 0.0);
    stds.assign(p, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
        const auto col = data.observed_column(j);
        if (col.empty()) continue;
        double sum = 0.0;
        for (double v : col) sum += v;
        means[j] = sum / static_cast<double>(col.size());
        double ss = 0.0;
        for (double v : col) ss += (v - means[j]) * (v - means[j]);
        const double sd = col.size() > 1 ? std::sqrt(ss / static_cast<double>(col.size() - 1)) : 0.0;
        stds[j] = sd > 0.0 ? sd : 1.0;
    }
    (void)n;
}

Standardized standardize(const FeatureMatrix& m, const std::vector<double>& means, const std::vector<double>& stds) {
    Standardized s;
    s.n = m.rows;
    s.p = m.cols;
    s.means = means;
    s.stds = stds;
    s.x.resize(s.n * s.p);
    for (std::size_t i = 0; i < s.n; ++i) {
        for (std::size_t j = 0; j < s.p; ++j) {
            s.x[i * s.p + j] = m.is_missing(i, j) ? 0.0 : (m.at(i, j) - means[j]) / stds[j];
        }
    }
    return s;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

class Problem {
public:
    Problem(const Standardized& data, std::span<const int> labels, Penalty penalty, double strength)
        : d_(data), y_(labels), penalty_(penalty), strength_(strength), margin_(data.n) {}

    std::size_t dim() const { return d_.p + 1; }  // last coordinate is the intercept

    /// Smooth part (mean logistic loss); fills the gradient when requested.
    double loss(const std::vector<double>& theta, std::vector<double>* grad) {
        const std::size_t p = d_.p;
        for (std::size_t i = 0; i < d_.n; ++i) {
            double m = theta[p];
            const double* row = d_.x.data() + i * p;
            for (std::size_t j = 0; j < p; ++j) m += row[j] * theta[j];
            margin_[i] = m;
        }
        const double value = logistic_loss(margin_, y_);
        if (grad) {
            grad->assign(dim(), 0.0);
            const double inv_n = 1.0 / static_cast<double>(d_.n);
            for (std::size_t i = 0; i < d_.n; ++i) {
                const double r = (sigmoid(margin_[i]) - y_[i]) * inv_n;
                const double* row = d_.x.data() + i * p;
                for (std::size_t j = 0; j < p; ++j) (*grad)[j] += r * row[j];
                (*grad)[p] += r;
            }
        }
        return value;
    }

    double penalty(const std::vector<double>& theta) const {
        double s = 0.0;
        for (std::size_t j = 0; j < d_.p; ++j) {
            s += penalty_ == Penalty::l1 ? std::abs(theta[j]) : 0.5 * theta[j] * theta[j];
        }
        return penalty_ == Penalty::none ? 0.0 : strength_ * s;
    }

    void prox(std::vector<double>& theta, double step) const {
        for (std::size_t j = 0; j < d_.p; ++j) {
            if (penalty_ == Penalty::l1) {
                theta[j] = soft_threshold(theta[j], step * strength_);
            } else if (penalty_ == Penalty::l2) {
                theta[j] /= 1.0 + step * strength_;
            }
        }
    }

private:
    const Standardized& d_;
    std::span<const int> y_;
    Penalty penalty_;
    double strength_;
    std::vector<double> margin_;
};

}  // namespace

std::string to_string(Penalty penalty) {
    switch (penalty) {
    case Penalty::none: return "none";
    case Penalty::l1: return "l1";
    case Penalty::l2: return "l2";
    }
    return "none";
}

Penalty penalty_from_string(const std::string& s) {
    if (s == "none") return Penalty::none;
    if (s == "l1") return Penalty::l1;
    if (s == "l2") return Penalty::l2;
    throw ConfigError("unknown penalty '" + s + "'");
}

std::size_t LinearModel::nonzero_weights() const {
    return static_cast<std::size_t>(std::count_if(weights_.begin(), weights_.end(), [](double w) { return w != 0.0; }));
}

std::vector<double> LinearModel::predict_margin(const Cohort& rows) const {
    const auto x = align_features(rows, feature_names_);
    std::vector<double> out(x.rows, intercept_);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) {
            if (!x.is_missing(i, j)) out[i] += weights_[j] * (x.at(i, j) - means_[j]) / stds_[j];
        }
    }
    return out;
}

std::vector<double> LinearModel::predict_proba(const Cohort& rows) const {
    auto m = predict_margin(rows);
    for (auto& v : m) v = sigmoid(v);
    return m;
}

double l1_critical_strength(const Cohort& train) {
    const auto labels = train.labels();
    std::vector<double> means;
    std::vector<double> stds;
    column_moments(train, means, stds);
    const auto s = standardize(align_features(train, train.schema().names()), means, stds);
    const double ybar = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(labels.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < s.p; ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) c += s.x[i * s.p + j] * (labels[i] - ybar);
        worst = std::max(worst, std::abs(c) / static_cast<double>(s.n));
    }
    return worst;
}

LinearModel fit_logistic(const Cohort& train, Penalty penalty, double strength, int max_iter, double tol) {
    if (!(strength >= 0.0) || max_iter < 1 || !(tol > 0.0)) {
        throw ConfigError("logistic regression needs strength >= 0, max_iter >= 1, tol > 0");
    }
    const auto labels = train.labels();
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
        throw ClassError("logistic regression needs both outcome classes");
    }
    LinearModel model;
    model.feature_names_ = train.schema().names();
    model.penalty_ = penalty;
    model.strength_ = penalty == Penalty::none ? 0.0 : strength;
    column_moments(train, model.means_, model.stds_);
    const auto data = standardize(align_features(train, model.feature_names_), model.means_, model.stds_);
    Problem problem(data, labels, penalty, model.strength_);

    const std::size_t dim = problem.dim();
    std::vector<double> x(dim, 0.0);
    std::vector<double> y = x;
    std::vector<double> z(dim);
    std::vector<double> grad;
    double objective_x = problem.loss(x, nullptr) + problem.penalty(x);
    double momentum = 1.0;
    double lipschitz = 1.0;
    bool converged = false;
    bool restarted = false;
    int it = 0;
    for (; it < max_iter && !converged; ++it) {
        const double loss_y = problem.loss(y, &grad);
        double loss_z = 0.0;
        for (;;) {
            for (std::size_t k = 0; k < dim; ++k) z[k] = y[k] - grad[k] / lipschitz;
            problem.prox(z, 1.0 / lipschitz);
            loss_z = problem.loss(z, nullptr);
            double linear = 0.0;
            double dist2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = z[k] - y[k];
                linear += grad[k] * d;
                dist2 += d * d;
            }
            if (loss_z <= loss_y + linear + 0.5 * lipschitz * dist2 + 1e-15 * std::abs(loss_y)) break;
            lipschitz *= 2.0;
        }
        const double objective_z = loss_z + problem.penalty(z);
        if (objective_z > objective_x) {
            // Restart momentum; the next step is a plain proximal gradient
            // step from x, which cannot increase the objective. If that step
            // still does, x is optimal up to rounding.
            if (restarted) {
                converged = true;
                continue;
            }
            restarted = true;
            momentum = 1.0;
            y = x;
            continue;
        }
        restarted = false;
        double change = 0.0;
        for (std::size_t k = 0; k < dim; ++k) change = std::max(change, std::abs(z[k] - x[k]));
        const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        for (std::size_t k = 0; k < dim; ++k) y[k] = z[k] + ((momentum - 1.0) / next) * (z[k] - x[k]);
        momentum = next;
        x = z;
        objective_x = objective_z;
        converged = change < tol;
        lipschitz = std::max(lipschitz * 0.9, 1e-8);
    }
    model.weights_.assign(x.begin(), x.end() - 1);
    model.intercept_ = x.back();
    model.converged_ = converged;
    model.iterations_ = it;
    model.objective_ = objective_x;
    return model;
}

double logistic_objective(const LinearModel& model, const Cohort& data) {
    const auto labels = data.labels();
    const auto margins = model.predict_margin(data);
    double pen = 0.0;
    for (double w : model.weights()) {
        pen += model.penalty() == Penalty::l1 ? std::abs(w) : 0.5 * w * w;
    }
    return logistic_loss(margins, labels) + (model.penalty() == Penalty::none ? 0.0 : model.strength() * pen);
}

nlohmann::json LinearModel::to_json() const {
    return {{"kind", std::string(kind())},
            {"feature_names", feature_names_},
            {"penalty", to_string(penalty_)},
            {"strength", strength_},
            {"weights", weights_},
            {"intercept", intercept_},
            {"means", means_},
            {"stds", stds_},
            {"converged", converged_},
            {"iterations", iterations_},
            {"objective", objective_}};
}

LinearModel LinearModel::from_json(const nlohmann::json& doc) {
    LinearModel m;
    m.feature_names_ = doc.at("feature_names").get<std::vector<std::string>>();
    m.penalty_ = penalty_from_string(doc.at("penalty").get<std::string>());
    m.strength_ = doc.at("strength").get<double>();
    m.weights_ = doc.at("weights").get<std::vector<double>>();
    m.intercept_ = doc.at("intercept").get<double>();
    m.means_ = doc.at("means").get<std::vector<double>>();
    m.stds_ = doc.at("stds").get<std::vector<double>>();
    m.converged_ = doc.at("converged").get<bool>();
    m.iterations_ = doc.at("iterations").get<int>();
    m.objective_ = doc.at("objective").get<double>();
    if (m.weights_.size() != m.feature_names_.size() || m.means_.size() != m.weights_.size() ||
        m.stds_.size() != m.weights_.size()) {
        throw ConfigError("logistic model document has inconsistent vector lengths");
    }
    return m;
}

}  // namespace hfrisk
