#include <algorithm>
#include <cmath>

#include "hfrisk/baselines.hpp"
#include "hfrisk/error.hpp"

namespace hfrisk {

KnnModel fit_knn(const Cohort& train, int k) {
    if (k < 1 || k % 2 == 0) {
        throw ConfigError("k must be a positive odd integer");
    }
    if (static_cast<std::size_t>(k) > train.rows()) {
        throw ConfigError("k = " + std::to_string(k) + " exceeds the training size " + std::to_string(train.rows()));
    }
    KnnModel model;
    model.feature_names_ = train.schema().names();
    model.k_ = k;
    model.labels_ = train.labels();
    const auto x = align_features(train, model.feature_names_);
    model.means_.assign(x.cols, 0.0);
    model.stds_.assign(x.cols, 1.0);
    for (std::size_t j = 0; j < x.cols; ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            if (!x.is_missing(i, j)) {
                sum += x.at(i, j);
                ++count;
            }
        }
        if (count == 0) continue;
        const double mean = sum / static_cast<double>(count);
        double ss = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            if (!x.is_missing(i, j)) ss += (x.at(i, j) - mean) * (x.at(i, j) - mean);
        }
        const double sd = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
        model.means_[j] = mean;
        model.stds_[j] = sd > 0.0 ? sd : 1.0;
    }
    model.train_.resize(x.rows * x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) {
            model.train_[i * x.cols + j] =
                x.is_missing(i, j) ? 0.0 : (x.at(i, j) - model.means_[j]) / model.stds_[j];
        }
    }
    return model;
}

std::vector<double> KnnModel::predict_proba(const Cohort& rows) const {
    const auto x = align_features(rows, feature_names_);
    const std::size_t p = x.cols;
    const std::size_t n_train = labels_.size();
    const auto k = static_cast<std::size_t>(k_);
    std::vector<double> out(x.rows);
    std::vector<double> query(p);
    std::vector<std::pair<double, std::size_t>> dist(n_train);
    for (std::size_t q = 0; q < x.rows; ++q) {
        for (std::size_t j = 0; j < p; ++j) {
            query[j] = x.is_missing(q, j) ? 0.0 : (x.at(q, j) - means_[j]) / stds_[j];
        }
        for (std::size_t i = 0; i < n_train; ++i) {
            const double* row = train_.data() + i * p;
            double d2 = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double d = row[j] - query[j];
                d2 += d * d;
            }
            dist[i] = {d2, i};
        }
        // Pair ordering breaks distance ties by lower training index.
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
        std::size_t positives = 0;
        for (std::size_t i = 0; i < k; ++i) positives += static_cast<std::size_t>(labels_[dist[i].second]);
        out[q] = static_cast<double>(positives) / static_cast<double>(k);
    }
    return out;
}

nlohmann::json KnnModel::to_json() const {
    return {{"kind", std::string(kind())},
            {"feature_names", feature_names_},
            {"k", k_},
            {"means", means_},
            {"stds", stds_},
            {"train", train_},
            {"labels", labels_}};
}

KnnModel KnnModel::from_json(const nlohmann::json& doc) {
    KnnModel m;
    m.feature_names_ = doc.at("feature_names").get<std::vector<std::string>>();
    m.k_ = doc.at("k").get<int>();
    m.means_ = doc.at("means").get<std::vector<double>>();
    m.stds_ = doc.at("stds").get<std::vector<double>>();
    m.train_ = doc.at("train").get<std::vector<double>>();
    m.labels_ = doc.at("labels").get<std::vector<int>>();
    if (m.train_.size() != m.labels_.size() * m.feature_names_.size()) {
        throw ConfigError("knn model document has inconsistent matrix size");
    }
    return m;
}

}  // namespace hfrisk
