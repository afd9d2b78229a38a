#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hpm/dataset.hpp"
#include "hpm/errors.hpp"
#include "hpm/metrics.hpp"
#include "hpm/rng.hpp"

namespace hpm {

inline constexpr size_t kMinPanelRows = 40;

// Repeated k-fold configuration. Fold assignment shuffles row indices with the
// given seed and deals them round-robin, so folds are balanced within one row.
struct CvConfig {
    int folds = 10;
    int repeats = 3;
    uint64_t seed = 0;
};

inline std::vector<std::vector<size_t>> cv_folds(size_t n, int folds, Rng& rng) {
    if (folds < 2) throw ConfigError("cross-validation requires at least 2 folds");
    if (size_t(folds) > n) throw ConfigError("more folds than rows");
    auto perm = rng.permutation(n);
    std::vector<std::vector<size_t>> out(static_cast<size_t>(folds));
    for (size_t i = 0; i < n; ++i) out[i % size_t(folds)].push_back(perm[i]);
    return out;
}

// Per-feature z-score parameters, estimated once from the training panel
// (sample standard deviation, n-1). Constant features cannot be standardized
// and are rejected by name.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> sd;

    static Scaler fit(const CountryDataset& d) {
        Scaler s;
        size_t n = d.rows(), p = d.cols();
        if (n < 2) throw DataError("scaler requires at least 2 rows");
        s.mean.resize(p);
        s.sd.resize(p);
        for (size_t j = 0; j < p; ++j) {
            double m = 0.0;
            for (size_t i = 0; i < n; ++i) m += d.row(i)[j];
            m /= double(n);
            double v = 0.0;
            for (size_t i = 0; i < n; ++i) {
                double z = d.row(i)[j] - m;
                v += z * z;
            }
            v /= double(n - 1);
            if (v == 0.0)
                throw NumericError(d.country + ": feature " + d.feature_names[j] +
                                   " is constant and cannot be standardized");
            s.mean[j] = m;
            s.sd[j] = std::sqrt(v);
        }
        return s;
    }

    void apply(const double* in, double* out, size_t p) const {
        for (size_t j = 0; j < p; ++j) out[j] = (in[j] - mean[j]) / sd[j];
    }
};

struct KnnCvPoint {
    int k = 0;
    double cv_rmse = 0.0;
};

// Unweighted k-nearest-neighbour regression over z-scored features with
// Euclidean distance. Distance ties resolve to the lower training-row index,
// making predictions fully deterministic.
struct KnnModel {
    int k = 1;
    Scaler scaler;
    std::vector<std::string> feature_names;
    std::vector<double> train_x; // standardized, row-major
    std::vector<double> train_y;
    size_t n_features = 0;
    std::vector<KnnCvPoint> cv_table; // CV RMSE per candidate k
    double cv_r2 = 0.0;               // squared correlation of held-out predictions, chosen k

    size_t train_rows() const { return train_y.size(); }

    double predict(const double* x) const {
        std::vector<double> q(n_features);
        scaler.apply(x, q.data(), n_features);
        return predict_standardized(q.data());
    }

    double predict_standardized(const double* q) const {
        size_t n = train_rows();
        std::vector<std::pair<double, size_t>> dist(n);
        for (size_t i = 0; i < n; ++i) {
            const double* r = train_x.data() + i * n_features;
            double s = 0.0;
            for (size_t j = 0; j < n_features; ++j) {
                double dlt = q[j] - r[j];
                s += dlt * dlt;
            }
            dist[i] = {s, i};
        }
        size_t kk = std::min(size_t(k), n);
        std::partial_sort(dist.begin(), dist.begin() + ptrdiff_t(kk), dist.end());
        double sum = 0.0;
        for (size_t i = 0; i < kk; ++i) sum += train_y[dist[i].second];
        return sum / double(kk);
    }

    std::vector<double> predict_rows(const CountryDataset& d) const {
        std::vector<double> out(d.rows());
        for (size_t i = 0; i < d.rows(); ++i) out[i] = predict(d.row(i));
        return out;
    }
};

namespace detail {

// Mean over neighbours drawn from a row subset (training side of one fold).
inline double knn_predict_subset(const std::vector<double>& x, const std::vector<double>& y,
                                 size_t p, const std::vector<size_t>& rows, const double* q, int k) {
    std::vector<std::pair<double, size_t>> dist;
    dist.reserve(rows.size());
    for (size_t i : rows) {
        const double* r = x.data() + i * p;
        double s = 0.0;
        for (size_t j = 0; j < p; ++j) {
            double d = q[j] - r[j];
            s += d * d;
        }
        dist.emplace_back(s, i);
    }
    size_t kk = std::min(size_t(k), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + ptrdiff_t(kk), dist.end());
    double sum = 0.0;
    for (size_t i = 0; i < kk; ++i) sum += y[dist[i].second];
    return sum / double(kk);
}

} // namespace detail

// Select k by repeated cross-validation (mean RMSE over folds x repeats; ties
// resolve to the smaller k), then fit on the full panel. The panel is z-scored
// once with full-sample statistics before fold evaluation.
inline KnnModel train_knn(const CountryDataset& d, const CvConfig& cv,
                          const std::vector<int>& k_grid = {3, 5, 7, 9, 11},
                          size_t min_rows = kMinPanelRows) {
    size_t n = d.rows(), p = d.cols();
    if (n < min_rows)
        throw DataError(d.country + "/" + d.spec_name + ": panel has " + std::to_string(n) +
                        " rows, need at least " + std::to_string(min_rows));
    if (k_grid.empty()) throw ConfigError("empty k grid");
    if (cv.repeats < 1) throw ConfigError("cross-validation repeats must be >= 1");
    std::vector<int> grid = k_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    KnnModel m;
    m.scaler = Scaler::fit(d);
    m.feature_names = d.feature_names;
    m.n_features = p;
    m.train_x.resize(n * p);
    for (size_t i = 0; i < n; ++i) m.scaler.apply(d.row(i), m.train_x.data() + i * p, p);
    m.train_y = d.y;

    size_t smallest_train_fold = n - (n + size_t(cv.folds) - 1) / size_t(cv.folds);
    for (int k : grid) {
        if (k < 1) throw ConfigError("k must be positive");
        if (size_t(k) > smallest_train_fold)
            throw ConfigError("k=" + std::to_string(k) + " exceeds smallest training fold size " +
                              std::to_string(smallest_train_fold));
    }

    Rng rng(cv.seed);
    std::vector<double> fold_rmse(grid.size(), 0.0);
    int cells = 0;
    // Held-out predictions are tracked per candidate k; cv_r2 is the squared
    // correlation between the last repeat's held-out predictions and the
    // targets for the chosen k (each repeat covers every row exactly once).
    std::vector<std::vector<double>> heldout_pred(grid.size(), std::vector<double>(n, 0.0));
    std::vector<double> heldout_obs(n, 0.0);
    for (int rep = 0; rep < cv.repeats; ++rep) {
        auto folds = cv_folds(n, cv.folds, rng);
        for (const auto& test_fold : folds) {
            std::vector<char> in_test(n, 0);
            for (size_t i : test_fold) in_test[i] = 1;
            std::vector<size_t> train_rows;
            train_rows.reserve(n - test_fold.size());
            for (size_t i = 0; i < n; ++i)
                if (!in_test[i]) train_rows.push_back(i);
            for (size_t gi = 0; gi < grid.size(); ++gi) {
                double sse = 0.0;
                for (size_t i : test_fold) {
                    double pred = detail::knn_predict_subset(m.train_x, m.train_y, p, train_rows,
                                                             m.train_x.data() + i * p, grid[gi]);
                    sse += (pred - m.train_y[i]) * (pred - m.train_y[i]);
                    heldout_pred[gi][i] = pred;
                    if (gi == 0) heldout_obs[i] = m.train_y[i];
                }
                fold_rmse[gi] += std::sqrt(sse / double(test_fold.size()));
            }
            ++cells;
        }
    }

    size_t best = 0;
    m.cv_table.clear();
    for (size_t gi = 0; gi < grid.size(); ++gi) {
        double r = fold_rmse[gi] / double(cells);
        m.cv_table.push_back({grid[gi], r});
        if (m.cv_table[gi].cv_rmse < m.cv_table[best].cv_rmse) best = gi;
    }
    m.k = grid[best];
    double c = pearson(heldout_pred[best], heldout_obs);
    m.cv_r2 = std::isnan(c) ? 0.0 : c * c;
    return m;
}

} // namespace hpm
