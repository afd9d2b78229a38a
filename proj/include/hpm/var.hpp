#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpm/errors.hpp"

namespace hpm {

enum class Deterministic { CONST, TREND, BOTH };

inline std::string to_string(Deterministic d) {
    switch (d) {
        case Deterministic::CONST: return "CONST";
        case Deterministic::TREND: return "TREND";
        case Deterministic::BOTH: return "BOTH";
    }
    return "?";
}

// Vector autoregression fit by per-equation least squares on a shared design
// matrix (column-pivoted QR). Time is coded as the 0-based row index of the
// training panel; forecasts continue that index.
struct VarModel {
    std::vector<std::string> names;
    int p = 2;
    Deterministic det = Deterministic::CONST;
    Eigen::VectorXd c;                 // constant term (zero when absent)
    Eigen::VectorXd trend;             // trend slope (zero when absent)
    std::vector<Eigen::MatrixXd> lags; // A_1..A_p, each d x d
    Eigen::MatrixXd sigma;             // innovation covariance
    Eigen::MatrixXd tail;              // last p panel rows, oldest first
    long n_rows = 0;                   // training panel length (time origin for forecasts)

    size_t dim() const { return names.size(); }
};

enum class ForecastMode { ITERATED, CONDITIONAL };

struct VarForecast {
    Eigen::MatrixXd point; // horizon x d
    Eigen::MatrixXd se;    // horizon x d (conditional mode: only target column nonzero)
};

inline VarModel fit_var(const std::vector<std::string>& names, const Eigen::MatrixXd& panel, int p,
                        Deterministic det) {
    if (p < 1) throw ConfigError("VAR order must be >= 1");
    const long n = panel.rows();
    const long d = panel.cols();
    if (size_t(d) != names.size()) throw ConfigError("panel width and name count differ");
    const bool with_c = det != Deterministic::TREND;
    const bool with_t = det != Deterministic::CONST;
    const long k = (with_c ? 1 : 0) + (with_t ? 1 : 0) + p * d;
    if (n - p <= k + 1)
        throw DataError("VAR panel too short: " + std::to_string(n) + " rows for " + std::to_string(k) +
                        " parameters per equation");

    const long T = n - p;
    Eigen::MatrixXd X(T, k);
    Eigen::MatrixXd Y(T, d);
    for (long t = 0; t < T; ++t) {
        long row = t + p;
        long col = 0;
        if (with_c) X(t, col++) = 1.0;
        if (with_t) X(t, col++) = double(row);
        for (int l = 1; l <= p; ++l)
            for (long j = 0; j < d; ++j) X(t, col++) = panel(row - l, j);
        Y.row(t) = panel.row(row);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k) {
        std::string cols;
        auto perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < k; ++i) {
            if (!cols.empty()) cols += ", ";
            long orig = perm(i);
            long det_cols = (with_c ? 1 : 0) + (with_t ? 1 : 0);
            if (orig < det_cols) {
                cols += (with_c && orig == 0) ? "const" : "trend";
            } else {
                long rel = orig - det_cols;
                cols += names[size_t(rel % d)] + ".l" + std::to_string(rel / d + 1);
            }
        }
        throw NumericError("VAR design matrix is rank deficient (collinear: " + cols + ")");
    }
    Eigen::MatrixXd B = qr.solve(Y); // k x d

    VarModel m;
    m.names = names;
    m.p = p;
    m.det = det;
    m.c = Eigen::VectorXd::Zero(d);
    m.trend = Eigen::VectorXd::Zero(d);
    long col = 0;
    if (with_c) m.c = B.row(col++).transpose();
    if (with_t) m.trend = B.row(col++).transpose();
    // lags[l-1](i, j): effect of variable j at lag l on equation i.
    m.lags.assign(size_t(p), Eigen::MatrixXd(d, d));
    for (int l = 1; l <= p; ++l)
        for (long j = 0; j < d; ++j) m.lags[size_t(l - 1)].col(j) = B.row(col++).transpose();

    Eigen::MatrixXd resid = Y - X * B;
    m.sigma = resid.transpose() * resid / double(T - k);
    m.tail = panel.bottomRows(p);
    m.n_rows = n;
    return m;
}

namespace detail {

inline Eigen::VectorXd var_step(const VarModel& m, const std::vector<Eigen::VectorXd>& history,
                                long time_index) {
    Eigen::VectorXd z = m.c + m.trend * double(time_index);
    for (int l = 1; l <= m.p; ++l) z += m.lags[size_t(l - 1)] * history[history.size() - size_t(l)];
    return z;
}

} // namespace detail

// ITERATED: every variable forecast recursively; standard errors from the MSE
// recursion sum_{i<h} Psi_i Sigma Psi_i'. CONDITIONAL: only the target
// equation is forecast, all other variables are taken from exogenous_future
// (observed paths); the SE accumulates the target equation's own-lag error
// propagation, i.e. the impulse response of the univariate error recursion.
inline VarForecast forecast_var(const VarModel& m, int horizon, ForecastMode mode,
                                const Eigen::MatrixXd& exogenous_future = {}, long target = 0) {
    const long d = long(m.dim());
    if (horizon < 0) throw ConfigError("negative horizon");
    VarForecast f;
    f.point.resize(horizon, d);
    f.se.resize(horizon, d);
    if (horizon == 0) return f;

    std::vector<Eigen::VectorXd> hist;
    for (long i = 0; i < m.p; ++i) hist.push_back(m.tail.row(i).transpose());

    if (mode == ForecastMode::ITERATED) {
        // Psi recursion for the MSE of recursive forecasts.
        std::vector<Eigen::MatrixXd> psi{Eigen::MatrixXd::Identity(d, d)};
        Eigen::MatrixXd mse = Eigen::MatrixXd::Zero(d, d);
        for (int h = 0; h < horizon; ++h) {
            Eigen::VectorXd z = detail::var_step(m, hist, m.n_rows + h);
            f.point.row(h) = z.transpose();
            hist.push_back(z);
            mse += psi[size_t(h)] * m.sigma * psi[size_t(h)].transpose();
            for (long j = 0; j < d; ++j) f.se(h, j) = std::sqrt(mse(j, j));
            Eigen::MatrixXd next = Eigen::MatrixXd::Zero(d, d);
            for (int l = 1; l <= m.p && l <= h + 1; ++l)
                next += m.lags[size_t(l - 1)] * psi[size_t(h + 1 - l)];
            psi.push_back(next);
        }
        return f;
    }

    if (exogenous_future.rows() < horizon || exogenous_future.cols() != d)
        throw ConfigError("conditional forecast needs exogenous_future with horizon rows and panel width");
    if (target < 0 || target >= d) throw ConfigError("target index out of range");

    // Impulse weights of the target equation's own-lag recursion.
    std::vector<double> a(static_cast<size_t>(m.p));
    for (int l = 1; l <= m.p; ++l) a[size_t(l - 1)] = m.lags[size_t(l - 1)](target, target);
    std::vector<double> psi{1.0};
    double sig2 = m.sigma(target, target);
    f.se.setZero();
    for (int h = 0; h < horizon; ++h) {
        Eigen::VectorXd z = exogenous_future.row(h).transpose();
        Eigen::VectorXd pred = detail::var_step(m, hist, m.n_rows + h);
        z(target) = pred(target);
        f.point.row(h) = z.transpose();
        hist.push_back(z);
        double v = 0.0;
        for (int i = 0; i <= h; ++i) v += psi[size_t(i)] * psi[size_t(i)];
        f.se(h, target) = std::sqrt(sig2 * v);
        double next = 0.0;
        for (int l = 1; l <= m.p && l <= h + 1; ++l) next += a[size_t(l - 1)] * psi[size_t(h + 1 - l)];
        psi.push_back(next);
    }
    return f;
}

} // namespace hpm
