#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpm/errors.hpp"

namespace hpm {

enum class AdfRegression { CONST, CONST_TREND };

struct AdfResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int lags = 0;
    long nobs = 0; // rows entering the regression
    AdfRegression regression = AdfRegression::CONST;
};

namespace detail {

// Response-surface constants for the unit-root t-distribution critical values
// (constant-only and constant+trend variants): crit = b0 + b1/T + b2/T^2 at
// the 1/5/10 percent levels.
struct AdfSurface {
    double p;
    double b0, b1, b2;
};

inline const AdfSurface* adf_surface(AdfRegression reg) {
    static const AdfSurface with_const[3] = {
        {0.01, -3.43035, -6.5393, -16.786},
        {0.05, -2.86154, -2.8903, -4.234},
        {0.10, -2.56677, -1.5384, -2.809},
    };
    static const AdfSurface with_trend[3] = {
        {0.01, -3.95877, -9.0531, -28.428},
        {0.05, -3.41049, -4.3904, -9.036},
        {0.10, -3.12705, -2.5856, -3.925},
    };
    return reg == AdfRegression::CONST ? with_const : with_trend;
}

// Piecewise-linear statistic -> p mapping through the three tabulated points,
// extended with the adjacent segment's slope and clamped to [0.01, 0.99].
inline double adf_p_value(double stat, AdfRegression reg, long T) {
    const AdfSurface* s = adf_surface(reg);
    double crit[3];
    for (int i = 0; i < 3; ++i) crit[i] = s[i].b0 + s[i].b1 / double(T) + s[i].b2 / double(T * T);
    double p;
    if (stat <= crit[1]) {
        double slope = (s[1].p - s[0].p) / (crit[1] - crit[0]);
        p = s[0].p + slope * (stat - crit[0]);
    } else {
        double slope = (s[2].p - s[1].p) / (crit[2] - crit[1]);
        p = s[1].p + slope * (stat - crit[1]);
    }
    return std::clamp(p, 0.01, 0.99);
}

} // namespace detail

// Augmented Dickey-Fuller: regress dy_t on [const (, trend), y_{t-1},
// dy_{t-1}..dy_{t-L}] and report the t-ratio of the y_{t-1} coefficient.
// Default lag length follows the short Schwert rule floor(4*(n/100)^(1/4)).
inline AdfResult adf_test(const std::vector<double>& y, AdfRegression reg = AdfRegression::CONST,
                          int lags = -1) {
    const long n = long(y.size());
    if (n < 20) throw DataError("ADF: series too short (" + std::to_string(n) + " points, need 20)");
    if (lags < 0) lags = int(std::floor(4.0 * std::pow(double(n) / 100.0, 0.25)));
    const long L = lags;
    const long T = n - 1 - L; // usable regression rows
    const bool with_t = reg == AdfRegression::CONST_TREND;
    const long k = (with_t ? 2 : 1) + 1 + L;
    if (T <= k + 1)
        throw DataError("ADF: series too short (" + std::to_string(n) + " points, " + std::to_string(L) +
                        " lags)");

    Eigen::MatrixXd X(T, k);
    Eigen::VectorXd dy(T);
    for (long i = 0; i < T; ++i) {
        long t = i + L + 1; // index into y
        dy(i) = y[size_t(t)] - y[size_t(t - 1)];
        long col = 0;
        X(i, col++) = 1.0;
        if (with_t) X(i, col++) = double(t);
        X(i, col++) = y[size_t(t - 1)];
        for (long l = 1; l <= L; ++l) X(i, col++) = y[size_t(t - l)] - y[size_t(t - l - 1)];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k) throw NumericError("ADF: regression design is rank deficient (constant series?)");
    Eigen::VectorXd b = qr.solve(dy);
    Eigen::VectorXd resid = dy - X * b;
    double sigma2 = resid.squaredNorm() / double(T - k);
    Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    long gamma_col = with_t ? 2 : 1;
    double se = std::sqrt(sigma2 * xtx_inv(gamma_col, gamma_col));
    if (!(se > 0.0)) throw NumericError("ADF: zero standard error");

    AdfResult r;
    r.statistic = b(gamma_col) / se;
    r.p_value = detail::adf_p_value(r.statistic, reg, T);
    r.lags = int(L);
    r.nobs = T;
    r.regression = reg;
    return r;
}

} // namespace hpm
