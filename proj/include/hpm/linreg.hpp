#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpm/csv.hpp"
#include "hpm/dataset.hpp"
#include "hpm/errors.hpp"
#include "hpm/rng.hpp"

namespace hpm {

struct LinearCoefficients {
    bool has_intercept = false;
    double intercept = 0.0;
    double intercept_se = 0.0;
    std::vector<std::string> feature_names;
    std::vector<double> beta;
    std::vector<double> beta_se; // empty when SEs were not computed

    double predict(const double* x) const {
        double v = has_intercept ? intercept : 0.0;
        for (size_t j = 0; j < beta.size(); ++j) v += beta[j] * x[j];
        return v;
    }

    std::vector<double> predict_rows(const CountryDataset& d) const {
        std::vector<double> out(d.rows());
        for (size_t i = 0; i < d.rows(); ++i) out[i] = predict(d.row(i));
        return out;
    }
};

namespace detail {

inline Eigen::MatrixXd design_matrix(const CountryDataset& d, bool intercept) {
    Eigen::MatrixXd X(d.rows(), d.cols() + (intercept ? 1 : 0));
    for (size_t i = 0; i < d.rows(); ++i) {
        size_t c = 0;
        if (intercept) X(Eigen::Index(i), Eigen::Index(c++)) = 1.0;
        for (size_t j = 0; j < d.cols(); ++j) X(Eigen::Index(i), Eigen::Index(c + j)) = d.row(i)[j];
    }
    return X;
}

// Column-pivoted QR solve; rank deficiency is reported with the offending
// column names rather than silently producing a minimum-norm solution.
inline Eigen::VectorXd qr_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const std::vector<std::string>& names) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        std::string cols;
        auto perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < X.cols(); ++i) {
            if (!cols.empty()) cols += ", ";
            Eigen::Index orig = perm(i);
            cols += orig < Eigen::Index(names.size()) ? names[size_t(orig)] : "col" + std::to_string(orig);
        }
        throw NumericError("design matrix is rank deficient (collinear: " + cols + ")");
    }
    return qr.solve(y);
}

} // namespace detail

// Straight inversion of the linear map, no intercept: solves min ||X b - y||
// by orthogonal decomposition. Residuals are orthogonal to every regressor.
inline LinearCoefficients linear_inversion(const CountryDataset& d) {
    if (d.rows() <= d.cols()) throw DataError(d.country + ": need more rows than features for inversion");
    Eigen::MatrixXd X = detail::design_matrix(d, false);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(d.y.data(), Eigen::Index(d.y.size()));
    Eigen::VectorXd b = detail::qr_solve(X, y, d.feature_names);
    LinearCoefficients out;
    out.has_intercept = false;
    out.feature_names = d.feature_names;
    out.beta.assign(b.data(), b.data() + b.size());
    return out;
}

// Gaussian linear model: intercept plus features, with coefficient standard
// errors from sigma^2 (X'X)^-1 (residual variance uses n - p degrees of
// freedom).
inline LinearCoefficients fit_glm(const CountryDataset& d) {
    size_t n = d.rows(), p = d.cols() + 1;
    if (n <= p) throw DataError(d.country + ": need more rows than coefficients for GLM");
    Eigen::MatrixXd X = detail::design_matrix(d, true);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(d.y.data(), Eigen::Index(d.y.size()));
    std::vector<std::string> names = d.feature_names;
    names.insert(names.begin(), "(intercept)");
    Eigen::VectorXd b = detail::qr_solve(X, y, names);

    Eigen::VectorXd resid = y - X * b;
    double sigma2 = resid.squaredNorm() / double(n - p);
    Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();

    LinearCoefficients out;
    out.has_intercept = true;
    out.intercept = b(0);
    out.intercept_se = std::sqrt(sigma2 * xtx_inv(0, 0));
    out.feature_names = d.feature_names;
    for (size_t j = 1; j < p; ++j) {
        out.beta.push_back(b(Eigen::Index(j)));
        out.beta_se.push_back(std::sqrt(sigma2 * xtx_inv(Eigen::Index(j), Eigen::Index(j))));
    }
    return out;
}

struct PerturbedGlmResult {
    LinearCoefficients base; // unperturbed fit
    double intercept_mean = 0.0, intercept_sd = 0.0;
    std::vector<double> beta_mean, beta_sd;
    // Per-quarter envelope of the perturbed fitted paths (band across runs).
    std::vector<double> fit_lo, fit_hi, fit_mean;
};

// Input-noise robustness: every feature cell is multiplied by (1 + eps), eps
// drawn per cell from N(0, amplitude/3) truncated at +/- amplitude, and the
// GLM refit. Reported means/SDs are across runs; run r uses seed base_seed+r.
inline PerturbedGlmResult perturbed_glm_ensemble(const CountryDataset& d, int runs, uint64_t base_seed,
                                                 double amplitude = 0.10) {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (!(amplitude > 0.0)) throw ConfigError("amplitude must be positive");
    PerturbedGlmResult out;
    out.base = fit_glm(d);
    size_t p = d.cols(), n = d.rows();

    std::vector<double> intercepts(static_cast<size_t>(runs));
    std::vector<std::vector<double>> betas(static_cast<size_t>(runs));
    out.fit_lo.assign(n, std::numeric_limits<double>::infinity());
    out.fit_hi.assign(n, -std::numeric_limits<double>::infinity());
    out.fit_mean.assign(n, 0.0);

    CountryDataset work = d;
    for (int r = 0; r < runs; ++r) {
        Rng rng(base_seed + uint64_t(r));
        for (size_t i = 0; i < n * p; ++i)
            work.x[i] = d.x[i] * (1.0 + rng.truncated_normal(amplitude / 3.0, amplitude));
        LinearCoefficients fit = fit_glm(work);
        intercepts[size_t(r)] = fit.intercept;
        betas[size_t(r)] = fit.beta;
        auto pred = fit.predict_rows(work);
        for (size_t i = 0; i < n; ++i) {
            out.fit_lo[i] = std::min(out.fit_lo[i], pred[i]);
            out.fit_hi[i] = std::max(out.fit_hi[i], pred[i]);
            out.fit_mean[i] += pred[i] / double(runs);
        }
    }

    auto mean_sd = [&](auto get) {
        double m = 0.0;
        for (int r = 0; r < runs; ++r) m += get(size_t(r));
        m /= double(runs);
        double v = 0.0;
        for (int r = 0; r < runs; ++r) {
            double z = get(size_t(r)) - m;
            v += z * z;
        }
        return std::pair<double, double>{m, std::sqrt(v / double(runs))};
    };
    auto [im, isd] = mean_sd([&](size_t r) { return intercepts[r]; });
    out.intercept_mean = im;
    out.intercept_sd = isd;
    for (size_t j = 0; j < p; ++j) {
        auto [bm, bsd] = mean_sd([&](size_t r) { return betas[r][j]; });
        out.beta_mean.push_back(bm);
        out.beta_sd.push_back(bsd);
    }
    return out;
}

inline std::string coefficients_csv(const LinearCoefficients& c) {
    CsvBuilder b;
    b.raw("term").raw("estimate").raw("se").end_row();
    if (c.has_intercept) b.raw("(intercept)").num(c.intercept).num(c.intercept_se).end_row();
    for (size_t j = 0; j < c.beta.size(); ++j) {
        b.raw(c.feature_names[j]).num(c.beta[j]);
        b.num(c.beta_se.empty() ? std::numeric_limits<double>::quiet_NaN() : c.beta_se[j]);
        b.end_row();
    }
    return b.text;
}

} // namespace hpm
