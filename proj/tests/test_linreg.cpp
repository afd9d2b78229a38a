#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpm/linreg.hpp"
#include "hpm/rng.hpp"

#include "test_util.hpp"

using namespace hpm;
using hpm::test::make_dataset;

namespace {

CountryDataset make_panel(const std::vector<std::vector<double>>& rows,
                          const std::vector<double>& y) {
    CountryDataset d;
    d.country = "PNL";
    d.spec_name = "panel";
    d.target_name = "y";
    size_t p = rows.empty() ? 0 : rows[0].size();
    for (size_t j = 0; j < p; ++j) d.feature_names.push_back(std::string(1, char('a' + j)));
    Quarter q{2000, 1};
    for (size_t i = 0; i < rows.size(); ++i) {
        d.quarters.push_back(q);
        q = q.next();
        d.x.insert(d.x.end(), rows[i].begin(), rows[i].end());
        d.y.push_back(y[i]);
    }
    return d;
}

struct NormalEqFit {
    Eigen::VectorXd b;
    Eigen::VectorXd se;
};

// Normal equations (X'X)^-1 X'y: an algebraic route independent of the
// pivoted QR used by the library.
NormalEqFit normal_equations(const CountryDataset& d, bool intercept) {
    size_t n = d.rows(), p = d.cols() + (intercept ? 1 : 0);
    Eigen::MatrixXd X(n, p);
    for (size_t i = 0; i < n; ++i) {
        size_t c = 0;
        if (intercept) X(Eigen::Index(i), Eigen::Index(c++)) = 1.0;
        for (size_t j = 0; j < d.cols(); ++j) X(Eigen::Index(i), Eigen::Index(c + j)) = d.row(i)[j];
    }
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(d.y.data(), Eigen::Index(n));
    Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    NormalEqFit f;
    f.b = xtx_inv * X.transpose() * y;
    double sigma2 = (y - X * f.b).squaredNorm() / double(n - p);
    f.se = (sigma2 * xtx_inv.diagonal()).cwiseSqrt();
    return f;
}

} // namespace

TEST_CASE("pure proportionality is recovered exactly") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 1; i <= 20; ++i) {
        rows.push_back({double(i)});
        y.push_back(2.0 * i);
    }
    auto d = make_panel(rows, y);
    LinearCoefficients c = linear_inversion(d);
    REQUIRE_FALSE(c.has_intercept);
    REQUIRE(c.beta.size() == 1);
    REQUIRE(c.beta[0] == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(c.beta_se.empty());
    double x = 7.5;
    REQUIRE(c.predict(&x) == Catch::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("an exact affine relation is recovered with zero standard error") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 15; ++i) {
        rows.push_back({double(i)});
        y.push_back(3.0 + 2.0 * i);
    }
    auto d = make_panel(rows, y);
    LinearCoefficients c = fit_glm(d);
    REQUIRE(c.has_intercept);
    REQUIRE(c.intercept == Catch::Approx(3.0).margin(1e-10));
    REQUIRE(c.beta[0] == Catch::Approx(2.0).margin(1e-10));
    REQUIRE(c.intercept_se == Catch::Approx(0.0).margin(1e-6));
    REQUIRE(c.beta_se[0] == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("coefficients and standard errors match the normal equations") {
    Rng rng(404);
    for (int rep = 0; rep < 100; ++rep) {
        size_t p = 1 + rng.below(3);
        size_t n = p + 3 + rng.below(30);
        std::vector<std::vector<double>> rows(n, std::vector<double>(p));
        std::vector<double> y(n);
        for (auto& r : rows)
            for (auto& v : r) v = rng.normal();
        for (auto& v : y) v = rng.normal();
        auto d = make_panel(rows, y);

        LinearCoefficients li = linear_inversion(d);
        NormalEqFit oli = normal_equations(d, false);
        for (size_t j = 0; j < p; ++j)
            REQUIRE(li.beta[j] == Catch::Approx(oli.b(Eigen::Index(j))).margin(1e-8));

        LinearCoefficients glm = fit_glm(d);
        NormalEqFit oglm = normal_equations(d, true);
        REQUIRE(glm.intercept == Catch::Approx(oglm.b(0)).margin(1e-8));
        REQUIRE(glm.intercept_se == Catch::Approx(oglm.se(0)).margin(1e-8));
        for (size_t j = 0; j < p; ++j) {
            REQUIRE(glm.beta[j] == Catch::Approx(oglm.b(Eigen::Index(j + 1))).margin(1e-8));
            REQUIRE(glm.beta_se[j] == Catch::Approx(oglm.se(Eigen::Index(j + 1))).margin(1e-8));
        }
    }
}

TEST_CASE("residuals are orthogonal to the regressors") {
    auto d = make_dataset(40, 3, [](const std::vector<double>& r) { return r[0] - 2.0 * r[2]; },
                          77, 1.0);
    LinearCoefficients c = fit_glm(d);
    auto pred = c.predict_rows(d);
    double rsum = 0.0, rnorm = 0.0;
    std::vector<double> resid(d.rows());
    for (size_t i = 0; i < d.rows(); ++i) {
        resid[i] = d.y[i] - pred[i];
        rsum += resid[i];
        rnorm += resid[i] * resid[i];
    }
    rnorm = std::sqrt(rnorm);
    // Intercept column: residuals sum to zero.
    REQUIRE(rsum / rnorm == Catch::Approx(0.0).margin(1e-8));
    for (size_t j = 0; j < d.cols(); ++j) {
        double dot = 0.0, xnorm = 0.0;
        for (size_t i = 0; i < d.rows(); ++i) {
            dot += d.row(i)[j] * resid[i];
            xnorm += d.row(i)[j] * d.row(i)[j];
        }
        REQUIRE(dot / (std::sqrt(xnorm) * rnorm) == Catch::Approx(0.0).margin(1e-8));
    }
}

TEST_CASE("with centered features the intercept is the target mean") {
    Rng rng(5);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    std::vector<double> raw;
    for (int i = 0; i < 30; ++i) raw.push_back(rng.normal());
    double m = 0.0;
    for (double v : raw) m += v;
    m /= double(raw.size());
    for (int i = 0; i < 30; ++i) {
        rows.push_back({raw[size_t(i)] - m});
        y.push_back(10.0 + 0.5 * rows.back()[0] + rng.normal(0.0, 0.1));
    }
    auto d = make_panel(rows, y);
    LinearCoefficients c = fit_glm(d);
    double ymean = 0.0;
    for (double v : y) ymean += v;
    ymean /= double(y.size());
    REQUIRE(c.intercept == Catch::Approx(ymean).margin(1e-9));
}

TEST_CASE("collinear columns are rejected by name") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    Rng rng(8);
    for (int i = 0; i < 25; ++i) {
        double v = rng.normal();
        rows.push_back({v, v});
        y.push_back(rng.normal());
    }
    auto d = make_panel(rows, y);
    d.feature_names = {"alpha", "dup_alpha"};
    try {
        fit_glm(d);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("collinear") != std::string::npos);
        REQUIRE(msg.find("alpha") != std::string::npos);
    }
}

TEST_CASE("underdetermined panels are rejected") {
    auto square = make_panel({{1.0, 2.0}, {3.0, 4.0}}, {1.0, 2.0});
    REQUIRE_THROWS_AS(linear_inversion(square), DataError);
    auto three = make_panel({{1.0, 2.0}, {3.0, 4.0}, {5.0, 7.0}}, {1.0, 2.0, 3.0});
    REQUIRE_THROWS_AS(fit_glm(three), DataError);
}

TEST_CASE("input perturbation ensemble brackets the unperturbed fit") {
    auto d = make_dataset(60, 2,
                          [](const std::vector<double>& r) { return 5.0 + 2.0 * r[0] - r[1]; }, 19,
                          0.5);

    SECTION("vanishing amplitude reproduces the base fit") {
        PerturbedGlmResult res = perturbed_glm_ensemble(d, 10, 1, 1e-9);
        REQUIRE(res.intercept_mean == Catch::Approx(res.base.intercept).margin(1e-5));
        for (size_t j = 0; j < res.beta_mean.size(); ++j)
            REQUIRE(res.beta_mean[j] == Catch::Approx(res.base.beta[j]).margin(1e-5));
    }

    SECTION("single run is deterministic") {
        PerturbedGlmResult a = perturbed_glm_ensemble(d, 1, 42);
        PerturbedGlmResult b = perturbed_glm_ensemble(d, 1, 42);
        REQUIRE(a.intercept_mean == b.intercept_mean);
        REQUIRE(a.beta_mean == b.beta_mean);
        REQUIRE(a.fit_mean == b.fit_mean);
        REQUIRE(a.intercept_sd == 0.0);
    }

    SECTION("coefficient spread scales with the amplitude") {
        PerturbedGlmResult lo = perturbed_glm_ensemble(d, 300, 7, 0.05);
        PerturbedGlmResult mid = perturbed_glm_ensemble(d, 300, 7, 0.10);
        PerturbedGlmResult hi = perturbed_glm_ensemble(d, 300, 7, 0.20);
        for (size_t j = 0; j < lo.beta_sd.size(); ++j) {
            double r1 = mid.beta_sd[j] / lo.beta_sd[j];
            double r2 = hi.beta_sd[j] / mid.beta_sd[j];
            REQUIRE(r1 > 1.5);
            REQUIRE(r1 < 3.0);
            REQUIRE(r2 > 1.5);
            REQUIRE(r2 < 3.0);
        }
    }

    SECTION("the fitted-path band contains its mean") {
        PerturbedGlmResult res = perturbed_glm_ensemble(d, 50, 3);
        for (size_t i = 0; i < d.rows(); ++i) {
            REQUIRE(res.fit_lo[i] <= res.fit_mean[i] + 1e-12);
            REQUIRE(res.fit_mean[i] <= res.fit_hi[i] + 1e-12);
        }
    }

    SECTION("bad configuration is rejected") {
        REQUIRE_THROWS_AS(perturbed_glm_ensemble(d, 0, 1), ConfigError);
        REQUIRE_THROWS_AS(perturbed_glm_ensemble(d, 5, 1, 0.0), ConfigError);
        REQUIRE_THROWS_AS(perturbed_glm_ensemble(d, 5, 1, -0.1), ConfigError);
    }
}

TEST_CASE("coefficient csv carries NA for absent standard errors") {
    auto d = make_dataset(30, 2, [](const std::vector<double>& r) { return r[0] + r[1]; }, 4, 0.1);
    std::string inv = coefficients_csv(linear_inversion(d));
    REQUIRE(inv.rfind("term,estimate,se\n", 0) == 0);
    REQUIRE(inv.find("(intercept)") == std::string::npos);
    REQUIRE(inv.find(",NA\n") != std::string::npos);
    std::string glm = coefficients_csv(fit_glm(d));
    REQUIRE(glm.find("(intercept),") != std::string::npos);
    REQUIRE(glm.find("NA") == std::string::npos);
}
