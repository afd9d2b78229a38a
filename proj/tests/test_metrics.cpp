#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hpm/csv.hpp"
#include "hpm/metrics.hpp"
#include "hpm/rng.hpp"

using namespace hpm;

namespace {

// Long-double reference implementations, independently coded.
double oracle_rms(const std::vector<double>& p, const std::vector<double>& o) {
    long double s = 0;
    for (size_t i = 0; i < p.size(); ++i) s += (long double)(p[i] - o[i]) * (p[i] - o[i]);
    return double(std::sqrt(s / (long double)p.size()));
}
double oracle_mae(const std::vector<double>& p, const std::vector<double>& o) {
    long double s = 0;
    for (size_t i = 0; i < p.size(); ++i) s += std::abs((long double)p[i] - o[i]);
    return double(s / (long double)p.size());
}
double oracle_mape(const std::vector<double>& p, const std::vector<double>& o) {
    long double s = 0;
    for (size_t i = 0; i < p.size(); ++i) s += std::abs((long double)o[i] - p[i]) / (long double)o[i];
    return double(s / (long double)p.size());
}
double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    long double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= (long double)a.size();
    mb /= (long double)b.size();
    long double sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return double(sab / std::sqrt(saa * sbb));
}

} // namespace

TEST_CASE("error metrics match independent reference implementations") {
    Rng rng(3);
    for (int rep = 0; rep < 25; ++rep) {
        size_t n = 5 + size_t(rng.below(200));
        std::vector<double> p(n), o(n);
        for (size_t i = 0; i < n; ++i) {
            p[i] = rng.normal(10.0, 5.0);
            o[i] = rng.normal(11.0, 4.0);
            if (o[i] == 0.0) o[i] = 1.0;
        }
        REQUIRE(rms(p, o) == Catch::Approx(oracle_rms(p, o)).epsilon(1e-12));
        REQUIRE(mae(p, o) == Catch::Approx(oracle_mae(p, o)).epsilon(1e-12));
        REQUIRE(mape(p, o) == Catch::Approx(oracle_mape(p, o)).epsilon(1e-12));
        REQUIRE(pearson(p, o) == Catch::Approx(oracle_pearson(p, o)).epsilon(1e-10));
    }
}

TEST_CASE("metric edge cases") {
    SECTION("length mismatch and empty input") {
        REQUIRE_THROWS_AS(rms({1.0}, {1.0, 2.0}), ConfigError);
        REQUIRE_THROWS_AS(mae({}, {}), ConfigError);
    }
    SECTION("mape divides by the signed observation") {
        // |obs - pred| / obs with obs = -2: |(-2) - (-1)| / (-2) = -0.5
        REQUIRE(mape({-1.0}, {-2.0}) == Catch::Approx(-0.5));
        REQUIRE(mape_abs({-1.0}, {-2.0}) == Catch::Approx(0.5));
    }
    SECTION("mape rejects zero observations") {
        REQUIRE_THROWS_AS(mape({1.0}, {0.0}), NumericError);
        REQUIRE_THROWS_AS(mape_abs({1.0}, {0.0}), NumericError);
    }
    SECTION("pearson degenerate cases") {
        REQUIRE(std::isnan(pearson({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0})));
        REQUIRE(std::isnan(pearson({1.0, 2.0, 3.0}, {5.0, 5.0, 5.0})));
        REQUIRE(pearson({1, 2, 3, 4}, {2, 4, 6, 8}) == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(pearson({1, 2, 3, 4}, {8, 6, 4, 2}) == Catch::Approx(-1.0).epsilon(1e-12));
    }
    SECTION("population standard deviation divides by N") {
        // var([1,3]) = ((1-2)^2 + (3-2)^2)/2 = 1
        REQUIRE(stddev_pop({1.0, 3.0}) == Catch::Approx(1.0));
        REQUIRE(residual_sd({2.0, 4.0}, {1.0, 1.0}) == Catch::Approx(1.0));
    }
}

TEST_CASE("accuracy categories use half-open boundaries") {
    REQUIRE(lewis_category(0.0) == LewisCategory::HIGHLY_ACCURATE);
    REQUIRE(lewis_category(0.0999) == LewisCategory::HIGHLY_ACCURATE);
    REQUIRE(lewis_category(0.1) == LewisCategory::GOOD);
    REQUIRE(lewis_category(0.19999) == LewisCategory::GOOD);
    REQUIRE(lewis_category(0.2) == LewisCategory::REASONABLE);
    REQUIRE(lewis_category(0.49999) == LewisCategory::REASONABLE);
    REQUIRE(lewis_category(0.5) == LewisCategory::INACCURATE);
    REQUIRE(lewis_category(7.0) == LewisCategory::INACCURATE);
    REQUIRE_THROWS_AS(lewis_category(-0.01), ConfigError);
    REQUIRE(to_string(LewisCategory::GOOD) == "GOOD");
}

TEST_CASE("two-sample chi squared") {
    SECTION("identical samples give zero statistic and p = 1") {
        std::vector<double> v;
        for (int i = 0; i < 40; ++i) v.push_back(double(i));
        Chi2Result r = chi2_pair(v, v, 10);
        REQUIRE(r.statistic == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(r.p_value == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(r.normalized == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("hand-computed two-bin example") {
        // pred: 4 values in low bin; obs: 1 low + 3 high.
        std::vector<double> pred = {0.0, 0.1, 0.2, 0.3};
        std::vector<double> obs = {0.1, 0.9, 0.95, 1.0};
        // bins over [0,1]: counts pred {4,0}, obs {1,3}; pooled {5,3}
        // e = 2.5/2.5 and 1.5/1.5 -> stat = (1.5^2/2.5)*2 + (1.5^2/1.5)*2 = 1.8 + 3.0 = 4.8
        Chi2Result r = chi2_pair(pred, obs, 2);
        REQUIRE(r.statistic == Catch::Approx(4.8).epsilon(1e-12));
        REQUIRE(r.normalized == Catch::Approx(1.2).epsilon(1e-12));
        REQUIRE(r.bins == 2);
        // dof = 1: P(chi2_1 > 4.8) ~ 0.02846
        REQUIRE(r.p_value == Catch::Approx(0.028459).epsilon(1e-3));
    }
    SECTION("disjoint distributions yield tiny p") {
        std::vector<double> a, b;
        for (int i = 0; i < 30; ++i) {
            a.push_back(double(i) / 30.0);
            b.push_back(10.0 + double(i) / 30.0);
        }
        Chi2Result r = chi2_pair(a, b, 10);
        REQUIRE(r.p_value < 1e-8);
    }
    SECTION("preconditions") {
        std::vector<double> small = {1, 2, 3};
        REQUIRE_THROWS_AS(chi2_pair(small, small, 2), ConfigError);
        std::vector<double> flat(40, 5.0);
        REQUIRE_THROWS_AS(chi2_pair(flat, flat, 10), NumericError);
        REQUIRE(std::isnan(chi2_pair_or_na(flat, flat, 10).p_value));
    }
}

TEST_CASE("statistics csv row renders NaN as NA") {
    FitStatistics s;
    s.label = "X";
    s.m_cor = std::numeric_limits<double>::quiet_NaN();
    s.m_rms = 1.5;
    std::string row = fit_statistics_csv_row(s);
    REQUIRE(row.substr(0, 5) == "X,NA,");
    REQUIRE(fit_statistics_csv_header() ==
            "country,M_COR,S_COR,M_RMS,S_RMS,SD,M_MAE,M_MAPE,M_CHIp,M_CHIs\n");
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456.789, -2.5e-7, 0.0}) {
        REQUIRE(std::stod(format_number(v)) == v);
    }
    REQUIRE(format_number(std::numeric_limits<double>::quiet_NaN()) == "NA");
}

TEST_CASE("seeded random generator behaves") {
    SECTION("permutation is a permutation") {
        Rng rng(5);
        auto p = rng.permutation(100);
        std::vector<char> seen(100, 0);
        for (size_t v : p) {
            REQUIRE(v < 100);
            REQUIRE_FALSE(seen[v]);
            seen[v] = 1;
        }
    }
    SECTION("bootstrap indices stay in range") {
        Rng rng(6);
        for (size_t v : rng.bootstrap_indices(37)) REQUIRE(v < 37);
    }
    SECTION("truncated normal honors the bound") {
        Rng rng(7);
        for (int i = 0; i < 2000; ++i) REQUIRE(std::abs(rng.truncated_normal(0.1 / 3, 0.1)) <= 0.1);
    }
    SECTION("below is bounded and seeded runs repeat") {
        Rng a(9), b(9);
        for (int i = 0; i < 100; ++i) {
            uint64_t va = a.below(17);
            REQUIRE(va < 17);
            REQUIRE(va == b.below(17));
        }
    }
    SECTION("normal has roughly the right moments") {
        Rng rng(10);
        double s = 0, s2 = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            double x = rng.normal(2.0, 3.0);
            s += x;
            s2 += x * x;
        }
        double mean = s / n;
        double sd = std::sqrt(s2 / n - mean * mean);
        REQUIRE(mean == Catch::Approx(2.0).margin(0.1));
        REQUIRE(sd == Catch::Approx(3.0).margin(0.1));
    }
}
