#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "hpm/knn.hpp"
#include "test_util.hpp"

using namespace hpm;
using hpm::test::make_dataset;

namespace {

// Brute-force reference: full stable sort over (squared distance, row index).
double oracle_knn(const std::vector<double>& x, const std::vector<double>& y, size_t p,
                  const double* q, int k) {
    size_t n = y.size();
    std::vector<std::pair<double, size_t>> d(n);
    for (size_t i = 0; i < n; ++i) {
        double s = 0;
        for (size_t j = 0; j < p; ++j) s += (q[j] - x[i * p + j]) * (q[j] - x[i * p + j]);
        d[i] = {s, i};
    }
    std::sort(d.begin(), d.end());
    double sum = 0;
    for (int i = 0; i < k; ++i) sum += y[d[size_t(i)].second];
    return sum / k;
}

} // namespace

TEST_CASE("fold assignment partitions the rows") {
    Rng rng(1);
    auto folds = cv_folds(47, 10, rng);
    REQUIRE(folds.size() == 10);
    std::vector<char> seen(47, 0);
    size_t lo = 47, hi = 0;
    for (const auto& f : folds) {
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
        for (size_t i : f) {
            REQUIRE(i < 47);
            REQUIRE_FALSE(seen[i]);
            seen[i] = 1;
        }
    }
    REQUIRE(std::all_of(seen.begin(), seen.end(), [](char c) { return c == 1; }));
    REQUIRE(hi - lo <= 1);
    REQUIRE_THROWS_AS(cv_folds(5, 1, rng), ConfigError);
    REQUIRE_THROWS_AS(cv_folds(5, 6, rng), ConfigError);
}

TEST_CASE("scaler standardizes with sample statistics") {
    CountryDataset d = make_dataset(50, 2, [](const std::vector<double>& r) { return r[0]; }, 31);
    Scaler s = Scaler::fit(d);

    // Reference: two-pass mean and n-1 variance.
    for (size_t j = 0; j < 2; ++j) {
        auto col = d.column(j);
        double m = 0;
        for (double v : col) m += v;
        m /= double(col.size());
        double var = 0;
        for (double v : col) var += (v - m) * (v - m);
        var /= double(col.size() - 1);
        REQUIRE(s.mean[j] == Catch::Approx(m).epsilon(1e-12));
        REQUIRE(s.sd[j] == Catch::Approx(std::sqrt(var)).epsilon(1e-12));
    }

    SECTION("constant feature is rejected by name") {
        CountryDataset c = d;
        for (size_t i = 0; i < c.rows(); ++i) c.x[i * c.cols() + 1] = 7.0;
        REQUIRE_THROWS_WITH(Scaler::fit(c), Catch::Matchers::ContainsSubstring("f1"));
    }
}

TEST_CASE("nearest-neighbour predictions match the exhaustive reference") {
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        size_t n = 40 + rng.below(40), p = 1 + rng.below(4);
        CountryDataset d = make_dataset(n, p, [&](const std::vector<double>& r) {
            double s = 0;
            for (double v : r) s += v;
            return s;
        }, 1000 + uint64_t(rep), 0.3);
        KnnModel m = train_knn(d, {10, 1, 555});
        for (int qi = 0; qi < 5; ++qi) {
            std::vector<double> q(p);
            for (auto& v : q) v = rng.normal();
            // Compare on the standardized side so both see identical inputs.
            std::vector<double> qs(p);
            m.scaler.apply(q.data(), qs.data(), p);
            double got = m.predict_standardized(qs.data());
            double want = oracle_knn(m.train_x, m.train_y, p, qs.data(), m.k);
            REQUIRE(got == Catch::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("distance ties resolve to the lower training row") {
    // Model constructed directly with an identity scaler so the tie is exact
    // in floating point: rows at 0 and 2, query at 1.
    KnnModel m;
    m.k = 1;
    m.n_features = 1;
    m.feature_names = {"a"};
    m.scaler.mean = {0.0};
    m.scaler.sd = {1.0};
    m.train_x = {0.0, 2.0, 8.0, 9.0};
    m.train_y = {-100.0, 5.0, 6.0, 7.0};
    double q = 1.0;
    REQUIRE(m.predict(&q) == -100.0);

    SECTION("with k=2 the tie pair averages") {
        m.k = 2;
        REQUIRE(m.predict(&q) == Catch::Approx((-100.0 + 5.0) / 2.0));
    }
    SECTION("k capped at the training size") {
        m.k = 99;
        REQUIRE(m.predict(&q) == Catch::Approx((-100.0 + 5.0 + 6.0 + 7.0) / 4.0));
    }
}

TEST_CASE("k selection by repeated cross-validation") {
    CountryDataset d = make_dataset(80, 2, [](const std::vector<double>& r) {
        return 3.0 * r[0] - 2.0 * r[1];
    }, 5, 0.2);

    KnnModel m = train_knn(d, {10, 3, 99});
    REQUIRE(std::find_if(m.cv_table.begin(), m.cv_table.end(),
                         [&](const KnnCvPoint& pt) { return pt.k == m.k; }) != m.cv_table.end());
    REQUIRE(m.cv_table.size() == 5);

    SECTION("chosen k minimizes the table, earliest on ties") {
        double best = m.cv_table.front().cv_rmse;
        for (const auto& pt : m.cv_table) best = std::min(best, pt.cv_rmse);
        for (const auto& pt : m.cv_table) {
            if (pt.k == m.k) REQUIRE(pt.cv_rmse == best);
            if (pt.k < m.k) REQUIRE(pt.cv_rmse > best);
        }
    }
    SECTION("grid order does not matter") {
        KnnModel m2 = train_knn(d, {10, 3, 99}, {11, 9, 7, 5, 3});
        REQUIRE(m2.k == m.k);
        REQUIRE(m2.cv_r2 == m.cv_r2);
    }
    SECTION("same seed reproduces the model exactly") {
        KnnModel m2 = train_knn(d, {10, 3, 99});
        REQUIRE(m2.k == m.k);
        REQUIRE(m2.train_x == m.train_x);
        for (size_t i = 0; i < m.cv_table.size(); ++i)
            REQUIRE(m2.cv_table[i].cv_rmse == m.cv_table[i].cv_rmse);
        REQUIRE(m2.cv_r2 == m.cv_r2);
    }
    SECTION("cv_r2 reflects fit quality on learnable data") {
        REQUIRE(m.cv_r2 > 0.8);
        REQUIRE(m.cv_r2 <= 1.0);
    }
}

TEST_CASE("training preconditions") {
    CountryDataset d = make_dataset(39, 2, [](const std::vector<double>& r) { return r[0]; }, 8);
    SECTION("panel too short") { REQUIRE_THROWS_AS(train_knn(d, {10, 3, 1}), DataError); }
    CountryDataset ok = make_dataset(50, 2, [](const std::vector<double>& r) { return r[0]; }, 8);
    SECTION("k larger than the smallest training fold") {
        REQUIRE_THROWS_AS(train_knn(ok, {10, 3, 1}, {46}), ConfigError);
    }
    SECTION("empty or invalid grid") {
        REQUIRE_THROWS_AS(train_knn(ok, {10, 3, 1}, {}), ConfigError);
        REQUIRE_THROWS_AS(train_knn(ok, {10, 3, 1}, {0}), ConfigError);
    }
}

TEST_CASE("shuffled targets leave nothing to learn") {
    // Destroying the feature/target link should drive held-out R^2 to ~0.
    double total_r2 = 0.0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
        CountryDataset d = make_dataset(60, 3, [](const std::vector<double>& r) {
            return 4.0 * r[0] + 2.0 * r[1];
        }, 300 + uint64_t(rep), 0.1);
        Rng shuffler(900 + uint64_t(rep));
        auto perm = shuffler.permutation(d.rows());
        std::vector<double> y2(d.rows());
        for (size_t i = 0; i < d.rows(); ++i) y2[i] = d.y[perm[i]];
        d.y = y2;
        KnnModel m = train_knn(d, {10, 3, uint64_t(rep)});
        total_r2 += m.cv_r2;
    }
    REQUIRE(total_r2 / reps < 0.1);
}
