#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hpm/correlation.hpp"
#include "hpm/dataset.hpp"
#include "hpm/model_spec.hpp"
#include "test_util.hpp"

using namespace hpm;
using hpm::test::make_series;

namespace {

SeriesBundle toy_bundle(size_t n_quarters) {
    SeriesBundle b;
    b.country = "CH";
    std::vector<double> hpi, gdp, cpi, tr;
    for (size_t i = 0; i < n_quarters; ++i) {
        hpi.push_back(100.0 + double(i));
        gdp.push_back(500.0 + 2.0 * double(i));
        cpi.push_back(1.0 + 0.01 * double(i));
        tr.push_back(2.0 + 0.02 * double(i));
    }
    Quarter start{2000, 1};
    b.series["HPI"] = make_series("HPI", start, hpi);
    b.series["GDP"] = make_series("GDP", start, gdp);
    b.series["CPI"] = make_series("CPI", start, cpi);
    b.series["TR10Y"] = make_series("TR10Y", start, tr);
    return b;
}

} // namespace

TEST_CASE("built-in model configurations") {
    const auto& specs = builtin_specs();
    REQUIRE(specs.size() == 12);
    for (size_t i = 0; i < specs.size(); ++i)
        for (size_t j = i + 1; j < specs.size(); ++j) REQUIRE(specs[i].name != specs[j].name);
    REQUIRE(find_spec("3-param").features.size() == 3);
    REQUIRE(find_spec("ecb-1yr").target == TargetForm::HPI_RATE_12Q);
    REQUIRE(find_spec("ecb-fed").features.size() == 6);
    REQUIRE_THROWS_WITH(find_spec("nope"), Catch::Matchers::ContainsSubstring("3-param"));
}

TEST_CASE("panel assembly aligns on the quarter intersection") {
    SeriesBundle b = toy_bundle(60);
    const ModelSpec& spec = find_spec("3-param");
    CountryDataset d = assemble_dataset(b, spec);

    // GDP RATE_12Q loses the first 12 quarters; everything else is complete.
    REQUIRE(d.rows() == 48);
    REQUIRE(d.cols() == 3);
    REQUIRE(d.quarters.front() == Quarter{2003, 1});
    REQUIRE(d.feature_names == std::vector<std::string>{"GDP", "CPI", "TR10Y"});

    SECTION("rate features are expressed in percent") {
        // First row: GDP 12q change = (524 - 500)/524, x100.
        REQUIRE(d.row(0)[0] == Catch::Approx(100.0 * 24.0 / 524.0).epsilon(1e-14));
        REQUIRE(d.row(0)[1] == Catch::Approx(1.12).epsilon(1e-14)); // CPI passthrough
    }
    SECTION("feature columns round-trip against the transformed sources") {
        QuarterlySeries gdp_rate = rate_12q(b.series["GDP"]);
        for (size_t i = 0; i < d.rows(); ++i) {
            auto v = gdp_rate.at(d.quarters[i]);
            REQUIRE(v.has_value());
            REQUIRE(d.row(i)[0] == *v * 100.0);
            REQUIRE(d.row(i)[1] == *b.series["CPI"].at(d.quarters[i]));
            REQUIRE(d.y[i] == *b.series["HPI"].at(d.quarters[i]));
        }
    }
    SECTION("shorter feature span shrinks the panel to the overlap") {
        SeriesBundle shorter = b;
        auto& tr = shorter.series["TR10Y"].points;
        tr.erase(tr.begin(), tr.begin() + 20); // starts 2005-Q1 now
        CountryDataset d2 = assemble_dataset(shorter, spec);
        REQUIRE(d2.quarters.front() == Quarter{2005, 1});
        REQUIRE(d2.rows() == 40);
    }
}

TEST_CASE("panel assembly transforms the target") {
    SeriesBundle b = toy_bundle(60);
    CountryDataset d = assemble_dataset(b, find_spec("3-param-1yr"));
    REQUIRE(d.target_name == "HPI_RATE_12Q");
    // y at 2003-Q1 = (112-100)/112 x100.
    REQUIRE(d.quarters.front() == Quarter{2003, 1});
    REQUIRE(d.y.front() == Catch::Approx(100.0 * 12.0 / 112.0).epsilon(1e-14));
}

TEST_CASE("panel assembly failure modes") {
    SeriesBundle b = toy_bundle(60);
    SECTION("missing indicator") {
        b.series.erase("TR10Y");
        REQUIRE_THROWS_AS(assemble_dataset(b, find_spec("3-param")), DataError);
    }
    SECTION("empty intersection") {
        b.series["TR10Y"] = make_series("TR10Y", Quarter{2050, 1}, {1, 2, 3});
        REQUIRE_THROWS_AS(assemble_dataset(b, find_spec("3-param")), DataError);
    }
}

TEST_CASE("dataset csv audit dump") {
    SeriesBundle b = toy_bundle(20);
    b.series["UNEMPLOYMENT"] = make_series("UNEMPLOYMENT", Quarter{2000, 1},
                                           std::vector<double>(20, 4.5));
    CountryDataset d = assemble_dataset(b, find_spec("local"));
    std::string csv = dataset_csv(d);
    REQUIRE(csv.substr(0, csv.find('\n')) == "quarter,y,GDP,CPI,UNEMPLOYMENT");
    size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    REQUIRE(lines == d.rows() + 1);
}

TEST_CASE("house price correlation matrix") {
    std::map<std::string, QuarterlySeries> hpi;
    std::vector<double> up, down;
    for (int i = 0; i < 30; ++i) {
        up.push_back(100.0 + i + ((i * 7) % 5));
        down.push_back(200.0 - up.back());
    }
    hpi["A"] = make_series("A", Quarter{2000, 1}, up);
    hpi["B"] = make_series("B", Quarter{2000, 1}, up);
    hpi["C"] = make_series("C", Quarter{2000, 1}, down);
    hpi["D"] = make_series("D", Quarter{2050, 1}, {1, 2, 3}); // no overlap

    CorrelationMatrix m = hpi_correlation_matrix(hpi);
    size_t n = m.countries.size();
    REQUIRE(n == 4);
    for (size_t i = 0; i < n; ++i) REQUIRE(m.at(i, i) == 1.0);
    REQUIRE(m.at(0, 1) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(m.at(0, 2) == Catch::Approx(-1.0).epsilon(1e-12));

    SECTION("symmetry and bounds") {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                bool both_absent = std::isnan(m.at(i, j)) && std::isnan(m.at(j, i));
                REQUIRE((both_absent || m.at(i, j) == m.at(j, i)));
                if (!std::isnan(m.at(i, j))) {
                    REQUIRE(m.at(i, j) >= -1.0);
                    REQUIRE(m.at(i, j) <= 1.0);
                }
                REQUIRE(m.overlap_at(i, j) == m.overlap_at(j, i));
            }
    }
    SECTION("pairs below the overlap threshold are absent") {
        size_t d_idx = 3; // countries sorted: A,B,C,D
        REQUIRE(m.countries[d_idx] == "D");
        REQUIRE(std::isnan(m.at(0, d_idx)));
        REQUIRE(m.overlap_at(0, d_idx) == 0);
    }
    SECTION("csv export shape") {
        std::string csv = correlation_csv(m);
        REQUIRE(csv.substr(0, csv.find('\n')) == "country,A,B,C,D");
        REQUIRE(csv.find("NA") != std::string::npos);
    }
}
