#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpm/dataset.hpp"
#include "hpm/errors.hpp"
#include "hpm/model_spec.hpp"
#include "hpm/series.hpp"

namespace hpm {

inline constexpr const char* kManifestFormat = "hpm-manifest/1";

// Manifest keys accept a few common source spellings; everything downstream
// uses the canonical indicator names.
inline std::string canonical_indicator_name(std::string s) {
    for (auto& c : s) c = char(std::toupper(static_cast<unsigned char>(c)));
    if (s == "CPI_RATE") return "CPI";
    if (s == "ECB_ASSETS") return "ECB";
    if (s == "RENT_INDEX") return "RENT";
    if (s == "TR") return "TR10Y";
    return s;
}

// One source file: where it lives, how its native form maps onto the
// indicator's canonical semantics, and the unit label for reports. The form
// here describes the SOURCE (e.g. a CPI shipped as an index level needs
// RATE_4Q to become an annualized rate); model specs apply their own forms on
// top of the canonical bundle.
struct ManifestEntry {
    std::string path;
    Form form = Form::AS_IS;
    std::string units;
};

struct Manifest {
    std::filesystem::path dir; // manifest file's directory; all paths resolve against it
    std::string hpi_path;
    std::string hpi_units;
    uint64_t base_seed = 1;
    std::map<std::string, ManifestEntry> global;                           // indicator -> entry
    std::map<std::string, std::map<std::string, ManifestEntry>> countries; // country -> indicator -> entry

    std::vector<std::string> country_list() const {
        std::vector<std::string> out;
        for (const auto& [c, _] : countries) out.push_back(c);
        return out;
    }

    std::filesystem::path resolve(const std::string& rel) const { return dir / rel; }
};

namespace detail {

inline ManifestEntry parse_manifest_entry(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("path"))
        throw ConfigError("manifest: " + where + ": entry must be an object with a \"path\" key");
    ManifestEntry e;
    e.path = j.at("path").get<std::string>();
    if (j.contains("form")) e.form = form_from_string(j.at("form").get<std::string>());
    if (j.contains("units")) e.units = j.at("units").get<std::string>();
    return e;
}

} // namespace detail

// Missing files are a configuration fault, caught at load time rather than
// when a command first touches the series.
inline Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest " + path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("format") || j.at("format") != kManifestFormat)
        throw ConfigError("manifest " + path + ": missing or unsupported format tag (expected " +
                          std::string(kManifestFormat) + ")");

    Manifest m;
    m.dir = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
    if (j.contains("base_seed")) m.base_seed = j.at("base_seed").get<uint64_t>();

    if (!j.contains("hpi") || !j.at("hpi").is_object() || !j.at("hpi").contains("path"))
        throw ConfigError("manifest " + path + ": needs an \"hpi\" object with a \"path\"");
    m.hpi_path = j.at("hpi").at("path").get<std::string>();
    m.hpi_units = j.at("hpi").value("units", std::string());

    if (j.contains("global")) {
        for (const auto& [key, val] : j.at("global").items())
            m.global[canonical_indicator_name(key)] = detail::parse_manifest_entry(val, "global." + key);
    }
    if (!j.contains("countries") || !j.at("countries").is_object() || j.at("countries").empty())
        throw ConfigError("manifest " + path + ": no countries configured");
    for (const auto& [country, block] : j.at("countries").items()) {
        if (!block.is_object())
            throw ConfigError("manifest " + path + ": countries." + country + " must be an object");
        std::map<std::string, ManifestEntry> entries;
        for (const auto& [key, val] : block.items())
            entries[canonical_indicator_name(key)] =
                detail::parse_manifest_entry(val, "countries." + country + "." + key);
        m.countries[country] = std::move(entries);
    }

    std::vector<std::string> files = {m.hpi_path};
    for (const auto& [_, e] : m.global) files.push_back(e.path);
    for (const auto& [_, block] : m.countries)
        for (const auto& [_k, e] : block) files.push_back(e.path);
    for (const auto& f : files)
        if (!std::filesystem::exists(m.resolve(f)))
            throw ConfigError("manifest " + path + ": data file not found: " + m.resolve(f).string());
    return m;
}

// Wide quarterly CSV: header QUARTER,<country>,... with YYYY-Qn labels,
// strictly increasing; "." or empty cells are per-country gaps.
inline std::map<std::string, QuarterlySeries> parse_wide_quarterly_csv(std::istream& in,
                                                                       const std::string& name) {
    std::string line;
    int line_no = 0;
    std::vector<std::string> countries;
    std::map<std::string, QuarterlySeries> out;
    int prev_index = 0;
    bool have_prev = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip(line);
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (countries.empty()) {
            if (cells.size() < 2 || cells[0] != "QUARTER")
                throw DataError(name + ": line 1: expected header QUARTER,<country>,...");
            countries.assign(cells.begin() + 1, cells.end());
            for (const auto& c : countries) {
                if (c.empty()) throw DataError(name + ": line 1: empty country column name");
                if (out.count(c)) throw DataError(name + ": line 1: duplicate country column " + c);
                out[c] = QuarterlySeries{c, {}};
            }
            continue;
        }
        if (cells.size() != countries.size() + 1)
            throw DataError(name + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(countries.size() + 1) + " columns, got " +
                            std::to_string(cells.size()));
        Quarter q;
        try {
            q = parse_quarter(cells[0]);
        } catch (const DataError&) {
            throw DataError(name + ": line " + std::to_string(line_no) + ": invalid quarter '" +
                            cells[0] + "'");
        }
        if (have_prev && q.index() <= prev_index)
            throw DataError(name + ": line " + std::to_string(line_no) +
                            ": quarters not strictly increasing");
        prev_index = q.index();
        have_prev = true;
        for (size_t c = 0; c < countries.size(); ++c) {
            const std::string& v = cells[c + 1];
            if (v.empty() || v == ".") continue;
            out[countries[c]].points.push_back(
                {q, detail::parse_value(v, line_no, name + "/" + countries[c]), false});
        }
    }
    if (countries.empty()) throw DataError(name + ": empty file");
    return out;
}

struct SeriesCoverage {
    std::string indicator;
    std::string units;
    Quarter first;
    Quarter last;
    size_t observed = 0;     // resampled quarters present before gap filling
    size_t gaps = 0;         // interior quarters absent before gap filling
    size_t interpolated = 0; // synthetic points added by gap filling
};

struct BundleLoad {
    SeriesBundle bundle;
    std::vector<SeriesCoverage> coverage;
};

namespace detail {

inline SeriesCoverage coverage_of(const QuarterlySeries& resampled, const QuarterlySeries& filled,
                                  const std::string& units) {
    SeriesCoverage c;
    c.indicator = filled.name;
    c.units = units;
    c.first = filled.first_quarter();
    c.last = filled.last_quarter();
    c.observed = resampled.size();
    c.gaps = size_t(resampled.last_quarter() - resampled.first_quarter()) + 1 - resampled.size();
    for (const auto& p : filled.points) c.interpolated += p.interpolated ? 1 : 0;
    return c;
}

} // namespace detail

inline std::map<std::string, QuarterlySeries> load_hpi_all(const Manifest& m) {
    std::ifstream in(m.resolve(m.hpi_path), std::ios::binary);
    if (!in) throw DataError("cannot open " + m.resolve(m.hpi_path).string());
    return parse_wide_quarterly_csv(in, m.hpi_path);
}

// Full ingestion for one country: HPI column from the wide file plus every
// configured indicator (country entries shadow global ones), each resampled to
// end-of-quarter and interior-gap-filled, renamed to its canonical indicator.
inline BundleLoad load_country_bundle(const Manifest& m, const std::string& country) {
    auto cit = m.countries.find(country);
    if (cit == m.countries.end()) throw ConfigError("country " + country + " not in manifest");

    BundleLoad out;
    out.bundle.country = country;

    auto hpi_all = load_hpi_all(m);
    auto hit = hpi_all.find(country);
    if (hit == hpi_all.end() || hit->second.empty())
        throw DataError(m.hpi_path + ": no house-price column for " + country);
    QuarterlySeries hpi = hit->second;
    hpi.name = indicator::HPI.name;
    QuarterlySeries hpi_filled = fill_gaps_linear(hpi);
    out.coverage.push_back(detail::coverage_of(hpi, hpi_filled, m.hpi_units));
    out.bundle.series[indicator::HPI.name] = std::move(hpi_filled);

    // Country-specific entries first, then global ones not shadowed.
    std::map<std::string, ManifestEntry> merged = m.global;
    for (const auto& [k, e] : cit->second) merged[k] = e;

    for (const auto& [ind, entry] : merged) {
        std::ifstream in(m.resolve(entry.path), std::ios::binary);
        if (!in) throw DataError("cannot open " + m.resolve(entry.path).string());
        DatedSeries raw = parse_series_csv(in, entry.path);
        QuarterlySeries resampled = resample_end_of_quarter(raw);
        resampled.name = ind;
        QuarterlySeries filled = fill_gaps_linear(resampled);
        QuarterlySeries canonical = detail::apply_form(filled, entry.form);
        canonical.name = ind;
        if (canonical.empty())
            throw DataError(country + "/" + ind + ": series empty after applying source form " +
                            to_string(entry.form));
        out.coverage.push_back(detail::coverage_of(resampled, filled, entry.units));
        out.bundle.series[ind] = std::move(canonical);
    }
    return out;
}

inline std::string coverage_csv(const std::vector<SeriesCoverage>& cov) {
    CsvBuilder b;
    b.raw("indicator").raw("units").raw("first").raw("last").raw("observed").raw("gaps")
        .raw("interpolated").end_row();
    for (const auto& c : cov) {
        b.raw(c.indicator).raw(c.units).raw(c.first.str()).raw(c.last.str())
            .raw(std::to_string(c.observed)).raw(std::to_string(c.gaps))
            .raw(std::to_string(c.interpolated)).end_row();
    }
    return b.text;
}

} // namespace hpm
