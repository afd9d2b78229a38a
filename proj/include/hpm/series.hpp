#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "hpm/errors.hpp"
#include "hpm/quarter.hpp"

namespace hpm {

// Raw observations at native frequency (daily, monthly or quarterly), strictly
// increasing dates. Missing source rows ("." or empty VALUE) are dropped here;
// they reappear as quarter gaps after resampling.
struct DatedPoint {
    Date date;
    double value = 0.0;
};

struct DatedSeries {
    std::string name;
    std::vector<DatedPoint> points;
};

struct QuarterlyPoint {
    Quarter quarter;
    double value = 0.0;
    bool interpolated = false; // set only by fill_gaps_linear
};

// Quarters strictly increasing; absent quarters are gaps, not NaN rows.
struct QuarterlySeries {
    std::string name;
    std::vector<QuarterlyPoint> points;

    bool empty() const { return points.empty(); }
    size_t size() const { return points.size(); }
    Quarter first_quarter() const { return points.front().quarter; }
    Quarter last_quarter() const { return points.back().quarter; }

    std::optional<double> at(const Quarter& q) const {
        auto it = std::lower_bound(points.begin(), points.end(), q,
                                   [](const QuarterlyPoint& p, const Quarter& k) { return p.quarter < k; });
        if (it == points.end() || it->quarter != q) return std::nullopt;
        return it->value;
    }
};

namespace detail {

inline std::string strip(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    size_t b = 0, e = s.size();
    while (b < e && issp(s[b])) ++b;
    while (e > b && issp(s[e - 1])) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(strip(cur));
    return out;
}

inline double parse_value(const std::string& text, int line_no, const std::string& context) {
    try {
        size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        if (!std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError(context + ": line " + std::to_string(line_no) + ": bad numeric value '" + text + "'");
    }
}

} // namespace detail

// FRED export convention: header DATE,VALUE; ISO dates; "." or empty marks a
// missing observation and the row is skipped. Dates must be strictly increasing.
inline DatedSeries parse_series_csv(std::istream& in, const std::string& name) {
    DatedSeries s;
    s.name = name;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip(line);
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            // Header row is mandatory; only the column count is enforced so that
            // exports naming the value column after the series id still load.
            if (cells.size() < 2)
                throw DataError(name + ": line 1: expected header DATE,VALUE");
            continue;
        }
        if (cells.size() < 2)
            throw DataError(name + ": line " + std::to_string(line_no) + ": expected DATE,VALUE");
        const std::string& val = cells[1];
        if (val.empty() || val == ".") continue;
        Date d;
        try {
            d = parse_date(cells[0]);
        } catch (const DataError&) {
            throw DataError(name + ": line " + std::to_string(line_no) + ": invalid date '" + cells[0] + "'");
        }
        if (!s.points.empty() && !(s.points.back().date < d))
            throw DataError(name + ": line " + std::to_string(line_no) + ": dates not strictly increasing");
        s.points.push_back({d, detail::parse_value(val, line_no, name)});
    }
    if (!header_seen) throw DataError(name + ": empty file");
    if (s.points.empty()) throw DataError(name + ": no observations");
    return s;
}

// End-of-quarter resampling: for every quarter intersecting the raw span, the
// last observation dated at or before the quarter end. Quarters whose window
// holds no observation are left absent (gaps).
inline QuarterlySeries resample_end_of_quarter(const DatedSeries& raw) {
    if (raw.points.empty()) throw DataError(raw.name + ": no observations to resample");
    QuarterlySeries out;
    out.name = raw.name;
    Quarter first = quarter_of(raw.points.front().date);
    Quarter last = quarter_of(raw.points.back().date);
    size_t i = 0;
    for (int idx = first.index(); idx <= last.index(); ++idx) {
        Quarter q = Quarter::from_index(idx);
        std::optional<double> best;
        while (i < raw.points.size() && quarter_of(raw.points[i].date).index() <= idx) {
            best = raw.points[i].value;
            ++i;
        }
        if (best) out.points.push_back({q, *best, false});
    }
    return out;
}

// Linear interpolation across interior gaps only; leading/trailing quarters
// are never extrapolated. Idempotent. Synthetic points carry interpolated=true.
inline QuarterlySeries fill_gaps_linear(const QuarterlySeries& s) {
    QuarterlySeries out;
    out.name = s.name;
    if (s.points.empty()) return out;
    for (size_t i = 0; i + 1 < s.points.size(); ++i) {
        const auto& a = s.points[i];
        const auto& b = s.points[i + 1];
        out.points.push_back(a);
        int span = b.quarter - a.quarter;
        for (int step = 1; step < span; ++step) {
            double t = double(step) / double(span);
            out.points.push_back({Quarter::from_index(a.quarter.index() + step),
                                  a.value + t * (b.value - a.value), true});
        }
    }
    out.points.push_back(s.points.back());
    return out;
}

// Relative change over `window` quarters with the *current* value as the
// denominator: (v_i - v_{i-window}) / v_i. Returned as a plain fraction; the
// dataset layer expresses it in percent. Requires a contiguous input (no gaps)
// so the lagged observation is well defined.
inline QuarterlySeries rate_over(const QuarterlySeries& s, int window) {
    if (window < 1) throw ConfigError("rate window must be >= 1");
    QuarterlySeries out;
    out.name = s.name;
    if (s.points.size() <= size_t(window)) return out;
    for (size_t i = 0; i + 1 < s.points.size(); ++i)
        if (s.points[i + 1].quarter - s.points[i].quarter != 1)
            throw DataError(s.name + ": rate transform requires contiguous quarters (gap after " +
                            s.points[i].quarter.str() + ")");
    for (size_t i = window; i < s.points.size(); ++i) {
        double cur = s.points[i].value;
        if (cur == 0.0)
            throw DataError(s.name + ": rate transform division by zero at " + s.points[i].quarter.str());
        out.points.push_back({s.points[i].quarter, (cur - s.points[i - window].value) / cur,
                              s.points[i].interpolated});
    }
    return out;
}

inline QuarterlySeries rate_12q(const QuarterlySeries& s) { return rate_over(s, 12); }
inline QuarterlySeries rate_4q(const QuarterlySeries& s) { return rate_over(s, 4); }

} // namespace hpm
