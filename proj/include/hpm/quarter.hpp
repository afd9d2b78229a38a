#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "hpm/errors.hpp"

namespace hpm {

// Calendar date, validated on construction (Gregorian month lengths, leap years).
struct Date {
    int year = 0;
    int month = 1; // 1..12
    int day = 1;   // 1..days_in_month

    auto operator<=>(const Date&) const = default;
};

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int year, int month) {
    static constexpr int base[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return base[month - 1];
}

inline Date parse_date(std::string_view text) {
    auto fail = [&] { throw DataError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
    Date d;
    auto num = [&](std::string_view part, int& out) {
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || p != part.data() + part.size()) fail();
    };
    num(text.substr(0, 4), d.year);
    num(text.substr(5, 2), d.month);
    num(text.substr(8, 2), d.day);
    if (d.month < 1 || d.month > 12) fail();
    if (d.day < 1 || d.day > days_in_month(d.year, d.month)) fail();
    return d;
}

// Calendar quarter. Ordering and difference operate on the linearised index
// year*4 + (q-1), so q2 - q1 is the signed number of quarters between them.
struct Quarter {
    int year = 0;
    int q = 1; // 1..4

    auto operator<=>(const Quarter&) const = default;

    int index() const { return year * 4 + (q - 1); }

    static Quarter from_index(int idx) {
        int y = idx >= 0 ? idx / 4 : (idx - 3) / 4;
        return Quarter{y, idx - y * 4 + 1};
    }

    Quarter next() const { return from_index(index() + 1); }

    friend int operator-(const Quarter& a, const Quarter& b) { return a.index() - b.index(); }

    std::string str() const { return std::to_string(year) + "-Q" + std::to_string(q); }
};

inline Quarter quarter_of(const Date& d) { return Quarter{d.year, (d.month - 1) / 3 + 1}; }

// Last calendar day of the quarter; resampling keeps the latest observation
// dated at or before this.
inline Date quarter_end(const Quarter& qr) {
    int month = qr.q * 3;
    return Date{qr.year, month, days_in_month(qr.year, month)};
}

// Accepts "YYYY-Qn" (n in 1..4).
inline Quarter parse_quarter(std::string_view text) {
    auto fail = [&] { throw DataError("invalid quarter '" + std::string(text) + "' (expected YYYY-Qn)"); };
    auto dash = text.find('-');
    if (dash == std::string_view::npos || dash + 2 >= text.size() + 1) fail();
    std::string_view ypart = text.substr(0, dash);
    std::string_view qpart = text.substr(dash + 1);
    if (qpart.size() != 2 || (qpart[0] != 'Q' && qpart[0] != 'q')) fail();
    int y = 0;
    auto [p, ec] = std::from_chars(ypart.data(), ypart.data() + ypart.size(), y);
    if (ec != std::errc{} || p != ypart.data() + ypart.size()) fail();
    int qn = qpart[1] - '0';
    if (qn < 1 || qn > 4) fail();
    return Quarter{y, qn};
}

} // namespace hpm
