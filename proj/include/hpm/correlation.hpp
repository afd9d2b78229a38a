#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hpm/csv.hpp"
#include "hpm/metrics.hpp"
#include "hpm/series.hpp"

namespace hpm {

// Pairwise Pearson correlations of price index levels over overlapping
// quarters. Off-diagonal pairs with fewer overlapping quarters than
// min_overlap are left absent (NaN) rather than reported from too little
// data. The diagonal is always exactly 1.
struct CorrelationMatrix {
    std::vector<std::string> countries;
    std::vector<double> corr;    // n*n, row-major, NaN = absent
    std::vector<int> overlap;    // n*n

    double at(size_t i, size_t j) const { return corr[i * countries.size() + j]; }
    int overlap_at(size_t i, size_t j) const { return overlap[i * countries.size() + j]; }
};

inline CorrelationMatrix hpi_correlation_matrix(const std::map<std::string, QuarterlySeries>& hpi,
                                                int min_overlap = 8) {
    CorrelationMatrix m;
    for (const auto& [c, s] : hpi) m.countries.push_back(c);
    size_t n = m.countries.size();
    m.corr.assign(n * n, std::numeric_limits<double>::quiet_NaN());
    m.overlap.assign(n * n, 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i; j < n; ++j) {
            const auto& a = hpi.at(m.countries[i]);
            const auto& b = hpi.at(m.countries[j]);
            std::vector<double> va, vb;
            for (const auto& p : a.points) {
                auto v = b.at(p.quarter);
                if (v) {
                    va.push_back(p.value);
                    vb.push_back(*v);
                }
            }
            m.overlap[i * n + j] = m.overlap[j * n + i] = int(va.size());
            if (i == j) {
                m.corr[i * n + i] = 1.0;
                continue;
            }
            if (int(va.size()) < min_overlap) continue;
            m.corr[i * n + j] = m.corr[j * n + i] = pearson(va, vb);
        }
    }
    return m;
}

inline std::string correlation_csv(const CorrelationMatrix& m) {
    CsvBuilder b;
    b.raw("country");
    for (const auto& c : m.countries) b.raw(c);
    b.end_row();
    for (size_t i = 0; i < m.countries.size(); ++i) {
        b.raw(m.countries[i]);
        for (size_t j = 0; j < m.countries.size(); ++j) b.num(m.at(i, j));
        b.end_row();
    }
    return b.text;
}

inline std::string overlap_csv(const CorrelationMatrix& m) {
    CsvBuilder b;
    b.raw("country");
    for (const auto& c : m.countries) b.raw(c);
    b.end_row();
    for (size_t i = 0; i < m.countries.size(); ++i) {
        b.raw(m.countries[i]);
        for (size_t j = 0; j < m.countries.size(); ++j) b.raw(std::to_string(m.overlap_at(i, j)));
        b.end_row();
    }
    return b.text;
}

} // namespace hpm
