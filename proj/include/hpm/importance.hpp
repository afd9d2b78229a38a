#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hpm/csv.hpp"
#include "hpm/dataset.hpp"
#include "hpm/metrics.hpp"
#include "hpm/treebag.hpp"

namespace hpm {

struct ImportanceEntry {
    std::string feature;
    double score = 0.0;
};

struct ImportanceReport {
    std::string method; // FILTER or TREE_SSE
    std::vector<ImportanceEntry> entries; // spec feature order, not ranked

    // Rank of a feature by descending score (1 = most important).
    int rank_of(const std::string& feature) const {
        double s = 0.0;
        bool found = false;
        for (const auto& e : entries)
            if (e.feature == feature) {
                s = e.score;
                found = true;
            }
        if (!found) throw ConfigError("feature '" + feature + "' not in importance report");
        int rank = 1;
        for (const auto& e : entries)
            if (e.score > s) ++rank;
        return rank;
    }
};

// Model-free filter: squared Pearson correlation of each feature with the
// target, scaled so the best feature reads 100. A feature uncorrelated with
// the target scores ~0 regardless of the others.
inline ImportanceReport filter_importance(const CountryDataset& d) {
    ImportanceReport rep;
    rep.method = "FILTER";
    std::vector<double> raw(d.cols(), 0.0);
    double hi = 0.0;
    for (size_t j = 0; j < d.cols(); ++j) {
        double c = pearson(d.column(j), d.y);
        raw[j] = std::isnan(c) ? 0.0 : c * c;
        hi = std::max(hi, raw[j]);
    }
    for (size_t j = 0; j < d.cols(); ++j)
        rep.entries.push_back({d.feature_names[j], hi > 0.0 ? raw[j] / hi * 100.0 : 0.0});
    return rep;
}

// Tree-based: SSE reduction credited to each feature across all splits and
// bags, min-max scaled to [0,100]. A feature the forest never splits on holds
// the minimum and reads 0.
inline ImportanceReport tree_sse_importance(const TreeBagModel& m) {
    ImportanceReport rep;
    rep.method = "TREE_SSE";
    double lo = *std::min_element(m.split_gain.begin(), m.split_gain.end());
    double hi = *std::max_element(m.split_gain.begin(), m.split_gain.end());
    for (size_t j = 0; j < m.split_gain.size(); ++j) {
        double s = hi > lo ? (m.split_gain[j] - lo) / (hi - lo) * 100.0 : 0.0;
        rep.entries.push_back({m.feature_names[j], s});
    }
    return rep;
}

inline std::string importance_csv(const std::vector<ImportanceReport>& reports) {
    CsvBuilder b;
    b.raw("method").raw("feature").raw("score").end_row();
    for (const auto& r : reports)
        for (const auto& e : r.entries) b.raw(r.method).raw(e.feature).num(e.score).end_row();
    return b.text;
}

} // namespace hpm
