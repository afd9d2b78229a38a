#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hpm/csv.hpp"
#include "hpm/ensemble.hpp"
#include "hpm/errors.hpp"
#include "hpm/parallel.hpp"

namespace hpm {

// Hard ceiling on full-factorial size; grids are materialized as one
// prediction per row, so the cap bounds memory at ~80 MB of doubles.
inline constexpr size_t kMaxGridRows = 10'000'000;

struct GridAxis {
    std::string feature;
    double lo = 0.0;
    double hi = 0.0;
    size_t count = 1;
};

inline std::vector<double> axis_values(const GridAxis& a) {
    if (a.count < 1) throw ConfigError("axis " + a.feature + ": count must be >= 1");
    if (a.count == 1) {
        if (a.lo != a.hi) throw ConfigError("axis " + a.feature + ": count 1 needs lo == hi");
        return {a.lo};
    }
    if (!(a.lo < a.hi)) throw ConfigError("axis " + a.feature + ": lo must be < hi");
    std::vector<double> v(a.count);
    for (size_t i = 0; i < a.count; ++i)
        v[i] = a.lo + (a.hi - a.lo) * double(i) / double(a.count - 1);
    return v;
}

inline size_t grid_rows(const std::vector<GridAxis>& axes) {
    if (axes.empty()) throw ConfigError("scenario grid needs at least one axis");
    size_t total = 1;
    for (const auto& a : axes) {
        if (a.count == 0) throw ConfigError("axis " + a.feature + ": count must be >= 1");
        if (total > kMaxGridRows / a.count)
            throw ConfigError("scenario grid exceeds the row cap");
        total *= a.count;
    }
    return total;
}

// Row r of the full factorial in mixed radix, last axis varying fastest.
inline void decode_grid_row(const std::vector<std::vector<double>>& values, size_t r,
                            std::vector<double>& out) {
    out.resize(values.size());
    for (size_t a = values.size(); a-- > 0;) {
        size_t c = values[a].size();
        out[a] = values[a][r % c];
        r /= c;
    }
}

struct ScenarioResult {
    std::vector<GridAxis> axes;
    std::vector<double> predictions; // one per grid row, row ordering as decode_grid_row
};

// Evaluates the model over the full factorial. Axes may come in any order but
// must cover the model's features exactly, one axis each.
inline ScenarioResult predict_grid(const AnyModel& model, const std::vector<GridAxis>& axes,
                                   int threads = 1) {
    const std::vector<std::string>& feats = model_feature_names(model);
    std::vector<size_t> axis_of(feats.size());
    for (size_t j = 0; j < feats.size(); ++j) {
        size_t found = axes.size();
        for (size_t a = 0; a < axes.size(); ++a)
            if (axes[a].feature == feats[j]) { found = a; break; }
        if (found == axes.size())
            throw ConfigError("scenario grid: no axis for model feature " + feats[j]);
        axis_of[j] = found;
    }
    if (axes.size() != feats.size())
        throw ConfigError("scenario grid: axis count does not match the model's feature count");

    size_t total = grid_rows(axes);
    std::vector<std::vector<double>> values;
    for (const auto& a : axes) values.push_back(axis_values(a));

    ScenarioResult res;
    res.axes = axes;
    res.predictions.assign(total, 0.0);
    parallel_for(total, threads, [&](size_t r) {
        std::vector<double> point, x(feats.size());
        decode_grid_row(values, r, point);
        for (size_t j = 0; j < feats.size(); ++j) x[j] = point[axis_of[j]];
        res.predictions[r] = model_predict(model, x.data());
    });
    return res;
}

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    size_t count = 0;
};

struct GridSummary {
    size_t rows = 0;
    double min = 0.0, max = 0.0, mean = 0.0;
    double q5 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
    std::vector<HistogramBin> histogram; // 50 equal-width bins over [min, max]
};

// Linear-interpolation quantile on a sorted sample (the common spreadsheet
// definition): h = (n-1)p, interpolate between the straddling order stats.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw NumericError("quantile of empty sample");
    double h = double(sorted.size() - 1) * p;
    size_t lo = size_t(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - double(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline GridSummary summarize_grid(const std::vector<double>& preds) {
    if (preds.empty()) throw NumericError("cannot summarize an empty grid");
    GridSummary s;
    s.rows = preds.size();
    std::vector<double> sorted = preds;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    double sum = 0.0;
    for (double v : sorted) sum += v;
    s.mean = sum / double(sorted.size());
    s.q5 = quantile_sorted(sorted, 0.05);
    s.q25 = quantile_sorted(sorted, 0.25);
    s.q50 = quantile_sorted(sorted, 0.50);
    s.q75 = quantile_sorted(sorted, 0.75);
    s.q95 = quantile_sorted(sorted, 0.95);

    constexpr size_t kBins = 50;
    s.histogram.assign(kBins, {});
    double width = (s.max - s.min) / double(kBins);
    for (size_t b = 0; b < kBins; ++b) {
        s.histogram[b].lo = s.min + width * double(b);
        s.histogram[b].hi = b + 1 == kBins ? s.max : s.min + width * double(b + 1);
    }
    if (width == 0.0) {
        s.histogram[0].count = preds.size();
        return s;
    }
    for (double v : preds) {
        size_t b = size_t((v - s.min) / width);
        if (b >= kBins) b = kBins - 1;
        ++s.histogram[b].count;
    }
    return s;
}

inline std::string scenario_csv(const ScenarioResult& res) {
    std::vector<std::vector<double>> values;
    for (const auto& a : res.axes) values.push_back(axis_values(a));
    CsvBuilder b;
    for (const auto& a : res.axes) b.raw(a.feature);
    b.raw("prediction").end_row();
    std::vector<double> point;
    for (size_t r = 0; r < res.predictions.size(); ++r) {
        decode_grid_row(values, r, point);
        for (double v : point) b.num(v);
        b.num(res.predictions[r]).end_row();
    }
    return b.text;
}

// current_value, when present, is the reference the grid is read against
// (the latest observed target value).
inline std::string grid_summary_csv(const GridSummary& s, std::optional<double> current_value) {
    CsvBuilder b;
    b.raw("stat").raw("value").end_row();
    b.raw("rows").num(double(s.rows)).end_row();
    b.raw("min").num(s.min).end_row();
    b.raw("q5").num(s.q5).end_row();
    b.raw("q25").num(s.q25).end_row();
    b.raw("q50").num(s.q50).end_row();
    b.raw("mean").num(s.mean).end_row();
    b.raw("q75").num(s.q75).end_row();
    b.raw("q95").num(s.q95).end_row();
    b.raw("max").num(s.max).end_row();
    if (current_value) b.raw("current_value").num(*current_value).end_row();
    return b.text;
}

inline std::string histogram_csv(const GridSummary& s) {
    CsvBuilder b;
    b.raw("bin_lo").raw("bin_hi").raw("count").end_row();
    for (const auto& h : s.histogram) b.num(h.lo).num(h.hi).num(double(h.count)).end_row();
    return b.text;
}

} // namespace hpm
