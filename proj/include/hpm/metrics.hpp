#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "hpm/csv.hpp"
#include "hpm/errors.hpp"

namespace hpm {

namespace detail {
inline void require_pair(const std::vector<double>& pred, const std::vector<double>& obs) {
    if (pred.size() != obs.size()) throw ConfigError("prediction/observation length mismatch");
    if (pred.empty()) throw ConfigError("empty metric input");
}
} // namespace detail

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

// Population standard deviation (divide by N, not N-1).
inline double stddev_pop(const std::vector<double>& v) {
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size()));
}

inline double rms(const std::vector<double>& pred, const std::vector<double>& obs) {
    detail::require_pair(pred, obs);
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        double r = pred[i] - obs[i];
        s += r * r;
    }
    return std::sqrt(s / double(pred.size()));
}

inline double residual_sd(const std::vector<double>& pred, const std::vector<double>& obs) {
    detail::require_pair(pred, obs);
    std::vector<double> r(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) r[i] = pred[i] - obs[i];
    return stddev_pop(r);
}

inline double mae(const std::vector<double>& pred, const std::vector<double>& obs) {
    detail::require_pair(pred, obs);
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - obs[i]);
    return s / double(pred.size());
}

// Mean absolute percentage error exactly as defined by the source formula:
// |error| divided by the *signed* observation, averaged, not scaled by 100.
// Negative observations therefore contribute negative terms; targets that
// cross zero can yield a negative MAPE. mape_abs is the conventional variant.
inline double mape(const std::vector<double>& pred, const std::vector<double>& obs) {
    detail::require_pair(pred, obs);
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (obs[i] == 0.0) throw NumericError("MAPE undefined: observation is zero at index " + std::to_string(i));
        s += std::abs(obs[i] - pred[i]) / obs[i];
    }
    return s / double(pred.size());
}

inline double mape_abs(const std::vector<double>& pred, const std::vector<double>& obs) {
    detail::require_pair(pred, obs);
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (obs[i] == 0.0) throw NumericError("MAPE undefined: observation is zero at index " + std::to_string(i));
        s += std::abs(obs[i] - pred[i]) / std::abs(obs[i]);
    }
    return s / double(pred.size());
}

// NaN when either side has zero variance (correlation undefined); callers
// exporting tables render NaN as NA.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    detail::require_pair(a, b);
    double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

enum class LewisCategory { HIGHLY_ACCURATE, GOOD, REASONABLE, INACCURATE };

// Interpretation scale for absolute MAPE; each boundary belongs to the upper
// class: [0,0.1) / [0.1,0.2) / [0.2,0.5) / [0.5,inf).
inline LewisCategory lewis_category(double mape_value) {
    if (!(mape_value >= 0.0)) throw ConfigError("lewis_category expects a non-negative MAPE");
    if (mape_value < 0.1) return LewisCategory::HIGHLY_ACCURATE;
    if (mape_value < 0.2) return LewisCategory::GOOD;
    if (mape_value < 0.5) return LewisCategory::REASONABLE;
    return LewisCategory::INACCURATE;
}

inline std::string to_string(LewisCategory c) {
    switch (c) {
        case LewisCategory::HIGHLY_ACCURATE: return "HIGHLY_ACCURATE";
        case LewisCategory::GOOD: return "GOOD";
        case LewisCategory::REASONABLE: return "REASONABLE";
        case LewisCategory::INACCURATE: return "INACCURATE";
    }
    return "?";
}

struct Chi2Result {
    double statistic = 0.0;
    double normalized = 0.0; // statistic / N where N is the per-sample length
    double p_value = 1.0;    // upper tail at (bins - 1) degrees of freedom
    int bins = 0;
};

// Two-sample Pearson chi-squared over equal-width bins spanning the combined
// range. Expected counts follow the pooled distribution; bins empty in both
// samples contribute nothing. Requires length >= 2*bins per sample.
inline Chi2Result chi2_pair(const std::vector<double>& pred, const std::vector<double>& obs, int bins = 10) {
    detail::require_pair(pred, obs);
    if (bins < 2) throw ConfigError("chi2_pair requires at least 2 bins");
    if (pred.size() < size_t(2 * bins))
        throw ConfigError("chi2_pair requires sample length >= 2*bins (" + std::to_string(pred.size()) +
                          " < " + std::to_string(2 * bins) + ")");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* v : {&pred, &obs})
        for (double x : *v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (!(hi > lo)) throw NumericError("chi2_pair: degenerate value range (all values equal)");

    std::vector<double> c1(size_t(bins), 0.0), c2(size_t(bins), 0.0);
    auto bin_of = [&](double x) {
        int b = int((x - lo) / (hi - lo) * bins);
        return std::clamp(b, 0, bins - 1);
    };
    for (double x : pred) c1[size_t(bin_of(x))] += 1.0;
    for (double x : obs) c2[size_t(bin_of(x))] += 1.0;

    double n1 = double(pred.size()), n2 = double(obs.size());
    double stat = 0.0;
    for (int b = 0; b < bins; ++b) {
        double pooled = c1[size_t(b)] + c2[size_t(b)];
        if (pooled == 0.0) continue;
        double e1 = pooled * n1 / (n1 + n2);
        double e2 = pooled * n2 / (n1 + n2);
        stat += (c1[size_t(b)] - e1) * (c1[size_t(b)] - e1) / e1;
        stat += (c2[size_t(b)] - e2) * (c2[size_t(b)] - e2) / e2;
    }
    Chi2Result r;
    r.bins = bins;
    r.statistic = stat;
    r.normalized = stat / n1;
    boost::math::chi_squared dist(double(bins - 1));
    r.p_value = boost::math::cdf(boost::math::complement(dist, stat));
    return r;
}

// chi2 is undefined when every value in both samples is identical (degenerate
// range); ensemble rows report NA for that run instead of aborting the fit.
inline Chi2Result chi2_pair_or_na(const std::vector<double>& pred, const std::vector<double>& obs,
                                  int bins = 10) {
    try {
        return chi2_pair(pred, obs, bins);
    } catch (const NumericError&) {
        Chi2Result r;
        r.bins = bins;
        r.statistic = r.normalized = r.p_value = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
}

// Ensemble summary row. M_* are means over runs, S_* population standard
// deviations over runs; SD is the population SD of the final run's residuals.
struct FitStatistics {
    std::string label;
    double m_cor = 0.0, s_cor = 0.0;
    double m_rms = 0.0, s_rms = 0.0;
    double sd = 0.0;
    double m_mae = 0.0;
    double m_mape = 0.0;
    double m_chip = 0.0;
    double m_chis = 0.0;
};

inline std::string fit_statistics_csv_header() {
    return "country,M_COR,S_COR,M_RMS,S_RMS,SD,M_MAE,M_MAPE,M_CHIp,M_CHIs\n";
}

inline std::string fit_statistics_csv_row(const FitStatistics& s) {
    std::string out = s.label;
    for (double v : {s.m_cor, s.s_cor, s.m_rms, s.s_rms, s.sd, s.m_mae, s.m_mape, s.m_chip, s.m_chis}) {
        out += ',';
        out += format_number(v);
    }
    out += '\n';
    return out;
}

} // namespace hpm
