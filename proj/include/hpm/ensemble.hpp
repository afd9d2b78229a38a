#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "hpm/csv.hpp"
#include "hpm/dataset.hpp"
#include "hpm/knn.hpp"
#include "hpm/metrics.hpp"
#include "hpm/parallel.hpp"
#include "hpm/treebag.hpp"

namespace hpm {

enum class Learner { KNN, TREEBAG };

inline std::string to_string(Learner l) { return l == Learner::KNN ? "knn" : "treebag"; }

inline Learner learner_from_string(const std::string& s) {
    if (s == "knn" || s == "KNN") return Learner::KNN;
    if (s == "treebag" || s == "TREEBAG" || s == "tree-bag") return Learner::TREEBAG;
    throw ConfigError("unknown learner '" + s + "' (knn, treebag)");
}

struct LearnerParams {
    std::vector<int> k_grid = {3, 5, 7, 9, 11};
    CvConfig cv;        // cv.seed is overwritten with the per-run seed
    int n_bags = 25;
    int min_node = 5;
    size_t min_rows = kMinPanelRows;
};

using AnyModel = std::variant<KnnModel, TreeBagModel>;

inline double model_predict(const AnyModel& m, const double* x) {
    return std::visit([&](const auto& mm) { return mm.predict(x); }, m);
}

inline std::vector<double> model_predict_rows(const AnyModel& m, const CountryDataset& d) {
    return std::visit([&](const auto& mm) { return mm.predict_rows(d); }, m);
}

inline const std::vector<std::string>& model_feature_names(const AnyModel& m) {
    return std::visit([](const auto& mm) -> const std::vector<std::string>& { return mm.feature_names; }, m);
}

inline AnyModel train_model(const CountryDataset& d, Learner learner, uint64_t seed,
                            const LearnerParams& params = {}) {
    if (learner == Learner::KNN) {
        CvConfig cv = params.cv;
        cv.seed = seed;
        return train_knn(d, cv, params.k_grid, params.min_rows);
    }
    return train_treebag(d, params.n_bags, params.min_node, seed, params.min_rows);
}

// One ensemble member: whole-sample (resubstitution) metrics of the model
// trained with seed = base_seed + run.
struct RunRecord {
    int run = 0;
    uint64_t seed = 0;
    double cor = 0.0;
    double rms_v = 0.0;
    double mae_v = 0.0;
    double mape_v = 0.0;
    double chip = 0.0;
    double chis = 0.0;
};

struct EnsembleResult {
    FitStatistics stats;
    std::vector<RunRecord> runs;
    std::vector<double> final_predictions; // from the last run's model
    AnyModel final_model;
};

namespace detail {

inline double mean_ignore_nan(const std::vector<double>& v) {
    double s = 0.0;
    size_t n = 0;
    for (double x : v)
        if (!std::isnan(x)) {
            s += x;
            ++n;
        }
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return s / double(n);
}

inline double sd_ignore_nan(const std::vector<double>& v) {
    double m = mean_ignore_nan(v);
    if (std::isnan(m)) return m;
    double s = 0.0;
    size_t n = 0;
    for (double x : v)
        if (!std::isnan(x)) {
            s += (x - m) * (x - m);
            ++n;
        }
    return std::sqrt(s / double(n));
}

} // namespace detail

// Collapse per-run records into the summary row. Correlation may be NaN for
// individual runs (constant predictions); M_COR/S_COR average the defined
// runs and stay NaN only if every run was undefined.
inline FitStatistics aggregate_runs(const std::string& label, const std::vector<RunRecord>& runs,
                                    const std::vector<double>& final_pred,
                                    const std::vector<double>& final_obs) {
    auto collect = [&](auto field) {
        std::vector<double> v(runs.size());
        for (size_t i = 0; i < v.size(); ++i) v[i] = field(runs[i]);
        return v;
    };
    FitStatistics s;
    s.label = label;
    auto cors = collect([](const RunRecord& r) { return r.cor; });
    s.m_cor = detail::mean_ignore_nan(cors);
    s.s_cor = detail::sd_ignore_nan(cors);
    auto rmss = collect([](const RunRecord& r) { return r.rms_v; });
    s.m_rms = mean_of(rmss);
    s.s_rms = stddev_pop(rmss);
    s.m_mae = mean_of(collect([](const RunRecord& r) { return r.mae_v; }));
    s.m_mape = mean_of(collect([](const RunRecord& r) { return r.mape_v; }));
    s.m_chip = detail::mean_ignore_nan(collect([](const RunRecord& r) { return r.chip; }));
    s.m_chis = detail::mean_ignore_nan(collect([](const RunRecord& r) { return r.chis; }));
    s.sd = residual_sd(final_pred, final_obs);
    return s;
}

// Repeated-seed ensemble: run r trains with seed base_seed + r and contributes
// one row of whole-sample metrics. Runs are independent, so they may execute
// on any number of threads; aggregation always walks run index order and the
// aggregate is bit-identical for any thread count. chi2 per run uses
// `chi_bins` bins (callers with very short panels pass fewer).
inline EnsembleResult ensemble_fit(const CountryDataset& d, Learner learner, int runs,
                                   uint64_t base_seed, const LearnerParams& params = {},
                                   int threads = 1, int chi_bins = 10) {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    EnsembleResult out;
    out.runs.resize(size_t(runs));
    std::vector<AnyModel> models(static_cast<size_t>(runs));

    parallel_for(size_t(runs), threads, [&](size_t r) {
        uint64_t seed = base_seed + r;
        AnyModel m = train_model(d, learner, seed, params);
        std::vector<double> pred = model_predict_rows(m, d);
        RunRecord rec;
        rec.run = int(r);
        rec.seed = seed;
        rec.cor = pearson(pred, d.y);
        rec.rms_v = rms(pred, d.y);
        rec.mae_v = mae(pred, d.y);
        rec.mape_v = mape(pred, d.y);
        Chi2Result c2 = chi2_pair_or_na(pred, d.y, chi_bins);
        rec.chip = c2.p_value;
        rec.chis = c2.normalized;
        out.runs[r] = rec;
        models[r] = std::move(m);
    });

    out.final_model = std::move(models.back());
    out.final_predictions = model_predict_rows(out.final_model, d);
    out.stats = aggregate_runs(d.country, out.runs, out.final_predictions, d.y);
    return out;
}

inline std::string run_records_csv(const std::vector<RunRecord>& runs) {
    CsvBuilder b;
    b.raw("run").raw("seed").raw("cor").raw("rms").raw("mae").raw("mape").raw("chip").raw("chis").end_row();
    for (const auto& r : runs) {
        b.raw(std::to_string(r.run)).raw(std::to_string(r.seed));
        b.num(r.cor).num(r.rms_v).num(r.mae_v).num(r.mape_v).num(r.chip).num(r.chis).end_row();
    }
    return b.text;
}

} // namespace hpm
