#pragma once

#include <string>
#include <vector>

#include "hpm/adf.hpp"
#include "hpm/csv.hpp"
#include "hpm/dataset.hpp"
#include "hpm/ensemble.hpp"
#include "hpm/metrics.hpp"
#include "hpm/parallel.hpp"
#include "hpm/rng.hpp"

namespace hpm {

namespace detail {

// Stable seed for the fresh permutation of feature block `block` in run `r`;
// decoupled from the training seed so permuting never perturbs the learner's
// own randomness.
inline uint64_t permutation_seed(uint64_t base_seed, size_t block, size_t run) {
    uint64_t x = base_seed ^ (0x9e3779b97f4a7c15ULL * (block + 1));
    x ^= 0xbf58476d1ce4e5b9ULL * (run + 1);
    x ^= x >> 31;
    return x;
}

} // namespace detail

// One model fit on a panel whose listed feature columns are shuffled by the
// given permutations. Metrics are resubstitution on the shuffled panel.
inline RunRecord permuted_run(const CountryDataset& d, Learner learner, uint64_t train_seed,
                              const std::vector<size_t>& features,
                              const std::vector<std::vector<size_t>>& perms,
                              const LearnerParams& params = {}, int chi_bins = 10) {
    if (features.size() != perms.size()) throw ConfigError("feature/permutation count mismatch");
    CountryDataset work = d;
    for (size_t fi = 0; fi < features.size(); ++fi) {
        size_t j = features[fi];
        if (j >= d.cols()) throw ConfigError("feature index out of range");
        if (perms[fi].size() != d.rows()) throw ConfigError("permutation length mismatch");
        for (size_t i = 0; i < d.rows(); ++i) work.x[i * d.cols() + j] = d.x[perms[fi][i] * d.cols() + j];
    }
    AnyModel m = train_model(work, learner, train_seed, params);
    std::vector<double> pred = model_predict_rows(m, work);
    RunRecord rec;
    rec.seed = train_seed;
    rec.cor = pearson(pred, work.y);
    rec.rms_v = rms(pred, work.y);
    rec.mae_v = mae(pred, work.y);
    rec.mape_v = mape(pred, work.y);
    Chi2Result c2 = chi2_pair_or_na(pred, work.y, chi_bins);
    rec.chip = c2.p_value;
    rec.chis = c2.normalized;
    return rec;
}

struct PermutationEntry {
    std::string feature; // "ALL" = every feature shuffled jointly
    FitStatistics stats;
};

struct PermutationReport {
    FitStatistics baseline;
    std::vector<PermutationEntry> permuted;
};

// Sensitivity by destruction: each feature column is shuffled with a fresh
// permutation per run and the model retrained; a feature the model relies on
// degrades the fit when destroyed. The trailing ALL entry shuffles every
// column (independently) at once.
inline PermutationReport permutation_test(const CountryDataset& d, Learner learner, int runs,
                                          uint64_t base_seed, const LearnerParams& params = {},
                                          int threads = 1) {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    PermutationReport rep;
    EnsembleResult base = ensemble_fit(d, learner, runs, base_seed, params, threads);
    rep.baseline = base.stats;

    size_t p = d.cols();
    for (size_t block = 0; block <= p; ++block) {
        bool all = block == p;
        std::vector<size_t> features;
        if (all)
            for (size_t j = 0; j < p; ++j) features.push_back(j);
        else
            features.push_back(block);

        std::vector<RunRecord> runs_acc(static_cast<size_t>(runs));
        std::vector<double> final_pred;
        parallel_for(size_t(runs), threads, [&](size_t r) {
            std::vector<std::vector<size_t>> perms;
            for (size_t fi = 0; fi < features.size(); ++fi) {
                Rng prng(detail::permutation_seed(base_seed, block * (p + 1) + fi, r));
                perms.push_back(prng.permutation(d.rows()));
            }
            RunRecord rec = permuted_run(d, learner, base_seed + r, features, perms, params);
            rec.run = int(r);
            runs_acc[r] = rec;
        });
        // Final-run residual SD needs the last run's predictions; rebuild them
        // deterministically from the same seeds.
        {
            size_t r = size_t(runs) - 1;
            std::vector<std::vector<size_t>> perms;
            for (size_t fi = 0; fi < features.size(); ++fi) {
                Rng prng(detail::permutation_seed(base_seed, block * (p + 1) + fi, r));
                perms.push_back(prng.permutation(d.rows()));
            }
            CountryDataset work = d;
            for (size_t fi = 0; fi < features.size(); ++fi) {
                size_t j = features[fi];
                for (size_t i = 0; i < d.rows(); ++i)
                    work.x[i * d.cols() + j] = d.x[perms[fi][i] * d.cols() + j];
            }
            AnyModel m = train_model(work, learner, base_seed + r, params);
            final_pred = model_predict_rows(m, work);
        }
        PermutationEntry e;
        e.feature = all ? "ALL" : d.feature_names[block];
        e.stats = aggregate_runs(d.country, runs_acc, final_pred, d.y);
        rep.permuted.push_back(std::move(e));
    }
    return rep;
}

inline std::string permutation_csv(const PermutationReport& rep) {
    CsvBuilder b;
    b.raw("feature").raw("M_RMS_baseline").raw("M_RMS_permuted").raw("rms_ratio").raw("M_COR_permuted")
        .raw("M_MAE_permuted").end_row();
    for (const auto& e : rep.permuted) {
        b.raw(e.feature).num(rep.baseline.m_rms).num(e.stats.m_rms)
            .num(e.stats.m_rms / rep.baseline.m_rms).num(e.stats.m_cor).num(e.stats.m_mae).end_row();
    }
    return b.text;
}

struct HoldoutReport {
    FitStatistics stats;
    std::vector<Quarter> quarters;   // the 4 held-out quarters
    std::vector<double> observed;    // observed targets
    std::vector<double> mean_pred;   // ensemble mean prediction per quarter
    std::vector<double> sd_pred;     // ensemble SD per quarter
    std::vector<double> final_pred;  // last run's path
};

// Train on everything but the last `horizon` quarters, predict those from
// their observed features. The training panel is a physical copy without the
// tail, so held-out targets cannot leak into training. The short pair
// histogram uses 2 bins (the default 10 needs >= 20 points).
inline HoldoutReport holdout_tail(const CountryDataset& d, Learner learner, int runs,
                                  uint64_t base_seed, size_t horizon,
                                  const LearnerParams& params = {}, int threads = 1) {
    const size_t H = horizon;
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (H < 2) throw ConfigError("hold-out horizon must be >= 2");
    if (d.rows() < H + 2)
        throw DataError(d.country + ": panel too short for a " + std::to_string(H) +
                        "-quarter hold-out");
    CountryDataset train = d.head(d.rows() - H);

    HoldoutReport rep;
    for (size_t i = d.rows() - H; i < d.rows(); ++i) {
        rep.quarters.push_back(d.quarters[i]);
        rep.observed.push_back(d.y[i]);
    }
    rep.mean_pred.assign(H, 0.0);
    rep.sd_pred.assign(H, 0.0);

    std::vector<RunRecord> runs_acc(static_cast<size_t>(runs));
    std::vector<std::vector<double>> paths(static_cast<size_t>(runs), std::vector<double>(H));
    parallel_for(size_t(runs), threads, [&](size_t r) {
        AnyModel m = train_model(train, learner, base_seed + r, params);
        std::vector<double> pred(H);
        for (size_t i = 0; i < H; ++i) pred[i] = model_predict(m, d.row(d.rows() - H + i));
        RunRecord rec;
        rec.run = int(r);
        rec.seed = base_seed + r;
        rec.cor = pearson(pred, rep.observed);
        rec.rms_v = rms(pred, rep.observed);
        rec.mae_v = mae(pred, rep.observed);
        rec.mape_v = mape(pred, rep.observed);
        Chi2Result c2 = chi2_pair_or_na(pred, rep.observed, 2);
        rec.chip = c2.p_value;
        rec.chis = c2.normalized;
        runs_acc[r] = rec;
        paths[r] = pred;
    });

    for (size_t i = 0; i < H; ++i) {
        std::vector<double> col(static_cast<size_t>(runs));
        for (size_t r = 0; r < size_t(runs); ++r) col[r] = paths[r][i];
        rep.mean_pred[i] = mean_of(col);
        rep.sd_pred[i] = stddev_pop(col);
    }
    rep.final_pred = paths.back();
    rep.stats = aggregate_runs(d.country, runs_acc, rep.final_pred, rep.observed);
    return rep;
}

inline HoldoutReport holdout_last4(const CountryDataset& d, Learner learner, int runs,
                                   uint64_t base_seed, const LearnerParams& params = {},
                                   int threads = 1) {
    return holdout_tail(d, learner, runs, base_seed, 4, params, threads);
}

inline std::string holdout_csv(const HoldoutReport& rep) {
    CsvBuilder b;
    b.raw("quarter").raw("observed").raw("mean_pred").raw("sd_pred").raw("final_pred").end_row();
    for (size_t i = 0; i < rep.quarters.size(); ++i) {
        b.raw(rep.quarters[i].str()).num(rep.observed[i]).num(rep.mean_pred[i]).num(rep.sd_pred[i])
            .num(rep.final_pred[i]).end_row();
    }
    return b.text;
}

} // namespace hpm
