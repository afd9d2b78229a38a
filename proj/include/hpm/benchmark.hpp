#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpm/csv.hpp"
#include "hpm/dataset.hpp"
#include "hpm/diagnostics.hpp"
#include "hpm/ensemble.hpp"
#include "hpm/linreg.hpp"
#include "hpm/var.hpp"

namespace hpm {

struct BenchmarkColumn {
    std::string method;
    std::vector<double> pred;
    std::vector<double> se;  // empty when the method has no error band
    double sign_accuracy = 0.0;
};

// Out-of-sample horse race over the last `horizon` quarters: every method is
// trained on the amended panel (tail removed), then asked for the held-out
// path. Linear baselines and the ML ensembles see the observed exogenous
// features; the VAR forecasts conditionally on them.
struct BenchmarkTable {
    std::string country;
    std::string spec_name;
    std::vector<Quarter> quarters;
    std::vector<double> observed;
    double last_train_y = 0.0; // reference level for the sign of change
    std::vector<BenchmarkColumn> columns;
};

namespace detail {

// Fraction of horizon steps whose predicted direction of change from the last
// training level matches the observed direction. Zero change counts as a
// match only against zero observed change.
inline double sign_accuracy(const std::vector<double>& pred, const std::vector<double>& obs,
                            double reference) {
    size_t hits = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        double ps = pred[i] - reference, os = obs[i] - reference;
        int psig = ps > 0 ? 1 : ps < 0 ? -1 : 0;
        int osig = os > 0 ? 1 : os < 0 ? -1 : 0;
        if (psig == osig) ++hits;
    }
    return double(hits) / double(pred.size());
}

} // namespace detail

inline BenchmarkTable benchmark_table(const CountryDataset& d, int horizon = 4,
                                      int ml_runs = 600, uint64_t base_seed = 1,
                                      const LearnerParams& params = {}, int threads = 1,
                                      int var_p = 2, Deterministic var_det = Deterministic::BOTH) {
    if (horizon < 1) throw ConfigError("benchmark horizon must be >= 1");
    size_t H = size_t(horizon);
    if (d.rows() < H + 2) throw DataError(d.country + ": panel too short for the benchmark horizon");

    BenchmarkTable t;
    t.country = d.country;
    t.spec_name = d.spec_name;
    CountryDataset train = d.head(d.rows() - H);
    t.last_train_y = train.y.back();
    for (size_t i = d.rows() - H; i < d.rows(); ++i) {
        t.quarters.push_back(d.quarters[i]);
        t.observed.push_back(d.y[i]);
    }

    // Joint panel [target, features...] for the VAR; the held-out feature
    // paths are fed back as observed exogenous inputs.
    {
        std::vector<std::string> names = {"target"};
        for (const auto& n : d.feature_names) names.push_back(n);
        Eigen::MatrixXd panel(long(train.rows()), long(1 + train.cols()));
        for (size_t i = 0; i < train.rows(); ++i) {
            panel(long(i), 0) = train.y[i];
            for (size_t j = 0; j < train.cols(); ++j) panel(long(i), long(1 + j)) = train.row(i)[j];
        }
        VarModel vm = fit_var(names, panel, var_p, var_det);
        Eigen::MatrixXd exo(long(H), long(1 + d.cols()));
        exo.setZero();
        for (size_t i = 0; i < H; ++i)
            for (size_t j = 0; j < d.cols(); ++j)
                exo(long(i), long(1 + j)) = d.row(d.rows() - H + i)[j];
        VarForecast f = forecast_var(vm, horizon, ForecastMode::CONDITIONAL, exo, 0);
        BenchmarkColumn col;
        col.method = "var";
        for (size_t i = 0; i < H; ++i) {
            col.pred.push_back(f.point(long(i), 0));
            col.se.push_back(f.se(long(i), 0));
        }
        col.sign_accuracy = detail::sign_accuracy(col.pred, t.observed, t.last_train_y);
        t.columns.push_back(std::move(col));
    }

    auto linear_column = [&](const std::string& method, const LinearCoefficients& c) {
        BenchmarkColumn col;
        col.method = method;
        for (size_t i = 0; i < H; ++i) col.pred.push_back(c.predict(d.row(d.rows() - H + i)));
        col.sign_accuracy = detail::sign_accuracy(col.pred, t.observed, t.last_train_y);
        t.columns.push_back(std::move(col));
    };
    linear_column("li", linear_inversion(train));
    linear_column("glm", fit_glm(train));

    for (Learner l : {Learner::KNN, Learner::TREEBAG}) {
        HoldoutReport rep = holdout_tail(d, l, ml_runs, base_seed, H, params, threads);
        BenchmarkColumn col;
        col.method = "ml_" + to_string(l);
        col.pred = rep.mean_pred;
        col.se = rep.sd_pred;
        col.sign_accuracy = detail::sign_accuracy(col.pred, t.observed, t.last_train_y);
        t.columns.push_back(std::move(col));
    }
    return t;
}

// Layout: one row per held-out quarter, observed first, then per-method
// prediction (plus SE where available); trailing sign_accuracy summary row.
inline std::string benchmark_csv(const BenchmarkTable& t) {
    CsvBuilder b;
    b.raw("quarter").raw("observed");
    for (const auto& c : t.columns) {
        b.raw(c.method);
        if (!c.se.empty()) b.raw(c.method + "_se");
    }
    b.end_row();
    for (size_t i = 0; i < t.quarters.size(); ++i) {
        b.raw(t.quarters[i].str()).num(t.observed[i]);
        for (const auto& c : t.columns) {
            b.num(c.pred[i]);
            if (!c.se.empty()) b.num(c.se[i]);
        }
        b.end_row();
    }
    b.raw("sign_accuracy").raw("");
    for (const auto& c : t.columns) {
        b.num(c.sign_accuracy);
        if (!c.se.empty()) b.raw("");
    }
    b.end_row();
    return b.text;
}

} // namespace hpm
