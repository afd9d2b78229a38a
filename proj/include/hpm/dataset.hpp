#pragma once

#include <map>
#include <string>
#include <vector>

#include "hpm/csv.hpp"
#include "hpm/errors.hpp"
#include "hpm/model_spec.hpp"
#include "hpm/series.hpp"

namespace hpm {

// Per-country collection of quarterly indicator series, already resampled to
// end-of-quarter and gap-filled where the source had interior holes.
struct SeriesBundle {
    std::string country;
    std::map<std::string, QuarterlySeries> series; // keyed by Indicator::name

    const QuarterlySeries& get(const Indicator& ind) const {
        auto it = series.find(ind.name);
        if (it == series.end())
            throw DataError(country + ": indicator " + ind.name + " missing from bundle");
        return it->second;
    }
    bool has(const Indicator& ind) const { return series.count(ind.name) > 0; }
};

// Aligned modelling panel: one row per quarter, features in spec order.
// Row-major storage; no NaN cells by construction (alignment is by
// intersection, never imputation across indicators).
struct CountryDataset {
    std::string country;
    std::string spec_name;
    std::string target_name;
    std::vector<std::string> feature_names;
    std::vector<Quarter> quarters;
    std::vector<double> x; // n_rows * n_features, row-major
    std::vector<double> y;

    size_t rows() const { return quarters.size(); }
    size_t cols() const { return feature_names.size(); }

    const double* row(size_t i) const { return x.data() + i * cols(); }

    std::vector<double> column(size_t j) const {
        std::vector<double> c(rows());
        for (size_t i = 0; i < rows(); ++i) c[i] = x[i * cols() + j];
        return c;
    }

    // First n rows (used by the hold-out diagnostic; the tail rows are
    // physically absent from the result, so training cannot touch them).
    CountryDataset head(size_t n) const {
        if (n > rows()) throw ConfigError("head(): n exceeds dataset length");
        CountryDataset d;
        d.country = country;
        d.spec_name = spec_name;
        d.target_name = target_name;
        d.feature_names = feature_names;
        d.quarters.assign(quarters.begin(), quarters.begin() + ptrdiff_t(n));
        d.x.assign(x.begin(), x.begin() + ptrdiff_t(n * cols()));
        d.y.assign(y.begin(), y.begin() + ptrdiff_t(n));
        return d;
    }
};

namespace detail {

// Rate forms are expressed in percent: the raw transform is the plain
// fraction (current-value denominator); published tables, grid axes and the
// linear-baseline coefficient scales all assume the x100 convention.
inline QuarterlySeries apply_form(const QuarterlySeries& s, Form f) {
    switch (f) {
        case Form::NOMINAL:
        case Form::AS_IS:
            return s;
        case Form::RATE_4Q:
        case Form::RATE_12Q: {
            QuarterlySeries r = rate_over(s, f == Form::RATE_4Q ? 4 : 12);
            for (auto& p : r.points) p.value *= 100.0;
            return r;
        }
    }
    throw ConfigError("unhandled form");
}

} // namespace detail

// Build the aligned panel for one spec: apply each feature form, transform the
// target, and intersect quarters across every column. Rows are emitted only
// for quarters where all features and the target exist.
inline CountryDataset assemble_dataset(const SeriesBundle& bundle, const ModelSpec& spec) {
    CountryDataset d;
    d.country = bundle.country;
    d.spec_name = spec.name;
    d.target_name = to_string(spec.target);

    std::vector<QuarterlySeries> cols;
    cols.reserve(spec.features.size());
    for (const auto& f : spec.features) {
        d.feature_names.push_back(f.indicator.name);
        cols.push_back(detail::apply_form(bundle.get(f.indicator), f.form));
        if (cols.back().empty())
            throw DataError(bundle.country + ": feature " + f.indicator.name +
                            " is empty after applying form " + to_string(f.form));
    }
    QuarterlySeries target = spec.target == TargetForm::HPI_NOMINAL
                                 ? bundle.get(indicator::HPI)
                                 : detail::apply_form(bundle.get(indicator::HPI), Form::RATE_12Q);
    if (target.empty()) throw DataError(bundle.country + ": target series empty after transform");

    for (const auto& tp : target.points) {
        std::vector<double> row;
        row.reserve(cols.size());
        bool complete = true;
        for (const auto& c : cols) {
            auto v = c.at(tp.quarter);
            if (!v) {
                complete = false;
                break;
            }
            row.push_back(*v);
        }
        if (!complete) continue;
        d.quarters.push_back(tp.quarter);
        d.x.insert(d.x.end(), row.begin(), row.end());
        d.y.push_back(tp.value);
    }
    if (d.quarters.empty())
        throw DataError(bundle.country + ": no overlapping quarters across indicators for spec " + spec.name);
    return d;
}

inline std::string dataset_csv(const CountryDataset& d) {
    CsvBuilder b;
    b.raw("quarter").raw("y");
    for (const auto& n : d.feature_names) b.raw(n);
    b.end_row();
    for (size_t i = 0; i < d.rows(); ++i) {
        b.raw(d.quarters[i].str()).num(d.y[i]);
        for (size_t j = 0; j < d.cols(); ++j) b.num(d.row(i)[j]);
        b.end_row();
    }
    return b.text;
}

} // namespace hpm
