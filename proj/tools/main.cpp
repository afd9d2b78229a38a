// Command-line front-end for the modeling pipeline. Subcommands: ingest,
// fit, diagnose {permute|adf|holdout}, predict-grid, benchmark, correlate.
// Exit codes: 0 success, 2 configuration or usage fault, 3 data fault,
// 4 numerical failure. All randomness flows from the manifest's base_seed
// unless --seed is given; no command reads system entropy.
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hpm/hpm.hpp"

namespace fs = std::filesystem;
using namespace hpm;

namespace {

struct CommonOpts {
    std::string manifest_path;
    std::string out_dir = "out";
    int64_t seed = -1; // negative = use the manifest's base_seed
    int runs = 600;
    int threads = 0; // 0 = hardware default
    std::string country;
    std::string spec;
    std::string learner = "treebag";
};

int thread_count(const CommonOpts& o) { return o.threads > 0 ? o.threads : default_thread_count(); }

uint64_t effective_seed(const CommonOpts& o, const Manifest& m) {
    return o.seed >= 0 ? uint64_t(o.seed) : m.base_seed;
}

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s)
        if (c != '-') out += char(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// One directory per configured run; the hash keeps runs with different
// configurations from silently overwriting each other.
fs::path run_dir(const CommonOpts& o, uint64_t seed) {
    std::string cfg = o.country + "|" + o.spec + "|" + o.learner + "|" + std::to_string(o.runs) +
                      "|" + std::to_string(seed);
    char hex[16];
    std::snprintf(hex, sizeof hex, "%08x", unsigned(fnv1a(cfg) & 0xffffffffu));
    return fs::path(o.out_dir) / (slug(o.country) + "_" + slug(o.spec) + "_" + o.learner + "_" + hex);
}

CountryDataset load_dataset(const Manifest& m, const std::string& country,
                            const std::string& spec_name) {
    BundleLoad b = load_country_bundle(m, country);
    return assemble_dataset(b.bundle, find_spec(spec_name));
}

void cmd_ingest(const CommonOpts& o) {
    Manifest m = load_manifest(o.manifest_path);
    std::vector<std::string> countries =
        o.country.empty() ? m.country_list() : std::vector<std::string>{o.country};
    for (const auto& c : countries) {
        BundleLoad b = load_country_bundle(m, c);
        std::printf("%s\n", c.c_str());
        for (const auto& cov : b.coverage)
            std::printf("  %-12s %s..%s observed=%zu gaps=%zu interpolated=%zu\n",
                        cov.indicator.c_str(), cov.first.str().c_str(), cov.last.str().c_str(),
                        cov.observed, cov.gaps, cov.interpolated);
        atomic_write_file(fs::path(o.out_dir) / (slug(c) + "_coverage.csv"),
                          coverage_csv(b.coverage));
        for (const auto& spec : builtin_specs()) {
            std::string missing;
            for (const auto& f : spec.features)
                if (!b.bundle.has(f.indicator)) missing = f.indicator.name;
            if (!missing.empty()) {
                std::printf("  skip %s: missing %s\n", spec.name.c_str(), missing.c_str());
                continue;
            }
            CountryDataset d;
            try {
                d = assemble_dataset(b.bundle, spec);
            } catch (const DataError& e) {
                std::printf("  skip %s: %s\n", spec.name.c_str(), e.what());
                continue;
            }
            fs::path f = fs::path(o.out_dir) / (slug(c) + "_" + slug(spec.name) + ".csv");
            atomic_write_file(f, dataset_csv(d));
            std::printf("  wrote %s (%zu rows)\n", f.string().c_str(), d.rows());
        }
    }
}

void cmd_fit(const CommonOpts& o) {
    Manifest m = load_manifest(o.manifest_path);
    Learner l = learner_from_string(o.learner);
    uint64_t seed = effective_seed(o, m);
    CountryDataset d = load_dataset(m, o.country, o.spec);
    EnsembleResult r = ensemble_fit(d, l, o.runs, seed, {}, thread_count(o));

    fs::path dir = run_dir(o, seed);
    std::string stats = fit_statistics_csv_header() + fit_statistics_csv_row(r.stats);
    atomic_write_file(dir / "fit_statistics.csv", stats);
    atomic_write_file(dir / "runs.csv", run_records_csv(r.runs));
    std::vector<ImportanceReport> reps = {filter_importance(d)};
    if (l == Learner::TREEBAG)
        reps.push_back(tree_sse_importance(std::get<TreeBagModel>(r.final_model)));
    atomic_write_file(dir / "importance.csv", importance_csv(reps));
    save_model((dir / "model.json").string(), r.final_model, d.country, d.spec_name);

    std::fputs(stats.c_str(), stdout);
    std::printf("artifacts -> %s\n", dir.string().c_str());
}

void cmd_permute(const CommonOpts& o) {
    Manifest m = load_manifest(o.manifest_path);
    Learner l = learner_from_string(o.learner);
    uint64_t seed = effective_seed(o, m);
    CountryDataset d = load_dataset(m, o.country, o.spec);
    PermutationReport rep = permutation_test(d, l, o.runs, seed, {}, thread_count(o));
    std::string csv = permutation_csv(rep);
    atomic_write_file(run_dir(o, seed) / "permutation.csv", csv);
    std::fputs(csv.c_str(), stdout);
}

// Runs over the residuals of every fitted artifact under the output
// directory, whatever configuration produced it.
void cmd_adf(const CommonOpts& o) {
    Manifest m = load_manifest(o.manifest_path);
    std::vector<fs::path> artifacts;
    if (fs::exists(o.out_dir))
        for (const auto& e : fs::recursive_directory_iterator(o.out_dir))
            if (e.is_regular_file() && e.path().filename() == "model.json")
                artifacts.push_back(e.path());
    std::sort(artifacts.begin(), artifacts.end());
    if (artifacts.empty())
        throw ConfigError("no fitted models under " + o.out_dir + " (run fit first)");

    CsvBuilder b;
    b.raw("country").raw("spec").raw("learner").raw("statistic").raw("p_value").raw("lags")
        .raw("nobs").raw("stationary_5pct").end_row();
    for (const auto& p : artifacts) {
        LoadedModel lm = load_model(p.string());
        CountryDataset d = load_dataset(m, lm.country, lm.spec_name);
        std::vector<double> pred = model_predict_rows(lm.model, d);
        std::vector<double> res(d.rows());
        for (size_t i = 0; i < d.rows(); ++i) res[i] = d.y[i] - pred[i];
        AdfResult a = adf_test(res, AdfRegression::CONST);
        b.raw(lm.country).raw(lm.spec_name)
            .raw(std::holds_alternative<KnnModel>(lm.model) ? "knn" : "treebag")
            .num(a.statistic).num(a.p_value).raw(std::to_string(a.lags))
            .raw(std::to_string(a.nobs)).raw(a.p_value < 0.05 ? "1" : "0").end_row();
    }
    atomic_write_file(fs::path(o.out_dir) / "adf_residuals.csv", b.text);
    std::fputs(b.text.c_str(), stdout);
}

void cmd_holdout(const CommonOpts& o) {
    Manifest m = load_manifest(o.manifest_path);
    Learner l = learner_from_string(o.learner);
    uint64_t seed = effective_seed(o, m);
    CountryDataset d = load_dataset(m, o.country, o.spec);
    HoldoutReport rep = holdout_last4(d, l, o.runs, seed, {}, thread_count(o));
    std::string csv = holdout_csv(rep);
    atomic_write_file(run_dir(o, seed) / "holdout.csv", csv);
    std::fputs(csv.c_str(), stdout);
    std::fputs((fit_statistics_csv_header() + fit_statistics_csv_row(rep.stats)).c_str(), stdout);
}

GridAxis parse_axis(const std::string& s) {
    size_t p3 = s.rfind(':');
    size_t p2 = p3 == std::string::npos || p3 == 0 ? std::string::npos : s.rfind(':', p3 - 1);
    size_t p1 = p2 == std::string::npos || p2 == 0 ? std::string::npos : s.rfind(':', p2 - 1);
    if (p1 == std::string::npos)
        throw ConfigError("--axis expects name:lo:hi:count, got '" + s + "'");
    GridAxis a;
    a.feature = s.substr(0, p1);
    try {
        a.lo = std::stod(s.substr(p1 + 1, p2 - p1 - 1));
        a.hi = std::stod(s.substr(p2 + 1, p3 - p2 - 1));
        a.count = std::stoul(s.substr(p3 + 1));
    } catch (const std::exception&) {
        throw ConfigError("--axis expects name:lo:hi:count, got '" + s + "'");
    }
    return a;
}

// Published sweep ranges: growth and inflation -2..2%, treasury rate 0..4%,
// central-bank assets 5.5e6..7.5e6 MEUR, 20 points per axis.
std::vector<GridAxis> default_axes(const std::vector<std::string>& features) {
    std::vector<GridAxis> axes;
    for (const auto& f : features) {
        if (f == "GDP" || f == "CPI")
            axes.push_back({f, -2.0, 2.0, 20});
        else if (f == "TR10Y")
            axes.push_back({f, 0.0, 4.0, 20});
        else if (f == "ECB")
            axes.push_back({f, 5.5e6, 7.5e6, 20});
        else
            throw ConfigError("no default axis for feature " + f +
                              "; pass --axis " + f + ":lo:hi:count");
    }
    return axes;
}

void cmd_grid(const CommonOpts& o, const std::vector<std::string>& axis_flags, bool full) {
    Manifest m = load_manifest(o.manifest_path);
    Learner l = learner_from_string(o.learner);
    uint64_t seed = effective_seed(o, m);
    CountryDataset d = load_dataset(m, o.country, o.spec);
    AnyModel model = train_model(d, l, seed);

    std::vector<GridAxis> axes;
    if (axis_flags.empty()) {
        axes = default_axes(d.feature_names);
    } else {
        for (const auto& s : axis_flags) axes.push_back(parse_axis(s));
    }
    ScenarioResult res = predict_grid(model, axes, thread_count(o));
    GridSummary summary = summarize_grid(res.predictions);

    fs::path dir = run_dir(o, seed);
    std::string scsv = grid_summary_csv(summary, d.y.back());
    atomic_write_file(dir / "scenario_summary.csv", scsv);
    atomic_write_file(dir / "scenario_hist.csv", histogram_csv(summary));
    if (full) atomic_write_file(dir / "scenario_predictions.csv", scenario_csv(res));
    std::fputs(scsv.c_str(), stdout);
}

void cmd_benchmark(const CommonOpts& o) {
    Manifest m = load_manifest(o.manifest_path);
    uint64_t seed = effective_seed(o, m);
    CountryDataset d = load_dataset(m, o.country, o.spec);
    BenchmarkTable t = benchmark_table(d, 4, o.runs, seed, {}, thread_count(o));
    std::string csv = benchmark_csv(t);
    atomic_write_file(fs::path(o.out_dir) / (slug(o.country) + "_" + slug(o.spec) + "_benchmark.csv"),
                      csv);
    std::fputs(csv.c_str(), stdout);
}

void cmd_correlate(const CommonOpts& o) {
    Manifest m = load_manifest(o.manifest_path);
    auto all = load_hpi_all(m);
    std::map<std::string, QuarterlySeries> sel;
    for (const auto& c : m.country_list()) {
        auto it = all.find(c);
        if (it == all.end() || it->second.empty())
            throw DataError(m.hpi_path + ": no house-price column for " + c);
        sel[c] = it->second;
    }
    if (sel.size() < 2) throw DataError("correlation needs at least two countries");
    CorrelationMatrix mat = hpi_correlation_matrix(sel);
    std::string csv = correlation_csv(mat);
    atomic_write_file(fs::path(o.out_dir) / "hpi_correlation.csv", csv);
    std::fputs(csv.c_str(), stdout);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"macro-factor house-price modeling pipeline"};
    app.require_subcommand(1);

    CommonOpts o;
    std::vector<std::string> axis_flags;
    bool full = false;

    auto add_common = [&](CLI::App* c, bool need_country, bool need_spec) {
        c->add_option("--manifest", o.manifest_path, "manifest JSON file")
            ->envname("HPM_MANIFEST")
            ->required();
        c->add_option("--out", o.out_dir, "output directory (default: out)");
        c->add_option("--seed", o.seed, "base seed (default: the manifest's base_seed)");
        c->add_option("--runs", o.runs, "ensemble runs (default: 600)");
        c->add_option("--threads", o.threads, "worker threads (default: hardware count)");
        auto* co = c->add_option("--country", o.country, "country code");
        if (need_country) co->required();
        auto* sp = c->add_option("--spec", o.spec, "model spec name");
        if (need_spec) sp->required();
        c->add_option("--learner", o.learner, "knn or treebag (default: treebag)");
    };

    auto* ing = app.add_subcommand("ingest", "dump aligned datasets and coverage reports");
    add_common(ing, false, false);
    ing->callback([&] { cmd_ingest(o); });

    auto* fit = app.add_subcommand("fit", "train a seeded ensemble and save its artifacts");
    add_common(fit, true, true);
    fit->callback([&] { cmd_fit(o); });

    auto* diag = app.add_subcommand("diagnose", "model diagnostics");
    diag->require_subcommand(1);
    auto* dp = diag->add_subcommand("permute", "feature permutation sensitivity");
    add_common(dp, true, true);
    dp->callback([&] { cmd_permute(o); });
    auto* da = diag->add_subcommand("adf", "residual stationarity for every fitted artifact");
    add_common(da, false, false);
    da->callback([&] { cmd_adf(o); });
    auto* dh = diag->add_subcommand("holdout", "train without the last four quarters, predict them");
    add_common(dh, true, true);
    dh->callback([&] { cmd_holdout(o); });

    auto* pg = app.add_subcommand("predict-grid", "sweep a trained model over a scenario grid");
    add_common(pg, true, true);
    pg->add_option("--axis", axis_flags, "grid axis as name:lo:hi:count (repeat per feature)");
    pg->add_flag("--full", full, "also write the full per-row predictions CSV");
    pg->callback([&] { cmd_grid(o, axis_flags, full); });

    auto* bm = app.add_subcommand("benchmark", "compare VAR, linear, GLM and ML on held-out quarters");
    add_common(bm, true, false);
    bm->callback([&] {
        if (o.spec.empty()) o.spec = "ecb-1yr";
        cmd_benchmark(o);
    });

    auto* cr = app.add_subcommand("correlate", "cross-country price index correlation matrix");
    add_common(cr, false, false);
    cr->callback([&] { cmd_correlate(o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
