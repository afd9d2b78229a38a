// Minimal end-to-end walkthrough on a synthetic panel: build a dataset in
// memory, train both learners, print ensemble statistics and importances.
#include <cstdio>

#include "hpm/hpm.hpp"

int main() {
    using namespace hpm;

    // 60 quarters of a toy economy: the target follows two of the three
    // features; the third is noise.
    CountryDataset d;
    d.country = "DEMO";
    d.spec_name = "toy";
    d.target_name = "PRICE";
    d.feature_names = {"GROWTH", "RATE", "NOISE"};
    Rng rng(7);
    Quarter q{2008, 1};
    for (int i = 0; i < 60; ++i) {
        double growth = 2.0 + 1.5 * std::sin(i / 6.0) + 0.2 * rng.normal();
        double rate = 3.0 + 1.2 * std::cos(i / 9.0) + 0.2 * rng.normal();
        double noise = rng.normal();
        d.quarters.push_back(q);
        q = q.next();
        d.x.insert(d.x.end(), {growth, rate, noise});
        d.y.push_back(100.0 + 8.0 * growth - 5.0 * rate + 0.5 * rng.normal());
    }

    for (Learner l : {Learner::KNN, Learner::TREEBAG}) {
        EnsembleResult r = ensemble_fit(d, l, 20, 42, {}, default_thread_count());
        std::printf("%-8s M_COR=%.3f M_RMS=%.3f M_MAPE=%.4f\n", to_string(l).c_str(),
                    r.stats.m_cor, r.stats.m_rms, r.stats.m_mape);
        if (l == Learner::TREEBAG) {
            auto imp = tree_sse_importance(std::get<TreeBagModel>(r.final_model));
            for (const auto& e : imp.entries)
                std::printf("  importance %-7s %6.1f\n", e.feature.c_str(), e.score);
        }
    }

    LinearCoefficients glm = fit_glm(d);
    std::printf("glm      intercept=%.2f", glm.intercept);
    for (size_t j = 0; j < glm.beta.size(); ++j)
        std::printf(" %s=%.2f", glm.feature_names[j].c_str(), glm.beta[j]);
    std::printf("\n");
    return 0;
}
