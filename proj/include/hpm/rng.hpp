#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace hpm {

// mt19937_64 with hand-rolled distributions. The standard distribution objects
// are implementation-defined, which would break bit-reproducibility of seeded
// runs across standard libraries; the algorithms below are fixed.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Unbiased integer in [0, bound) by rejection.
    uint64_t below(uint64_t bound) {
        if (bound == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform in [0,1) with 53-bit resolution.
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar method; one spare value cached.
    double normal(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return mean + sd * (u * f);
    }

    // Normal truncated by redrawing until the draw falls within +/- bound.
    double truncated_normal(double sd, double bound) {
        double x;
        do {
            x = normal(0.0, sd);
        } while (std::abs(x) > bound);
        return x;
    }

    // Fisher-Yates; identity permutation of size n shuffled in place.
    std::vector<size_t> permutation(size_t n) {
        std::vector<size_t> p(n);
        std::iota(p.begin(), p.end(), size_t(0));
        for (size_t i = n; i > 1; --i) {
            size_t j = size_t(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    // n draws with replacement from [0, n).
    std::vector<size_t> bootstrap_indices(size_t n) {
        std::vector<size_t> idx(n);
        for (auto& v : idx) v = size_t(below(n));
        return idx;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace hpm
