#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace itele {

/// Deterministic RNG wrapper. std:: distributions are implementation-defined,
/// so all draws go through fixed transforms of the mt19937_64 stream; output
/// is identical for a given seed on any platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    /// Child generator for parallel/independent work units: seed + index rule.
    static Rng derive(uint64_t seed, uint64_t index) { return Rng(seed + index); }

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t uniform_int(uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    /// Standard normal via Box-Muller (fixed algorithm, cached second value).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        u2 = uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(6.283185307179586 * u2);
        has_spare_ = true;
        return mag * std::cos(6.283185307179586 * u2);
    }

    /// In-place Fisher-Yates shuffle.
    template <typename Vec>
    void shuffle(Vec& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace itele
