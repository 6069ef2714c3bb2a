// rng.hpp — Deterministic Gaussian stream. Hand-rolled Marsaglia polar
// sampling on top of mt19937_64 so that a seed pins the exact sequence
// independent of standard-library distribution internals.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ctqw {

class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 significant bits.
    double uniform01() { return double(engine_() >> 11) * 0x1.0p-53; }

    // Standard normal.
    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ctqw
