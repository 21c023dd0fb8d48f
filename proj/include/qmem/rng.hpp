#pragma once

#include <cmath>
#include <cstdint>

namespace qmem {

// Counter-style generator built on splitmix64. Every ensemble member gets an
// independent stream keyed by (seed, index), so results do not depend on the
// order in which members are evaluated or on the number of worker threads.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    // Stream for ensemble member `index` under master `seed`.
    static SplitMix64 for_index(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 mix(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
        mix.next_u64();  // decorrelate nearby indices
        return mix;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1); never returns 0 or 1 exactly.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (both values used, cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Standard Cauchy (Lorentzian with FWHM 2) via inverse CDF.
    double cauchy() {
        return std::tan(3.14159265358979323846 * (uniform() - 0.5));
    }

    // Poisson sample; exact inversion in chunks so large means neither
    // underflow nor lose determinism.
    std::uint64_t poisson(double mean) {
        std::uint64_t total = 0;
        while (mean > 30.0) {
            total += poisson_small(30.0);
            mean -= 30.0;
        }
        if (mean > 0.0) total += poisson_small(mean);
        return total;
    }

  private:
    std::uint64_t poisson_small(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = uniform();
        while (p > limit) {
            ++k;
            p *= uniform();
        }
        return k;
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace qmem
