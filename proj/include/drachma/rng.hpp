#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace drachma {

/// Splitmix64-style generator with explicit stream splitting.  Each
/// (seed, stream) pair gets a pseudorandom initial state and its own odd
/// increment, so the draw sequences of nearby streams are unrelated (a shared
/// increment would make stream k+1 a one-step shift of stream k).  Ensembles
/// are reproducible and order-independent regardless of execution order.
class ShotRng {
  public:
    ShotRng() : ShotRng(0, 0) {}
    ShotRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1))),
          gamma_(mix_gamma(seed ^ (0xBF58476D1CE4E5B9ull * (stream + 1)))) {}

    std::uint64_t next_u64() { return mix64(state_ += gamma_); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    /// One standard normal (Box-Muller; caches the second draw).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Exponential waiting time with the given rate (1/s); +inf when rate <= 0.
    double exponential(double rate) {
        if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
        return -std::log(uniform_pos()) / rate;
    }

  private:
    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    static std::uint64_t mix_gamma(std::uint64_t z) {
        z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
        z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
        return (z ^ (z >> 33)) | 1ull; // increments must be odd
    }

    std::uint64_t state_;
    std::uint64_t gamma_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace drachma
