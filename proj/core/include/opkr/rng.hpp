#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace opkr {

/// Deterministic counter-based generator (splitmix64 over a derived state).
/// Streams are derived from (master seed, label, index) so that dataset,
/// probe and Monte Carlo draws never share a stream. Normal variates use
/// Box-Muller rather than std::normal_distribution so output bytes do not
/// depend on the standard library implementation.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream_label, std::uint64_t stream_index = 0) {
    state_ = seed;
    for (char c : stream_label) state_ = mix(state_ ^ static_cast<std::uint64_t>(c));
    state_ = mix(state_ ^ (0x9e3779b97f4a7c15ULL * (stream_index + 1)));
    have_spare_ = false;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace opkr
