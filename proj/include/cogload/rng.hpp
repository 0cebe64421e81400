#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace cogload {

// Deterministic random streams: xoshiro256++ state initialized through
// splitmix64. Uniform and normal draws below use only IEEE-754 basic
// operations (+, -, *, /, sqrt), so a given seed yields bit-identical
// streams on any conforming platform. Fixtures pin these streams; do not
// change the algorithms without regenerating every golden file.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Natural log from frexp decomposition and an atanh series. Basic
// operations only; relative error < 1e-15 on (0, 1e300).
inline double portable_log(double x) {
  int exponent = 0;
  double m = std::frexp(x, &exponent);  // m in [0.5, 1)
  if (m < 0.7071067811865476) {
    m *= 2.0;
    exponent -= 1;
  }
  const double z = (m - 1.0) / (m + 1.0);
  const double z2 = z * z;
  double term = z;
  double sum = 0.0;
  for (int k = 1; k <= 31; k += 2) {
    sum += term / k;
    term *= z2;
  }
  return 2.0 * sum + static_cast<double>(exponent) * 0.6931471805599453;
}

// exp(x) via Cody-Waite range reduction and a Taylor polynomial. Basic
// operations plus the exact ldexp/floor, so bit-stable across platforms.
inline double portable_exp(double x) {
  if (x > 709.0) return std::numeric_limits<double>::infinity();
  if (x < -745.0) return 0.0;
  const double inv_ln2 = 1.4426950408889634;
  const double ln2_hi = 0.693147180369123816490;
  const double ln2_lo = 1.90821492927058770002e-10;
  const double kd = std::floor(x * inv_ln2 + 0.5);
  const int k = static_cast<int>(kd);
  const double r = (x - kd * ln2_hi) - kd * ln2_lo;
  // |r| <= ln2/2; 13 terms reach ~1e-17 relative truncation error.
  double term = 1.0;
  double sum = 1.0;
  for (int i = 1; i <= 13; ++i) {
    term *= r / i;
    sum += term;
  }
  return std::ldexp(sum, k);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  // Seed for an independent substream of a master seed. Used to give each
  // simulated learner its own stream regardless of scheduling.
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (index + 1));
    return splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Standard normal via the polar method; consumes draws in pairs and
  // caches the second deviate.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * next_unit() - 1.0;
      v = 2.0 * next_unit() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * portable_log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  double next_normal(double mean, double sd) { return mean + sd * next_normal(); }

 private:
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cogload
