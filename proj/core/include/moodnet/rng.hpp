#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace moodnet {

/// Fixed stream salts so each consumer of the run seed draws from its own space.
inline constexpr std::uint64_t kStreamInit = 1;     // parameter initialization
inline constexpr std::uint64_t kStreamShuffle = 2;  // per-epoch batch order
inline constexpr std::uint64_t kStreamDropout = 3;  // per-sample dropout masks

/// Derives a child seed from (seed, salt). splitmix64-style finalizer, so nearby
/// salts give unrelated streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL + 0xbf58476d1ce4e5b9ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// mt19937_64 with hand-rolled value draws. std::uniform_real_distribution and
/// std::normal_distribution are implementation-defined, which would break
/// cross-platform reproducibility of seeded runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  /// Box-Muller, two draws per value.
  double gaussian(double sigma) {
    const double u1 = 1.0 - u01();  // (0, 1], keeps log finite
    const double u2 = u01();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTau * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t bounded(std::uint64_t n) { return n == 0 ? 0 : gen_() % n; }

 private:
  static constexpr double kTau = 6.283185307179586476925286766559;
  std::mt19937_64 gen_;
};

}  // namespace moodnet
