#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace scso {

/// SplitMix64 finalizer. Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stateless counter-keyed uniform draw in [0, 1).
///
/// The draw depends only on the key words, never on call order, so a
/// simulation can re-derive the same random decision for the same
/// (seed, stream, entity, time) regardless of what else happened.
inline double counter_uniform01(std::uint64_t k0, std::uint64_t k1, std::uint64_t k2,
                                std::uint64_t k3 = 0) {
  std::uint64_t h = mix64(k0);
  h = mix64(h ^ k1);
  h = mix64(h ^ k2);
  h = mix64(h ^ k3);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Sequential random stream with fully pinned output.
///
/// The raw 64-bit sequence comes from std::mt19937_64 (which the standard
/// specifies exactly); the uniform and normal transforms are implemented
/// here so results do not depend on the standard library's distributions,
/// which are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], both ends inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Multiply-shift rejection-free mapping; bias < 2^-53 is irrelevant here.
    return lo + static_cast<int>(static_cast<std::uint64_t>(uniform01() * static_cast<double>(span)));
  }

  /// Standard normal draw via Box-Muller, one cached spare per pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scso
