#pragma once

// Seeded generator used for every random instance in the library.
//
// The bit stream is xoshiro256** seeded through splitmix64, and the normal
// variates come from Box-Muller, so corpora are reproducible across
// platforms and languages (std:: distributions are implementation-defined).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace finsler {

inline constexpr const char* kGeneratorName = "xoshiro256**/splitmix64/box-muller";

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  double normal() { return box_muller().real(); }

  /// Standard complex Gaussian: E|z|^2 = 1.
  std::complex<double> complex_normal() { return box_muller() * (1.0 / std::numbers::sqrt2); }

  /// Independent stream for instance `index`; depends only on (seed, index).
  Rng split(std::uint64_t index) const {
    std::uint64_t sm = seed_ ^ (0xd1b54a32d192ed03ULL * (index + 1));
    return Rng(splitmix64(sm));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::complex<double> box_muller() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace finsler
