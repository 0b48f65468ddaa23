// Reproducible pseudo-random streams.
//
// Algorithm: xoshiro256** (Blackman & Vigna, 2018). The 256-bit state for the
// pair (seed, stream) is filled by four successive SplitMix64 outputs started
// from splitmix64(seed) ^ splitmix64(stream ^ 0x6A09E667F3BCC909). Uniform
// doubles take the top 53 bits of a draw; normals use the Box-Muller
// transform. Nothing here depends on the standard library's distribution
// classes, so streams are bit-identical across platforms and compilers.
#ifndef MRW_RNG_HPP
#define MRW_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mrw {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept {
    std::uint64_t a = seed;
    std::uint64_t b = stream ^ 0x6A09E667F3BCC909ULL;
    std::uint64_t mix = splitmix64(a) ^ splitmix64(b);
    for (auto& word : state_) word = splitmix64(mix);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Index drawn from a probability vector by inverse-CDF search. Falls back to
  // the last positive entry when rounding leaves the cumulative sum below u.
  template <typename Weights>
  std::ptrdiff_t categorical(const Weights& weights) noexcept {
    const double u = uniform();
    double cumulative = 0.0;
    std::ptrdiff_t last_positive = 0;
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(weights.size()); ++i) {
      const double w = static_cast<double>(weights[i]);
      if (w <= 0.0) continue;
      last_positive = i;
      cumulative += w;
      if (u < cumulative) return i;
    }
    return last_positive;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mrw

#endif  // MRW_RNG_HPP
