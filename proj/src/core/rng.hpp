#pragma once

#include <cstdint>

namespace hlucb {

// SplitMix64 (Steele, Lea & Flood 2014). Used wherever a draw must be
// reproducible from a (seed, counter) pair alone.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  SplitMix64 g(a ^ (b * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
  g();
  return g();
}

// Unbiased draw in [0, bound) by rejection; bound > 0.
template <class Gen>
std::uint64_t uniform_below(Gen& gen, std::uint64_t bound) {
  const std::uint64_t limit = Gen::max() - (Gen::max() % bound + 1) % bound;
  std::uint64_t x = gen();
  while (x > limit) x = gen();
  return x % bound;
}

// Uniform double in [0, 1) from the top 53 bits.
template <class Gen>
double uniform_unit(Gen& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace hlucb
