#pragma once

#include <cstddef>
#include <cstdint>

namespace hlucb {

/// Governing parameters of one ranking instance.
///
/// Items are split at `k`: the engine returns the top `k - h` and the bottom
/// `n - k - h` items, each allowed up to `h` misplacements. `sigma` is the
/// risk parameter and `radius_constant` scales the confidence radius.
struct RankingConfig {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t h = 0;
  double sigma = 0.1;
  double radius_constant = 1.0;

  std::size_t top_size() const noexcept { return k - h; }
  std::size_t bottom_size() const noexcept { return n - k - h; }

  friend bool operator==(const RankingConfig&, const RankingConfig&) = default;
};

// Throws Error{InvalidConfig} naming the first violated invariant.
void validate(const RankingConfig& config);

/// Half-width of the confidence interval after `count` comparisons:
///
///   c * sqrt( log( (n / sigma) * max(log2(max(u, 2)), 1) ) / (2u) )
///
/// The inner log2 is clamped so the outer log stays positive for small u.
/// Throws Error{Domain} for u < 1, n < 2, sigma outside (0, 1] or c <= 0.
double confidence_radius(std::uint64_t count, std::size_t n, double sigma,
                         double radius_constant);

inline double confidence_radius(std::uint64_t count, const RankingConfig& config) {
  return confidence_radius(count, config.n, config.sigma, config.radius_constant);
}

}  // namespace hlucb
