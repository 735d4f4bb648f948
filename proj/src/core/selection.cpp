#include "selection.hpp"

#include <algorithm>
#include <numeric>

#include "error.hpp"

namespace hlucb {

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

namespace {

void check_ranges(std::size_t n, std::size_t k, std::size_t h) {
  if (k < h + 1 || k + 1 + h > n)
    fail(ErrorCode::InvalidConfig, "index ranges empty for the given n, k, h");
}

}  // namespace

BoundaryIndices boundary_indices(std::span<const double> tau,
                                 std::span<const double> radius, std::size_t k,
                                 std::size_t h) {
  const std::size_t n = tau.size();
  if (radius.size() != n) fail(ErrorCode::InvalidArgument, "tau/radius size mismatch");
  check_ranges(n, k, h);

  BoundaryIndices out{0, k + h};
  double lowest = tau[0] - radius[0];
  for (std::size_t pos = 1; pos < k - h; ++pos) {
    const double lcb = tau[pos] - radius[pos];
    if (lcb < lowest) {
      lowest = lcb;
      out.d1 = pos;
    }
  }
  double highest = tau[k + h] + radius[k + h];
  for (std::size_t pos = k + h + 1; pos < n; ++pos) {
    const double ucb = tau[pos] + radius[pos];
    if (ucb > highest) {
      highest = ucb;
      out.d2 = pos;
    }
  }
  return out;
}

FocusIndices focus_indices(std::span<const double> radius, BoundaryIndices bounds,
                           std::size_t k, std::size_t h) {
  check_ranges(radius.size(), k, h);

  // d1 < k - h, so it is always the smallest candidate for b1.
  FocusIndices out{bounds.d1, bounds.d2};
  double widest = radius[bounds.d1];
  for (std::size_t pos = k - h; pos < k; ++pos) {
    if (radius[pos] > widest) {
      widest = radius[pos];
      out.b1 = pos;
    }
  }

  // d2 >= k + h, so the middle block k .. k + h - 1 precedes it.
  std::size_t best = bounds.d2;
  widest = radius[bounds.d2];
  for (std::size_t pos = k; pos < k + h; ++pos) {
    if (radius[pos] > widest || (radius[pos] == widest && pos < best)) {
      widest = radius[pos];
      best = pos;
    }
  }
  out.b2 = best;
  return out;
}

bool stopping_condition(std::span<const double> tau, std::span<const double> radius,
                        BoundaryIndices bounds) noexcept {
  return tau[bounds.d1] - radius[bounds.d1] >= tau[bounds.d2] + radius[bounds.d2];
}

}  // namespace hlucb
