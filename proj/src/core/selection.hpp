#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hlucb {

// All positions below are 0-based indices into the empirical ranking, i.e.
// position 0 holds the item with the largest score.

/// Item ids ordered by descending score; equal scores keep ascending id.
std::vector<std::size_t> descending_order(std::span<const double> scores);

struct BoundaryIndices {
  std::size_t d1;  // weakest lower bound among the top k - h positions
  std::size_t d2;  // strongest upper bound among positions k + h .. n - 1
};

struct FocusIndices {
  std::size_t b1;
  std::size_t b2;
};

/// `tau` and `radius` are indexed by position (already sorted).
/// Ties in the argmin / argmax go to the smallest position.
BoundaryIndices boundary_indices(std::span<const double> tau,
                                 std::span<const double> radius, std::size_t k,
                                 std::size_t h);

/// Widest radius among {d1} and the h positions just above the split (b1),
/// and among {d2} and the h positions just below it (b2).
FocusIndices focus_indices(std::span<const double> radius, BoundaryIndices bounds,
                           std::size_t k, std::size_t h);

/// tau[d1] - radius[d1] >= tau[d2] + radius[d2]
bool stopping_condition(std::span<const double> tau, std::span<const double> radius,
                        BoundaryIndices bounds) noexcept;

}  // namespace hlucb
