#include <doctest.h>

#include <random>
#include <vector>

#include "error.hpp"
#include "selection.hpp"
#include "support/error_check.hpp"
#include "support/test_support.hpp"

using hlucb::BoundaryIndices;
using hlucb::ErrorCode;
using Vec = std::vector<double>;

// Positions are 0-based; position 0 is the highest score.

TEST_CASE("descending order breaks score ties by ascending id") {
  const Vec scores{0.5, 0.7, 0.5, 0.7, 0.1};
  CHECK(hlucb::descending_order(scores) == std::vector<std::size_t>{1, 3, 0, 2, 4});
  CHECK(hlucb::descending_order(Vec{}).empty());
}

TEST_CASE("boundary indices on the six-item example") {
  const Vec tau{0.9, 0.8, 0.7, 0.3, 0.2, 0.1};
  const Vec rad(6, 0.05);
  const auto b = hlucb::boundary_indices(tau, rad, 3, 1);
  CHECK(b.d1 == 1);  // min of {0.85, 0.75}
  CHECK(b.d2 == 4);  // max of {0.25, 0.15}
  CHECK(hlucb::stopping_condition(tau, rad, b));

  const auto f = hlucb::focus_indices(rad, b, 3, 1);
  CHECK(f.b1 == 1);  // {1, 2} tied
  CHECK(f.b2 == 3);  // {4, 3} tied, smallest position
}

TEST_CASE("two items give singleton ranges") {
  const Vec tau{1.0, 0.0};
  const Vec rad{0.4, 0.4};
  const auto b = hlucb::boundary_indices(tau, rad, 1, 0);
  CHECK(b.d1 == 0);
  CHECK(b.d2 == 1);
  CHECK(hlucb::stopping_condition(tau, rad, b));  // 0.6 >= 0.4

  const Vec wide{0.6, 0.6};
  CHECK_FALSE(hlucb::stopping_condition(tau, wide, b));  // 0.4 < 0.6
}

TEST_CASE("uniform scores and radii resolve ties to the smallest position") {
  const Vec tau(8, 0.5);
  const Vec rad(8, 0.2);
  const auto b = hlucb::boundary_indices(tau, rad, 4, 1);
  CHECK(b.d1 == 0);
  CHECK(b.d2 == 5);  // first position of [k + h, n)
  CHECK_FALSE(hlucb::stopping_condition(tau, rad, b));
  const auto f = hlucb::focus_indices(rad, b, 4, 1);
  CHECK(f.b1 == 0);
  CHECK(f.b2 == 4);
}

TEST_CASE("h = 0 makes the focus indices equal the boundary indices") {
  const Vec tau{0.9, 0.6, 0.55, 0.2};
  const Vec rad{0.3, 0.1, 0.5, 0.2};
  const auto b = hlucb::boundary_indices(tau, rad, 2, 0);
  const auto f = hlucb::focus_indices(rad, b, 2, 0);
  CHECK(f.b1 == b.d1);
  CHECK(f.b2 == b.d2);
}

TEST_CASE("focus picks the widest radius from the union ranges") {
  // k=3, h=1: candidates {d1} + {2} and {d2} + {3}
  const Vec rad{0.1, 0.3, 0.2, 0.2, 0.4, 0.1};
  const auto f = hlucb::focus_indices(rad, BoundaryIndices{0, 5}, 3, 1);
  CHECK(f.b1 == 2);
  CHECK(f.b2 == 3);

  // d1 itself can win
  const auto g = hlucb::focus_indices(Vec{0.9, 0.3, 0.2, 0.2, 0.4, 0.1}, BoundaryIndices{0, 4}, 3, 1);
  CHECK(g.b1 == 0);
  CHECK(g.b2 == 4);
}

TEST_CASE("empty ranges and size mismatches are rejected") {
  const Vec tau{0.5, 0.4, 0.3};
  const Vec rad{0.1, 0.1, 0.1};
  CHECK(testing::error_code([&] { hlucb::boundary_indices(tau, rad, 1, 1); }) ==
        ErrorCode::InvalidConfig);
  CHECK(testing::error_code([&] { hlucb::boundary_indices(tau, rad, 2, 1); }) ==
        ErrorCode::InvalidConfig);
  CHECK(testing::error_code([&] { hlucb::boundary_indices(tau, Vec{0.1, 0.1}, 1, 0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("random states agree with an independent scan") {
  std::mt19937_64 gen(20240611);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen() % 15;
    const std::size_t k = 1 + gen() % (n - 1);
    const std::size_t hmax = std::min(k - 1, n - k - 1);
    const std::size_t h = hmax == 0 ? 0 : gen() % (hmax + 1);
    // coarse grids force ties
    Vec tau(n), rad(n);
    for (auto& t : tau) t = static_cast<double>(gen() % 5) / 4.0;
    for (auto& r : rad) r = static_cast<double>(1 + gen() % 3) / 10.0;
    std::sort(tau.begin(), tau.end(), std::greater<>());

    const auto want = testing::brute_force_indices(tau, rad, k, h);
    const auto b = hlucb::boundary_indices(tau, rad, k, h);
    const auto f = hlucb::focus_indices(rad, b, k, h);
    REQUIRE(b.d1 == want.d1);
    REQUIRE(b.d2 == want.d2);
    REQUIRE(f.b1 == want.b1);
    REQUIRE(f.b2 == want.b2);
    REQUIRE(hlucb::stopping_condition(tau, rad, b) == want.stop);
  }
}
