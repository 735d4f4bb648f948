#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "engine.hpp"
#include "store.hpp"

namespace hlucb::sim {

struct BradleyTerry {
  std::vector<double> weights;  // > 0
};

// Each duel of item i is won with probability tau_star[i], whoever the opponent.
struct PlantedBorda {
  std::vector<double> tau_star;  // in [0, 1]
};

// order[0] beats everyone, order[1] beats everyone but order[0], ...
struct Deterministic {
  std::vector<std::size_t> order;
};

using ModelKind = std::variant<BradleyTerry, PlantedBorda, Deterministic>;

/// Synthetic comparator standing in for the human crowd.
class ComparatorModel {
 public:
  explicit ComparatorModel(ModelKind kind);

  std::size_t size() const noexcept;
  const ModelKind& kind() const noexcept { return kind_; }
  std::string name() const;

  /// P(i beats j). Throws Error{InvalidArgument} on i == j or out of range.
  double duel_probability(std::size_t i, std::size_t j) const;

  /// Exact Borda scores: (1 / (n - 1)) * sum_{j != i} P(i beats j).
  std::vector<double> true_borda() const;

 private:
  ModelKind kind_;
  std::vector<std::size_t> rank_of_;  // Deterministic only
};

/// Weights ratio^(n-1), ..., ratio, 1 assigned to items 0..n-1 and then
/// shuffled by `permute_seed` (no shuffle when it is 0).
std::vector<double> geometric_weights(std::size_t n, double ratio,
                                      std::uint64_t permute_seed = 0);

/// |returned \ truth|
std::size_t hamming_set_error(const std::vector<std::size_t>& returned,
                              const std::vector<std::size_t>& truth);

struct SimReport {
  std::uint64_t seed = 0;
  RankingConfig config;
  std::uint64_t comparisons_used = 0;
  bool terminated = false;
  std::size_t set_error_top = 0;
  std::size_t set_error_bottom = 0;
  std::string generator;
  std::string model;
  RankingResult ranking;
  std::string final_state;    // canonical engine JSON at the end of the run
  std::vector<LogEvent> log;  // filled only when requested

  nlohmann::ordered_json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

struct SimOptions {
  std::uint64_t budget = 1'000'000;
  bool keep_log = false;
};

/// Drives an engine seeded with `seed` against `model` until termination or
/// until `budget` outcomes have been recorded. Outcome draws use an
/// mt19937_64 seeded from `seed`. Set errors are measured against the true
/// top-k and bottom n-k items by Borda score.
SimReport run_simulation(const RankingConfig& config, const ComparatorModel& model,
                         std::uint64_t seed, const SimOptions& options = {});

}  // namespace hlucb::sim
