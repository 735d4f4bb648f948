#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "selection.hpp"

namespace hlucb {

enum class Phase { Initializing, Active, Terminated };

const char* to_string(Phase phase) noexcept;
Phase phase_from_string(const std::string& name);

/// One issued comparison task: `focal` is the item whose score the outcome
/// updates; `opponent` is drawn uniformly from the other n - 1 items.
struct Duel {
  std::uint64_t id = 0;
  std::size_t focal = 0;
  std::size_t opponent = 0;
  bool display_swap = false;  // focal shown on the right

  friend bool operator==(const Duel&, const Duel&) = default;
};

struct ScoreState {
  std::uint64_t wins = 0;
  std::uint64_t count = 0;
  double tau_hat = 0.0;
  double radius = std::numeric_limits<double>::infinity();
};

/// Indices of the current round, expressed both as sorted positions and as
/// item ids. `order[pos]` is the item at position `pos`.
struct Selection {
  std::vector<std::size_t> order;
  BoundaryIndices bounds;
  FocusIndices focus;
  bool stop = false;

  std::size_t item_b1() const { return order[focus.b1]; }
  std::size_t item_b2() const { return order[focus.b2]; }
};

struct RankingResult {
  std::vector<std::size_t> top;     // k - h items
  std::vector<std::size_t> middle;  // 2h items, score order
  std::vector<std::size_t> bottom;  // n - k - h items
  std::vector<std::size_t> full_order;
  bool provisional = false;
};

/// Hamming-LUCB state machine.
///
/// Every item is first compared once against a uniform opponent
/// (Initializing). Afterwards each round issues one duel for each of the two
/// focus items b1 and b2 (Active) until the lower confidence bound at d1
/// clears the upper bound at d2 (Terminated). Only the focal item of a duel
/// is updated by its outcome.
///
/// Opponents and display sides are a pure function of (seed, duel id), so the
/// serialized state fully determines all future draws. Not thread-safe.
class Engine {
 public:
  Engine(const RankingConfig& config, std::uint64_t seed);

  const RankingConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Phase phase() const noexcept { return phase_; }
  bool is_terminated() const noexcept { return phase_ == Phase::Terminated; }
  std::span<const ScoreState> scores() const noexcept { return scores_; }
  const std::map<std::uint64_t, Duel>& pending() const noexcept { return pending_; }
  std::uint64_t issued_counter() const noexcept { return issued_; }
  std::uint64_t outcomes_recorded() const noexcept;

  /// Pending duels if any are unanswered, otherwise a fresh round.
  std::vector<Duel> next_duels();

  /// Always issues a fresh round: one duel per uninitialized item that has
  /// none pending, or one each for b1 and b2 once Active. May be empty while
  /// initializing.
  std::vector<Duel> issue_round();

  /// Re-registers a duel that was issued by an earlier incarnation of this
  /// engine (log replay). The id must be the next one in sequence.
  void adopt_issued(const Duel& duel);

  /// Throws exactly what record_outcome would throw, without mutating.
  const Duel& check_outcome(std::uint64_t duel_id) const;

  /// Applies 1{focal wins} to the focal item and re-checks termination.
  /// Returns the answered duel.
  Duel record_outcome(std::uint64_t duel_id, bool focal_won);

  /// Current boundary and focus indices. Requires every count >= 1.
  Selection selection() const;

  RankingResult result(bool allow_provisional = false) const;

  nlohmann::ordered_json to_json() const;
  std::string canonical() const;
  static Engine from_json(const nlohmann::json& doc);

 private:
  Duel make_duel(std::size_t focal);
  void refresh_phase();
  std::vector<double> sorted_values(const std::vector<std::size_t>& order,
                                    bool radius) const;

  RankingConfig config_;
  std::uint64_t seed_;
  std::vector<ScoreState> scores_;
  std::map<std::uint64_t, Duel> pending_;
  Phase phase_ = Phase::Initializing;
  std::uint64_t issued_ = 0;
};

}  // namespace hlucb
