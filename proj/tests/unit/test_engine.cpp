#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include <json.hpp>

#include "engine.hpp"
#include "error.hpp"
#include "support/error_check.hpp"

using hlucb::Duel;
using hlucb::Engine;
using hlucb::ErrorCode;
using hlucb::Phase;
using hlucb::RankingConfig;
using nlohmann::json;

namespace {

// State document with the given per-item (wins, count) and pending duels.
json state_doc(const RankingConfig& c, const std::vector<std::pair<int, int>>& wc,
               const std::vector<Duel>& pending, const std::string& phase,
               std::uint64_t issued) {
  json doc;
  doc["version"] = 1;
  doc["config"] = {{"n", c.n}, {"k", c.k}, {"h", c.h}, {"sigma", c.sigma},
                   {"radius_constant", c.radius_constant}};
  doc["scores"] = json::array();
  for (auto [w, n] : wc) doc["scores"].push_back({{"wins", w}, {"count", n}});
  doc["pending"] = json::array();
  for (const auto& d : pending) {
    doc["pending"].push_back({{"duel_id", d.id},
                              {"focal", d.focal},
                              {"opponent", d.opponent},
                              {"display_swap", d.display_swap}});
  }
  doc["phase"] = phase;
  doc["rng_seed"] = 99;
  doc["issued_counter"] = issued;
  return doc;
}

// Answers every duel by a fixed total order (lower id wins) until done.
void run_deterministic(Engine& e, std::size_t max_rounds = 100000) {
  for (std::size_t r = 0; r < max_rounds && !e.is_terminated(); ++r) {
    for (const auto& d : e.next_duels()) {
      if (e.is_terminated()) break;
      e.record_outcome(d.id, d.focal < d.opponent);
    }
  }
}

}  // namespace

TEST_CASE("phase names round-trip") {
  for (Phase p : {Phase::Initializing, Phase::Active, Phase::Terminated})
    CHECK(hlucb::phase_from_string(hlucb::to_string(p)) == p);
  CHECK(testing::error_code([] { hlucb::phase_from_string("done"); }) == ErrorCode::Parse);
}

TEST_CASE("constructor validates the config") {
  CHECK(testing::error_code([] { Engine({3, 2, 1, 0.1, 1.0}, 1); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("fresh engine issues one initialization duel per item") {
  Engine e({3, 1, 0, 0.1, 1.0}, 42);
  CHECK(e.phase() == Phase::Initializing);
  const auto duels = e.next_duels();
  REQUIRE(duels.size() == 3);
  std::set<std::size_t> focal;
  for (const auto& d : duels) {
    focal.insert(d.focal);
    CHECK(d.opponent != d.focal);
    CHECK(d.opponent < 3);
  }
  CHECK(focal == std::set<std::size_t>{0, 1, 2});
  CHECK(e.pending().size() == 3);
  CHECK(e.issued_counter() == 3);

  SUBCASE("next_duels is idempotent while duels are pending") {
    const auto again = e.next_duels();
    CHECK(again == duels);
    CHECK(e.issued_counter() == 3);
  }
  SUBCASE("issue_round has nothing new while every item is pending") {
    CHECK(e.issue_round().empty());
  }
  SUBCASE("answered items are not re-initialized") {
    e.record_outcome(duels[0].id, true);
    CHECK(e.issue_round().empty());
    CHECK(e.phase() == Phase::Initializing);
  }
}

TEST_CASE("incremental mean updates only the focal item") {
  const RankingConfig c{3, 1, 0, 0.1, 1.0};
  SUBCASE("tau 0.5 over 2, win") {
    Engine e = Engine::from_json(state_doc(c, {{1, 2}, {1, 1}, {0, 1}}, {{1, 0, 1, false}},
                                           "active", 1));
    e.record_outcome(1, true);
    CHECK(e.scores()[0].count == 3);
    CHECK(e.scores()[0].tau_hat == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(e.scores()[0].radius == hlucb::confidence_radius(3, c));
    CHECK(e.scores()[1].count == 1);  // opponent untouched
    CHECK(e.scores()[1].tau_hat == 1.0);
    CHECK(e.pending().empty());
  }
  SUBCASE("tau 1 over 1, loss") {
    Engine e = Engine::from_json(state_doc(c, {{1, 1}, {1, 1}, {0, 1}}, {{1, 0, 2, true}},
                                           "active", 1));
    e.record_outcome(1, false);
    CHECK(e.scores()[0].count == 2);
    CHECK(e.scores()[0].tau_hat == 0.5);
    CHECK(e.scores()[2].count == 1);
  }
}

TEST_CASE("active rounds focus on b1 and b2") {
  // n=6, k=3, h=1, one comparison each: equal radii, scores [1,1,1,0,0,0]
  const RankingConfig c{6, 3, 1, 0.1, 1.0};
  Engine e = Engine::from_json(
      state_doc(c, {{1, 1}, {1, 1}, {1, 1}, {0, 1}, {0, 1}, {0, 1}}, {}, "active", 6));
  REQUIRE(e.phase() == Phase::Active);
  const auto sel = e.selection();
  CHECK(sel.bounds.d1 == 0);
  CHECK(sel.bounds.d2 == 4);
  CHECK(sel.item_b1() == 0);
  CHECK(sel.item_b2() == 3);
  CHECK_FALSE(sel.stop);

  const auto duels = e.next_duels();
  REQUIRE(duels.size() == 2);
  CHECK(duels[0].focal == 0);
  CHECK(duels[1].focal == 3);
  CHECK(duels[0].id == 7);
  CHECK(duels[1].id == 8);
}

TEST_CASE("stale duels are still accepted") {
  Engine e({4, 2, 0, 0.1, 1.0}, 5);
  auto init = e.next_duels();
  for (const auto& d : init) e.record_outcome(d.id, d.focal < 2);
  REQUIRE(e.phase() == Phase::Active);
  const auto first = e.issue_round();
  const auto second = e.issue_round();  // issued before `first` is answered
  CHECK(e.pending().size() == 4);
  CHECK_NOTHROW(e.record_outcome(first[0].id, true));
  CHECK_NOTHROW(e.record_outcome(second[1].id, false));
}

TEST_CASE("outcome errors") {
  Engine e({3, 1, 0, 0.1, 1.0}, 1);
  const auto duels = e.next_duels();
  CHECK(testing::error_code([&] { e.record_outcome(0, true); }) == ErrorCode::UnknownDuel);
  CHECK(testing::error_code([&] { e.record_outcome(4, true); }) == ErrorCode::UnknownDuel);
  e.record_outcome(duels[0].id, true);
  const std::string before = e.canonical();
  CHECK(testing::error_code([&] { e.record_outcome(duels[0].id, false); }) ==
        ErrorCode::DuplicateOutcome);
  CHECK(e.canonical() == before);
}

TEST_CASE("selection and result guard their preconditions") {
  Engine e({4, 2, 0, 0.1, 1.0}, 3);
  CHECK(testing::error_code([&] { e.selection(); }) == ErrorCode::State);
  CHECK(testing::error_code([&] { e.result(); }) == ErrorCode::State);
  const auto provisional = e.result(true);
  CHECK(provisional.provisional);
  CHECK(provisional.full_order == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("adopt_issued enforces sequence and item range") {
  Engine e({3, 1, 0, 0.1, 1.0}, 1);
  CHECK(testing::error_code([&] { e.adopt_issued({2, 0, 1, false}); }) == ErrorCode::State);
  CHECK(testing::error_code([&] { e.adopt_issued({1, 0, 3, false}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(testing::error_code([&] { e.adopt_issued({1, 1, 1, false}); }) ==
        ErrorCode::InvalidArgument);
  e.adopt_issued({1, 2, 0, true});
  CHECK(e.issued_counter() == 1);
  CHECK(e.pending().at(1) == Duel{1, 2, 0, true});
}

TEST_CASE("two deterministic items terminate with the winner on top") {
  Engine e({2, 1, 0, 0.5, 1.0}, 7);
  run_deterministic(e);
  REQUIRE(e.is_terminated());
  CHECK(e.pending().empty());
  const auto r = e.result();
  CHECK_FALSE(r.provisional);
  CHECK(r.top == std::vector<std::size_t>{0});
  CHECK(r.bottom == std::vector<std::size_t>{1});
  CHECK(r.middle.empty());
  // n/sigma = 4: alpha(4) = 0.5098, alpha(5) = 0.4721. Item 0 answers first
  // in each round, and 1 - alpha(5) >= 0 + alpha(4) already holds.
  CHECK(e.scores()[0].count == 5);
  CHECK(e.scores()[1].count == 4);

  CHECK(testing::error_code([&] { e.next_duels(); }) == ErrorCode::Terminated);
  CHECK(testing::error_code([&] { e.issue_round(); }) == ErrorCode::Terminated);
  CHECK(testing::error_code([&] { e.record_outcome(1, true); }) == ErrorCode::Terminated);
  CHECK(testing::error_code([&] { e.adopt_issued({e.issued_counter() + 1, 0, 1, false}); }) ==
        ErrorCode::Terminated);
}

TEST_CASE("terminated result partitions the items") {
  Engine e({6, 3, 1, 0.1, 1.0}, 11);
  run_deterministic(e);
  REQUIRE(e.is_terminated());
  const auto r = e.result();
  CHECK(r.top.size() == 2);
  CHECK(r.middle.size() == 2);
  CHECK(r.bottom.size() == 2);
  // at most h misplaced per set against the true order 0 > 1 > ... > 5
  auto misplaced = [](const std::vector<std::size_t>& set, std::size_t lo, std::size_t hi) {
    std::size_t m = 0;
    for (auto i : set) m += (i < lo || i >= hi);
    return m;
  };
  CHECK(misplaced(r.top, 0, 3) <= 1);
  CHECK(misplaced(r.bottom, 3, 6) <= 1);
  const auto sel = e.selection();
  CHECK(sel.stop);
}

TEST_CASE("canonical state round-trips and fixes future draws") {
  Engine a({8, 4, 1, 0.2, 1.0}, 1234);
  for (int round = 0; round < 6; ++round) {
    const auto duels = a.next_duels();
    for (std::size_t i = 0; i + 1 < duels.size(); ++i)  // leave one pending
      a.record_outcome(duels[i].id, (duels[i].focal + round) % 3 == 0);
  }
  Engine b = Engine::from_json(json::parse(a.canonical()));
  CHECK(b.canonical() == a.canonical());
  CHECK(b.outcomes_recorded() == a.outcomes_recorded());
  // drain pending then compare the next fresh rounds
  for (auto* e : {&a, &b}) {
    for (const auto& d : e->next_duels()) e->record_outcome(d.id, d.focal % 2 == 0);
  }
  CHECK(a.next_duels() == b.next_duels());
}

TEST_CASE("engine state documents are validated") {
  const RankingConfig c{3, 1, 0, 0.1, 1.0};
  auto bad = state_doc(c, {{0, 0}, {0, 0}, {0, 0}}, {}, "initializing", 0);
  CHECK_NOTHROW(Engine::from_json(bad));

  auto v = bad;
  v["version"] = 2;
  CHECK(testing::error_code([&] { Engine::from_json(v); }) == ErrorCode::Parse);

  CHECK(testing::error_code([&] {
          Engine::from_json(state_doc(c, {{2, 1}, {0, 1}, {0, 1}}, {}, "active", 0));
        }) == ErrorCode::Parse);
  CHECK(testing::error_code([&] {
          Engine::from_json(state_doc(c, {{0, 0}, {0, 0}}, {}, "initializing", 0));
        }) == ErrorCode::Parse);
  CHECK(testing::error_code([&] {
          Engine::from_json(state_doc(c, {{0, 0}, {0, 0}, {0, 0}}, {{3, 0, 1, false}},
                                      "initializing", 2));
        }) == ErrorCode::Parse);
  CHECK(testing::error_code([&] {
          Engine::from_json(state_doc(c, {{0, 0}, {0, 0}, {0, 0}}, {{1, 0, 0, false}},
                                      "initializing", 1));
        }) == ErrorCode::Parse);
  // stated phase must agree with the scores
  CHECK(testing::error_code([&] {
          Engine::from_json(state_doc(c, {{1, 1}, {0, 1}, {0, 1}}, {}, "initializing", 3));
        }) == ErrorCode::Parse);
  CHECK(testing::error_code([&] { Engine::from_json(json{{"version", 1}}); }) ==
        ErrorCode::Parse);
}
