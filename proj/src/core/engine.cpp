#include "engine.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace hlucb {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

}  // namespace

const char* to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Initializing: return "initializing";
    case Phase::Active: return "active";
    case Phase::Terminated: return "terminated";
  }
  return "unknown";
}

Phase phase_from_string(const std::string& name) {
  if (name == "initializing") return Phase::Initializing;
  if (name == "active") return Phase::Active;
  if (name == "terminated") return Phase::Terminated;
  fail(ErrorCode::Parse, "unknown phase '" + name + "'");
}

Engine::Engine(const RankingConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed) {
  validate(config_);
  scores_.resize(config_.n);
}

std::uint64_t Engine::outcomes_recorded() const noexcept {
  std::uint64_t total = 0;
  for (const auto& s : scores_) total += s.count;
  return total;
}

Duel Engine::make_duel(std::size_t focal) {
  Duel duel;
  duel.id = ++issued_;
  duel.focal = focal;
  SplitMix64 gen(mix64(seed_, duel.id));
  auto opponent = static_cast<std::size_t>(uniform_below(gen, config_.n - 1));
  if (opponent >= focal) ++opponent;
  duel.opponent = opponent;
  duel.display_swap = (gen() >> 63) != 0;
  pending_.emplace(duel.id, duel);
  return duel;
}

std::vector<Duel> Engine::next_duels() {
  if (phase_ == Phase::Terminated) fail(ErrorCode::Terminated, "ranking has terminated");
  if (!pending_.empty()) {
    std::vector<Duel> out;
    out.reserve(pending_.size());
    for (const auto& [id, duel] : pending_) out.push_back(duel);
    return out;
  }
  return issue_round();
}

std::vector<Duel> Engine::issue_round() {
  std::vector<Duel> out;
  switch (phase_) {
    case Phase::Terminated:
      fail(ErrorCode::Terminated, "ranking has terminated");
    case Phase::Initializing: {
      std::vector<bool> has_pending(config_.n, false);
      for (const auto& [id, duel] : pending_) has_pending[duel.focal] = true;
      for (std::size_t item = 0; item < config_.n; ++item) {
        if (scores_[item].count == 0 && !has_pending[item]) out.push_back(make_duel(item));
      }
      break;
    }
    case Phase::Active: {
      const Selection sel = selection();
      out.push_back(make_duel(sel.item_b1()));
      out.push_back(make_duel(sel.item_b2()));
      break;
    }
  }
  return out;
}

void Engine::adopt_issued(const Duel& duel) {
  if (phase_ == Phase::Terminated) fail(ErrorCode::Terminated, "ranking has terminated");
  if (duel.id != issued_ + 1) {
    std::ostringstream msg;
    msg << "duel " << duel.id << " out of sequence (expected " << issued_ + 1 << ")";
    fail(ErrorCode::State, msg.str());
  }
  if (duel.focal >= config_.n || duel.opponent >= config_.n)
    fail(ErrorCode::InvalidArgument, "duel references an item outside [0, n)");
  if (duel.focal == duel.opponent)
    fail(ErrorCode::InvalidArgument, "duel focal and opponent coincide");
  issued_ = duel.id;
  pending_.emplace(duel.id, duel);
}

const Duel& Engine::check_outcome(std::uint64_t duel_id) const {
  if (phase_ == Phase::Terminated) fail(ErrorCode::Terminated, "ranking has terminated");
  if (duel_id == 0 || duel_id > issued_)
    fail(ErrorCode::UnknownDuel, "duel " + std::to_string(duel_id) + " was never issued");
  auto it = pending_.find(duel_id);
  if (it == pending_.end())
    fail(ErrorCode::DuplicateOutcome,
         "duel " + std::to_string(duel_id) + " has already been answered");
  return it->second;
}

Duel Engine::record_outcome(std::uint64_t duel_id, bool focal_won) {
  const Duel duel = check_outcome(duel_id);
  pending_.erase(duel_id);

  // Incremental mean ((T-1)/T) * tau + (1/T) * win, kept exact as wins / T.
  ScoreState& s = scores_[duel.focal];
  s.count += 1;
  s.wins += focal_won ? 1 : 0;
  s.tau_hat = static_cast<double>(s.wins) / static_cast<double>(s.count);
  s.radius = confidence_radius(s.count, config_);

  refresh_phase();
  return duel;
}

void Engine::refresh_phase() {
  if (phase_ == Phase::Initializing) {
    const bool ready = std::all_of(scores_.begin(), scores_.end(),
                                   [](const ScoreState& s) { return s.count > 0; });
    if (!ready) return;
    phase_ = Phase::Active;
  }
  if (phase_ == Phase::Active && selection().stop) {
    phase_ = Phase::Terminated;
    pending_.clear();
  }
}

std::vector<double> Engine::sorted_values(const std::vector<std::size_t>& order,
                                          bool radius) const {
  std::vector<double> out(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const ScoreState& s = scores_[order[pos]];
    out[pos] = radius ? s.radius : s.tau_hat;
  }
  return out;
}

Selection Engine::selection() const {
  for (const auto& s : scores_) {
    if (s.count == 0) fail(ErrorCode::State, "selection requires every item to be compared");
  }
  std::vector<double> tau(config_.n);
  for (std::size_t i = 0; i < config_.n; ++i) tau[i] = scores_[i].tau_hat;

  Selection sel;
  sel.order = descending_order(tau);
  const auto sorted_tau = sorted_values(sel.order, false);
  const auto sorted_radius = sorted_values(sel.order, true);
  sel.bounds = boundary_indices(sorted_tau, sorted_radius, config_.k, config_.h);
  sel.focus = focus_indices(sorted_radius, sel.bounds, config_.k, config_.h);
  sel.stop = stopping_condition(sorted_tau, sorted_radius, sel.bounds);
  return sel;
}

RankingResult Engine::result(bool allow_provisional) const {
  if (phase_ != Phase::Terminated && !allow_provisional)
    fail(ErrorCode::State, "ranking has not terminated; request a provisional snapshot");

  std::vector<double> tau(config_.n);
  for (std::size_t i = 0; i < config_.n; ++i) tau[i] = scores_[i].tau_hat;

  RankingResult r;
  r.full_order = descending_order(tau);
  r.provisional = phase_ != Phase::Terminated;
  const auto top_end = r.full_order.begin() + static_cast<std::ptrdiff_t>(config_.top_size());
  const auto middle_end = top_end + static_cast<std::ptrdiff_t>(2 * config_.h);
  r.top.assign(r.full_order.begin(), top_end);
  r.middle.assign(top_end, middle_end);
  r.bottom.assign(middle_end, r.full_order.end());
  return r;
}

ordered_json Engine::to_json() const {
  ordered_json doc;
  doc["version"] = kFormatVersion;
  doc["config"] = {
      {"n", config_.n},
      {"k", config_.k},
      {"h", config_.h},
      {"sigma", config_.sigma},
      {"radius_constant", config_.radius_constant},
  };
  ordered_json scores = ordered_json::array();
  for (const auto& s : scores_) {
    ordered_json entry;
    entry["wins"] = s.wins;
    entry["count"] = s.count;
    entry["tau_hat"] = s.tau_hat;
    entry["radius"] = s.count == 0 ? ordered_json(nullptr) : ordered_json(s.radius);
    scores.push_back(std::move(entry));
  }
  doc["scores"] = std::move(scores);
  ordered_json pending = ordered_json::array();
  for (const auto& [id, duel] : pending_) {
    ordered_json entry;
    entry["duel_id"] = duel.id;
    entry["focal"] = duel.focal;
    entry["opponent"] = duel.opponent;
    entry["display_swap"] = duel.display_swap;
    pending.push_back(std::move(entry));
  }
  doc["pending"] = std::move(pending);
  doc["phase"] = to_string(phase_);
  doc["rng_seed"] = seed_;
  doc["issued_counter"] = issued_;
  return doc;
}

std::string Engine::canonical() const { return to_json().dump(); }

Engine Engine::from_json(const json& doc) {
  try {
    if (doc.at("version").get<int>() != kFormatVersion)
      fail(ErrorCode::Parse, "unsupported engine state version");
    const json& c = doc.at("config");
    RankingConfig config;
    config.n = c.at("n").get<std::size_t>();
    config.k = c.at("k").get<std::size_t>();
    config.h = c.at("h").get<std::size_t>();
    config.sigma = c.at("sigma").get<double>();
    config.radius_constant = c.at("radius_constant").get<double>();

    Engine engine(config, doc.at("rng_seed").get<std::uint64_t>());
    const json& scores = doc.at("scores");
    if (scores.size() != config.n) fail(ErrorCode::Parse, "scores length differs from n");
    for (std::size_t i = 0; i < config.n; ++i) {
      ScoreState& s = engine.scores_[i];
      s.wins = scores[i].at("wins").get<std::uint64_t>();
      s.count = scores[i].at("count").get<std::uint64_t>();
      if (s.wins > s.count) fail(ErrorCode::Parse, "wins exceed count for item " + std::to_string(i));
      if (s.count > 0) {
        s.tau_hat = static_cast<double>(s.wins) / static_cast<double>(s.count);
        s.radius = confidence_radius(s.count, config);
      }
    }
    engine.issued_ = doc.at("issued_counter").get<std::uint64_t>();
    for (const json& p : doc.at("pending")) {
      Duel duel;
      duel.id = p.at("duel_id").get<std::uint64_t>();
      duel.focal = p.at("focal").get<std::size_t>();
      duel.opponent = p.at("opponent").get<std::size_t>();
      duel.display_swap = p.at("display_swap").get<bool>();
      if (duel.id == 0 || duel.id > engine.issued_)
        fail(ErrorCode::Parse, "pending duel id beyond issued counter");
      if (duel.focal >= config.n || duel.opponent >= config.n || duel.focal == duel.opponent)
        fail(ErrorCode::Parse, "pending duel references invalid items");
      engine.pending_.emplace(duel.id, duel);
    }

    const Phase stated = phase_from_string(doc.at("phase").get<std::string>());
    engine.refresh_phase();
    if (engine.phase_ != stated) {
      fail(ErrorCode::Parse, std::string("phase '") + to_string(stated) +
                                 "' inconsistent with scores (derived '" +
                                 to_string(engine.phase_) + "')");
    }
    return engine;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed engine state: ") + e.what());
  }
}

}  // namespace hlucb
