#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "engine.hpp"
#include "rank_stats.hpp"
#include "rng.hpp"
#include "store.hpp"

namespace httplib {
class Server;
}

namespace hlucb::service {

// Wire-level error codes, also used as the JSON `code` field.
enum class ServiceErrorCode {
  BadRequest,
  UnknownSession,
  BadInstance,
  UnknownDuel,
  DuplicateVote,
  CampaignComplete,
  RateLimited,
  NotFound,
  Internal,
};

const char* wire_code(ServiceErrorCode code) noexcept;
int http_status(ServiceErrorCode code) noexcept;

class ServiceError : public std::runtime_error {
 public:
  ServiceError(ServiceErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ServiceErrorCode code() const noexcept { return code_; }

 private:
  ServiceErrorCode code_;
};

struct InstanceSettings {
  std::size_t k = 0;  // 0: n / 2
  std::optional<std::size_t> h;  // default min(5, k - 1, n - k - 1)
  double sigma = 0.1;
  double radius_constant = 1.0;
  std::uint64_t seed = 0;
};

/// Campaign parameters. Persisted as campaign.json in the log directory so a
/// restart replays with exactly the parameters that produced the logs.
struct CampaignConfig {
  std::map<std::string, InstanceSettings> instances;
  std::size_t outstanding_cap = 32;
  double rate_limit_per_sec = 1.0;  // votes per session; <= 0 disables
  std::uint64_t assignment_seed = 0;  // 0: nondeterministic
  bool durable = true;

  nlohmann::ordered_json to_json() const;
  static CampaignConfig from_json(const nlohmann::json& doc);
  static CampaignConfig read_file(const std::string& path);
};

/// Fair coin over the two instance names.
template <class Gen>
const std::string& assign_instance(Gen& gen, const std::vector<std::string>& instances) {
  return instances[static_cast<std::size_t>(uniform_below(gen, instances.size()))];
}

struct Session {
  std::string token;
  std::string rater;  // kAnonymousRater when absent
  std::string instance;
  bool tutorial_completed = false;
};

struct Pair {
  std::string duel_id;
  std::string left;
  std::string right;
};

struct VoteAck {
  std::uint64_t seq = 0;
  bool next_available = false;
};

struct InstanceStats {
  std::uint64_t total_comparisons = 0;
  std::size_t distinct_raters = 0;
  std::uint64_t anonymous_comparisons = 0;
  Phase phase = Phase::Initializing;
};

/// Two (or more) independent ranking instances with their logs. Each
/// instance's engine and log are guarded by one mutex; a vote is acknowledged
/// only after its record is durably appended.
class Campaign {
 public:
  /// Restores every instance named in the manifest from `log_dir` (replaying
  /// any existing log) and persists the effective config. Throws Error with a
  /// line citation on a corrupt log.
  Campaign(ItemManifest manifest, std::string log_dir, std::optional<CampaignConfig> config);
  ~Campaign();

  Campaign(const Campaign&) = delete;
  Campaign& operator=(const Campaign&) = delete;

  const CampaignConfig& config() const noexcept { return config_; }
  std::vector<std::string> instances() const;

  Session create_session(const std::string& rater_id);
  Session session(const std::string& token) const;
  void complete_tutorial(const std::string& token);

  Pair get_pair(const std::string& token);
  VoteAck submit_vote(const std::string& token, const std::string& duel_id,
                      const std::string& side);

  nlohmann::ordered_json ranking(const std::string& instance) const;
  InstanceStats stats(const std::string& instance) const;

  /// Copy of the live engine (consistent snapshot).
  Engine engine_snapshot(const std::string& instance) const;
  std::string log_path(const std::string& instance) const;

 private:
  struct Instance;
  struct SessionState {
    Session session;
    std::optional<std::uint64_t> current_duel;
    std::chrono::steady_clock::time_point last_vote{};
    bool has_voted = false;
  };

  Instance& instance_for(const std::string& name) const;
  std::string image_ref(const Instance& inst, std::size_t item) const;

  ItemManifest manifest_;
  std::string log_dir_;
  CampaignConfig config_;
  std::vector<std::string> instance_names_;
  std::map<std::string, std::unique_ptr<Instance>> instances_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, SessionState> sessions_;

  std::mutex assign_mutex_;
  SplitMix64 assign_rng_{0};
  SplitMix64 token_rng_{0};
};

/// Offline replay of one instance from a campaign log directory, using the
/// persisted campaign.json. Throws Error with a line citation on a bad log.
Engine replay_instance(const ItemManifest& manifest, const std::string& log_dir,
                       const std::string& instance);

/// Most-fake-first ranking of an engine's items (descending score).
stats::LabeledRanking labeled_ranking(const Engine& engine,
                                      const std::vector<ManifestItem>& items);

/// HTTP+JSON front end over a Campaign (cpp-httplib).
///
///   POST /api/session            -> {token, instance}
///   GET  /api/pair               -> {duel_id, left, right}     (X-Session-Token)
///   POST /api/vote {duel_id, side:"left"|"right"} -> {ok, seq, next_available}
///   GET  /api/ranking?instance=A
///   GET  /api/stats?instance=A
///   GET  /img/{path}             static files under image_root
///
/// Errors are JSON {code, message}.
class HttpServer {
 public:
  HttpServer(Campaign& campaign, std::string image_root);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving until stop().
  void serve();
  /// bind() + serve() on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  Campaign& campaign_;
  std::string image_root_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace hlucb::service
