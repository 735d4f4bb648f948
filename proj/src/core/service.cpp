#include "service.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <httplib.h>

#include "error.hpp"

namespace hlucb::service {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* wire_code(ServiceErrorCode code) noexcept {
  switch (code) {
    case ServiceErrorCode::BadRequest: return "BAD_REQUEST";
    case ServiceErrorCode::UnknownSession: return "UNKNOWN_SESSION";
    case ServiceErrorCode::BadInstance: return "BAD_INSTANCE";
    case ServiceErrorCode::UnknownDuel: return "UNKNOWN_DUEL";
    case ServiceErrorCode::DuplicateVote: return "DUPLICATE_VOTE";
    case ServiceErrorCode::CampaignComplete: return "CAMPAIGN_COMPLETE";
    case ServiceErrorCode::RateLimited: return "RATE_LIMITED";
    case ServiceErrorCode::NotFound: return "NOT_FOUND";
    case ServiceErrorCode::Internal: return "INTERNAL";
  }
  return "INTERNAL";
}

int http_status(ServiceErrorCode code) noexcept {
  switch (code) {
    case ServiceErrorCode::BadRequest: return 400;
    case ServiceErrorCode::UnknownSession: return 401;
    case ServiceErrorCode::BadInstance: return 400;
    case ServiceErrorCode::UnknownDuel: return 404;
    case ServiceErrorCode::DuplicateVote: return 409;
    case ServiceErrorCode::CampaignComplete: return 410;
    case ServiceErrorCode::RateLimited: return 429;
    case ServiceErrorCode::NotFound: return 404;
    case ServiceErrorCode::Internal: return 500;
  }
  return 500;
}

namespace {

constexpr const char* kCampaignFile = "campaign.json";

std::uint64_t entropy_seed() {
  std::random_device rd;
  const std::uint64_t hi = rd();
  const std::uint64_t lo = rd();
  const std::uint64_t seed = (hi << 32) ^ lo;
  return seed == 0 ? 1 : seed;
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

ordered_json settings_to_json(const InstanceSettings& s) {
  ordered_json doc;
  doc["k"] = s.k;
  if (s.h) doc["h"] = *s.h;
  doc["sigma"] = s.sigma;
  doc["radius_constant"] = s.radius_constant;
  doc["seed"] = s.seed;
  return doc;
}

InstanceSettings settings_from_json(const json& doc) {
  InstanceSettings s;
  s.k = doc.value("k", std::size_t{0});
  if (doc.contains("h")) s.h = doc.at("h").get<std::size_t>();
  s.sigma = doc.value("sigma", 0.1);
  s.radius_constant = doc.value("radius_constant", 1.0);
  s.seed = doc.value("seed", std::uint64_t{0});
  return s;
}

// Fills defaults for an instance of `n` items.
InstanceSettings resolve(InstanceSettings s, std::size_t n) {
  if (s.k == 0) s.k = n / 2;
  if (!s.h) {
    std::size_t h = 5;
    if (s.k >= 1) h = std::min(h, s.k - 1);
    if (n >= s.k + 1) h = std::min(h, n - s.k - 1);
    s.h = h;
  }
  if (s.seed == 0) s.seed = entropy_seed();
  return s;
}

bool compatible(const InstanceSettings& given, const InstanceSettings& persisted) {
  return (given.k == 0 || given.k == persisted.k) && (!given.h || given.h == persisted.h) &&
         given.sigma == persisted.sigma && given.radius_constant == persisted.radius_constant &&
         (given.seed == 0 || given.seed == persisted.seed);
}

RankingConfig ranking_config(const InstanceSettings& s, std::size_t n) {
  RankingConfig config;
  config.n = n;
  config.k = s.k;
  config.h = s.h.value_or(0);
  config.sigma = s.sigma;
  config.radius_constant = s.radius_constant;
  return config;
}

}  // namespace

ordered_json CampaignConfig::to_json() const {
  ordered_json doc;
  doc["version"] = 1;
  ordered_json inst = ordered_json::object();
  for (const auto& [name, s] : instances) inst[name] = settings_to_json(s);
  doc["instances"] = std::move(inst);
  doc["outstanding_cap"] = outstanding_cap;
  doc["rate_limit_per_sec"] = rate_limit_per_sec;
  doc["assignment_seed"] = assignment_seed;
  doc["durable"] = durable;
  return doc;
}

CampaignConfig CampaignConfig::from_json(const json& doc) {
  try {
    CampaignConfig c;
    if (doc.contains("instances")) {
      for (const auto& [name, s] : doc.at("instances").items()) c.instances[name] = settings_from_json(s);
    }
    c.outstanding_cap = doc.value("outstanding_cap", std::size_t{32});
    c.rate_limit_per_sec = doc.value("rate_limit_per_sec", 1.0);
    c.assignment_seed = doc.value("assignment_seed", std::uint64_t{0});
    c.durable = doc.value("durable", true);
    if (c.outstanding_cap == 0) fail(ErrorCode::InvalidConfig, "outstanding_cap must be positive");
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed campaign config: ") + e.what());
  }
}

CampaignConfig CampaignConfig::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open campaign config '" + path + "'");
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct Campaign::Instance {
  Instance(std::string name_, std::vector<ManifestItem> items_, Engine engine_, EventLog log_)
      : name(std::move(name_)),
        items(std::move(items_)),
        engine(std::move(engine_)),
        log(std::move(log_)) {}

  std::string name;
  std::vector<ManifestItem> items;
  mutable std::mutex mutex;
  Engine engine;
  EventLog log;
  std::map<std::uint64_t, std::uint64_t> handed_out;  // duel id -> last hand-out tick
  std::uint64_t tick = 0;
  std::uint64_t total = 0;
  std::uint64_t anonymous = 0;
  std::set<std::string> raters;

  void count(const ComparisonRecord& rec) {
    ++total;
    if (rec.rater == kAnonymousRater) {
      ++anonymous;
    } else {
      raters.insert(rec.rater);
    }
  }
};

Campaign::Campaign(ItemManifest manifest, std::string log_dir,
                   std::optional<CampaignConfig> given)
    : manifest_(std::move(manifest)), log_dir_(std::move(log_dir)) {
  instance_names_ = manifest_.instances();
  if (instance_names_.empty()) fail(ErrorCode::InvalidArgument, "manifest lists no items");
  fs::create_directories(log_dir_);

  const fs::path persisted_path = fs::path(log_dir_) / kCampaignFile;
  std::optional<CampaignConfig> persisted;
  if (fs::exists(persisted_path)) persisted = CampaignConfig::read_file(persisted_path.string());

  if (persisted) {
    config_ = *persisted;
    if (given) {
      for (const auto& [name, s] : given->instances) {
        auto it = persisted->instances.find(name);
        if (it != persisted->instances.end() && !compatible(s, it->second)) {
          fail(ErrorCode::InvalidConfig, "settings for instance '" + name +
                                             "' differ from the persisted " +
                                             persisted_path.string());
        }
      }
      // Runtime knobs may change between restarts.
      config_.outstanding_cap = given->outstanding_cap;
      config_.rate_limit_per_sec = given->rate_limit_per_sec;
      config_.durable = given->durable;
    }
  } else if (given) {
    config_ = *given;
  }

  for (const auto& name : instance_names_) {
    const std::size_t n = manifest_.instance_items(name).size();
    InstanceSettings s = config_.instances.count(name) ? config_.instances[name] : InstanceSettings{};
    config_.instances[name] = resolve(s, n);
  }
  if (config_.assignment_seed == 0) config_.assignment_seed = entropy_seed();

  if (!persisted || persisted->to_json() != config_.to_json()) {
    std::ofstream out(persisted_path, std::ios::trunc);
    out << config_.to_json().dump(2) << '\n';
    if (!out) fail(ErrorCode::Io, "cannot write " + persisted_path.string());
  }

  assign_rng_ = SplitMix64(config_.assignment_seed);
  token_rng_ = SplitMix64(entropy_seed());

  for (const auto& name : instance_names_) {
    const auto& items = manifest_.instance_items(name);
    const RankingConfig rc = ranking_config(config_.instances[name], items.size());
    validate(rc);
    EventLog log = EventLog::open(log_path(name), config_.durable);
    Engine engine = replay(rc, config_.instances[name].seed, log.recovered(), name);
    auto inst = std::make_unique<Instance>(name, items, std::move(engine), std::move(log));
    for (const auto& e : inst->log.recovered()) {
      if (const auto* rec = std::get_if<ComparisonRecord>(&e); rec && rec->instance == name)
        inst->count(*rec);
    }
    instances_.emplace(name, std::move(inst));
  }
}

Campaign::~Campaign() = default;

std::vector<std::string> Campaign::instances() const { return instance_names_; }

std::string Campaign::log_path(const std::string& instance) const {
  return (fs::path(log_dir_) / ("instance_" + instance + ".jsonl")).string();
}

Campaign::Instance& Campaign::instance_for(const std::string& name) const {
  auto it = instances_.find(name);
  if (it == instances_.end())
    throw ServiceError(ServiceErrorCode::BadInstance, "unknown instance '" + name + "'");
  return *it->second;
}

std::string Campaign::image_ref(const Instance& inst, std::size_t item) const {
  return "/img/" + inst.items.at(item).path;
}

Session Campaign::create_session(const std::string& rater_id) {
  Session s;
  s.rater = rater_id.empty() ? kAnonymousRater : rater_id;
  {
    std::lock_guard lock(assign_mutex_);
    s.instance = assign_instance(assign_rng_, instance_names_);
    std::ostringstream token;
    token << std::hex << std::setfill('0') << std::setw(16) << token_rng_() << std::setw(16)
          << token_rng_();
    s.token = token.str();
  }
  std::unique_lock lock(sessions_mutex_);
  if (s.rater != kAnonymousRater) {
    for (const auto& [token, state] : sessions_) {
      if (state.session.rater == s.rater && state.session.tutorial_completed) {
        s.tutorial_completed = true;
        break;
      }
    }
  }
  sessions_.emplace(s.token, SessionState{s, std::nullopt, {}, false});
  return s;
}

Session Campaign::session(const std::string& token) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) throw ServiceError(ServiceErrorCode::UnknownSession, "unknown session token");
  return it->second.session;
}

void Campaign::complete_tutorial(const std::string& token) {
  std::unique_lock lock(sessions_mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) throw ServiceError(ServiceErrorCode::UnknownSession, "unknown session token");
  it->second.session.tutorial_completed = true;
}

Pair Campaign::get_pair(const std::string& token) {
  std::optional<std::uint64_t> current;
  Session s;
  {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) throw ServiceError(ServiceErrorCode::UnknownSession, "unknown session token");
    s = it->second.session;
    current = it->second.current_duel;
  }

  Instance& inst = instance_for(s.instance);
  Duel duel;
  {
    std::lock_guard lock(inst.mutex);
    if (inst.engine.is_terminated())
      throw ServiceError(ServiceErrorCode::CampaignComplete, "campaign complete");
    const auto& pending = inst.engine.pending();

    std::optional<std::uint64_t> chosen;
    if (current && pending.count(*current)) chosen = current;
    if (!chosen) {
      for (const auto& [id, d] : pending) {
        if (!inst.handed_out.count(id)) {
          chosen = id;
          break;
        }
      }
    }
    if (!chosen && pending.size() < config_.outstanding_cap) {
      // Issue on a copy so the engine only changes once the issue lines are durable.
      Engine next = inst.engine;
      const std::vector<Duel> round = next.issue_round();
      for (const auto& d : round) inst.log.append(IssueEvent{inst.name, d});
      inst.engine = std::move(next);
      if (!round.empty()) chosen = round.front().id;
    }
    if (!chosen) {
      // Everything is out already: re-serve the least recently handed out duel.
      std::uint64_t oldest_tick = ~std::uint64_t{0};
      for (const auto& [id, d] : inst.engine.pending()) {
        auto it = inst.handed_out.find(id);
        const std::uint64_t tick = it == inst.handed_out.end() ? 0 : it->second;
        if (tick < oldest_tick) {
          oldest_tick = tick;
          chosen = id;
        }
      }
    }
    if (!chosen) throw ServiceError(ServiceErrorCode::Internal, "no duel available");
    inst.handed_out[*chosen] = ++inst.tick;
    duel = inst.engine.pending().at(*chosen);
  }

  {
    std::unique_lock lock(sessions_mutex_);
    auto it = sessions_.find(token);
    if (it != sessions_.end()) it->second.current_duel = duel.id;
  }

  Pair pair;
  pair.duel_id = s.instance + "-" + std::to_string(duel.id);
  const std::string focal = image_ref(inst, duel.focal);
  const std::string opponent = image_ref(inst, duel.opponent);
  pair.left = duel.display_swap ? opponent : focal;
  pair.right = duel.display_swap ? focal : opponent;
  return pair;
}

VoteAck Campaign::submit_vote(const std::string& token, const std::string& duel_id,
                              const std::string& side) {
  if (side != "left" && side != "right")
    throw ServiceError(ServiceErrorCode::BadRequest, "side must be \"left\" or \"right\"");

  Session s;
  const auto now = std::chrono::steady_clock::now();
  {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) throw ServiceError(ServiceErrorCode::UnknownSession, "unknown session token");
    s = it->second.session;
    if (config_.rate_limit_per_sec > 0.0 && it->second.has_voted) {
      const auto min_gap = std::chrono::duration<double>(1.0 / config_.rate_limit_per_sec);
      if (now - it->second.last_vote < min_gap)
        throw ServiceError(ServiceErrorCode::RateLimited, "too many votes; slow down");
    }
  }

  const auto dash = duel_id.rfind('-');
  if (dash == std::string::npos || dash + 1 >= duel_id.size())
    throw ServiceError(ServiceErrorCode::UnknownDuel, "malformed duel id '" + duel_id + "'");
  const std::string instance = duel_id.substr(0, dash);
  std::uint64_t id = 0;
  try {
    std::size_t used = 0;
    id = std::stoull(duel_id.substr(dash + 1), &used);
    if (used != duel_id.size() - dash - 1) throw std::invalid_argument(duel_id);
  } catch (const std::exception&) {
    throw ServiceError(ServiceErrorCode::UnknownDuel, "malformed duel id '" + duel_id + "'");
  }
  if (!instances_.count(instance))
    throw ServiceError(ServiceErrorCode::UnknownDuel, "unknown duel '" + duel_id + "'");
  if (instance != s.instance) {
    throw ServiceError(ServiceErrorCode::BadInstance,
                       "duel belongs to instance " + instance + ", session is on " + s.instance);
  }

  Instance& inst = instance_for(instance);
  VoteAck ack;
  {
    std::lock_guard lock(inst.mutex);
    Duel duel;
    try {
      duel = inst.engine.check_outcome(id);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::Terminated:
          throw ServiceError(ServiceErrorCode::CampaignComplete, "campaign complete");
        case ErrorCode::DuplicateOutcome:
          throw ServiceError(ServiceErrorCode::DuplicateVote, e.what());
        default:
          throw ServiceError(ServiceErrorCode::UnknownDuel, e.what());
      }
    }
    const bool chose_right = side == "right";
    ComparisonRecord rec;
    rec.instance = instance;
    rec.duel_id = id;
    rec.focal = duel.focal;
    rec.opponent = duel.opponent;
    rec.focal_won = chose_right == duel.display_swap;
    rec.rater = s.rater;
    rec.timestamp = now_ms();
    rec.seq = inst.log.append(rec);  // durable before the engine moves
    inst.engine.record_outcome(id, rec.focal_won);
    inst.handed_out.erase(id);
    inst.count(rec);
    ack.seq = rec.seq;
    ack.next_available = !inst.engine.is_terminated();
  }

  {
    std::unique_lock lock(sessions_mutex_);
    auto it = sessions_.find(token);
    if (it != sessions_.end()) {
      it->second.last_vote = now;
      it->second.has_voted = true;
      if (it->second.current_duel == id) it->second.current_duel.reset();
    }
  }
  return ack;
}

ordered_json Campaign::ranking(const std::string& instance) const {
  const Instance& inst = instance_for(instance);
  std::lock_guard lock(inst.mutex);
  const RankingResult result = inst.engine.result(/*allow_provisional=*/true);
  auto ids = [&](const std::vector<std::size_t>& items) {
    ordered_json out = ordered_json::array();
    for (auto i : items) out.push_back(inst.items[i].id);
    return out;
  };
  ordered_json doc;
  doc["instance"] = instance;
  doc["phase"] = to_string(inst.engine.phase());
  doc["provisional"] = result.provisional;
  doc["comparisons"] = inst.engine.outcomes_recorded();
  doc["set_top"] = ids(result.top);
  doc["middle"] = ids(result.middle);
  doc["set_bottom"] = ids(result.bottom);
  ordered_json items = ordered_json::array();
  for (std::size_t pos = 0; pos < result.full_order.size(); ++pos) {
    const std::size_t i = result.full_order[pos];
    const ScoreState& s = inst.engine.scores()[i];
    ordered_json entry;
    entry["position"] = pos + 1;
    entry["item_id"] = inst.items[i].id;
    entry["label"] = to_string(inst.items[i].label);
    entry["method"] = inst.items[i].method;
    entry["tau_hat"] = s.tau_hat;
    entry["count"] = s.count;
    entry["radius"] = s.count == 0 ? ordered_json(nullptr) : ordered_json(s.radius);
    items.push_back(std::move(entry));
  }
  doc["items"] = std::move(items);
  return doc;
}

InstanceStats Campaign::stats(const std::string& instance) const {
  const Instance& inst = instance_for(instance);
  std::lock_guard lock(inst.mutex);
  InstanceStats st;
  st.total_comparisons = inst.total;
  st.distinct_raters = inst.raters.size();
  st.anonymous_comparisons = inst.anonymous;
  st.phase = inst.engine.phase();
  return st;
}

Engine Campaign::engine_snapshot(const std::string& instance) const {
  const Instance& inst = instance_for(instance);
  std::lock_guard lock(inst.mutex);
  return inst.engine;
}

Engine replay_instance(const ItemManifest& manifest, const std::string& log_dir,
                       const std::string& instance) {
  const fs::path config_path = fs::path(log_dir) / kCampaignFile;
  if (!fs::exists(config_path))
    fail(ErrorCode::Io, "no " + std::string(kCampaignFile) + " in '" + log_dir + "'");
  const CampaignConfig config = CampaignConfig::read_file(config_path.string());
  auto it = config.instances.find(instance);
  if (it == config.instances.end())
    fail(ErrorCode::InvalidArgument, "campaign has no instance '" + instance + "'");
  const auto& items = manifest.instance_items(instance);
  const RankingConfig rc = ranking_config(it->second, items.size());
  const fs::path log = fs::path(log_dir) / ("instance_" + instance + ".jsonl");
  std::vector<LogEvent> events;
  if (fs::exists(log)) events = read_log_file(log.string());
  return replay(rc, it->second.seed, events, instance);
}

stats::LabeledRanking labeled_ranking(const Engine& engine,
                                      const std::vector<ManifestItem>& items) {
  if (items.size() != engine.config().n)
    fail(ErrorCode::Mismatch, "manifest item count differs from the engine's n");
  stats::LabeledRanking ranking;
  for (std::size_t item : engine.result(/*allow_provisional=*/true).full_order) {
    ranking.item_ids.push_back(items[item].id);
    ranking.labels.push_back(items[item].label);
  }
  return ranking;
}

// ---------------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ServiceErrorCode code, const std::string& message) {
  ordered_json body;
  body["code"] = wire_code(code);
  body["message"] = message;
  send_json(res, body, http_status(code));
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    send_error(res, e.code(), e.what());
  } catch (const Error& e) {
    send_error(res, ServiceErrorCode::Internal, e.what());
  } catch (const std::exception& e) {
    send_error(res, ServiceErrorCode::Internal, e.what());
  }
}

std::string content_type_for(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

bool safe_relative(const fs::path& p) {
  if (p.empty() || p.is_absolute()) return false;
  for (const auto& part : p) {
    if (part == "..") return false;
  }
  return true;
}

}  // namespace

HttpServer::HttpServer(Campaign& campaign, std::string image_root)
    : campaign_(campaign),
      image_root_(std::move(image_root)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  auto& svr = *server_;

  svr.Post("/api/session", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Session s = campaign_.create_session(req.get_header_value("X-Rater-Id"));
      ordered_json body;
      body["token"] = s.token;
      body["instance"] = s.instance;
      body["tutorial_completed"] = s.tutorial_completed;
      send_json(res, body);
    });
  });

  svr.Post("/api/tutorial", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      campaign_.complete_tutorial(req.get_header_value("X-Session-Token"));
      send_json(res, ordered_json{{"ok", true}});
    });
  });

  svr.Get("/api/pair", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Pair pair = campaign_.get_pair(req.get_header_value("X-Session-Token"));
      ordered_json body;
      body["duel_id"] = pair.duel_id;
      body["left"] = pair.left;
      body["right"] = pair.right;
      send_json(res, body);
    });
  });

  svr.Post("/api/vote", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        throw ServiceError(ServiceErrorCode::BadRequest, "body must be JSON {duel_id, side}");
      }
      if (!body.is_object() || !body.contains("duel_id") || !body["duel_id"].is_string() ||
          !body.contains("side") || !body["side"].is_string()) {
        throw ServiceError(ServiceErrorCode::BadRequest, "body must be JSON {duel_id, side}");
      }
      const VoteAck ack = campaign_.submit_vote(req.get_header_value("X-Session-Token"),
                                                body["duel_id"].get<std::string>(),
                                                body["side"].get<std::string>());
      ordered_json out;
      out["ok"] = true;
      out["seq"] = ack.seq;
      out["next_available"] = ack.next_available;
      send_json(res, out);
    });
  });

  svr.Get("/api/ranking", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, campaign_.ranking(req.get_param_value("instance"))); });
  });

  svr.Get("/api/stats", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string instance = req.get_param_value("instance");
      const InstanceStats st = campaign_.stats(instance);
      ordered_json body;
      body["instance"] = instance;
      body["total_comparisons"] = st.total_comparisons;
      body["distinct_raters"] = st.distinct_raters;
      body["anonymous_comparisons"] = st.anonymous_comparisons;
      body["phase"] = to_string(st.phase);
      send_json(res, body);
    });
  });

  svr.Get(R"(/img/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const fs::path rel(req.matches[1].str());
      if (!safe_relative(rel)) throw ServiceError(ServiceErrorCode::NotFound, "no such image");
      const fs::path full = fs::path(image_root_) / rel;
      std::ifstream in(full, std::ios::binary);
      if (!in) throw ServiceError(ServiceErrorCode::NotFound, "no such image");
      std::ostringstream bytes;
      bytes << in.rdbuf();
      res.set_content(bytes.str(), content_type_for(full));
    });
  });
}

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) fail(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port))
    fail(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
  return port;
}

void HttpServer::serve() { server_->listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { serve(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace hlucb::service
