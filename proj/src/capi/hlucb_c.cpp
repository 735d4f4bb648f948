#include "hlucb/hlucb.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../core/comparator.hpp"
#include "../core/config.hpp"
#include "../core/engine.hpp"
#include "../core/error.hpp"
#include "../core/rank_stats.hpp"
#include "../core/service.hpp"
#include "../core/store.hpp"

struct hlucb_engine {
  hlucb::Engine engine;
};

struct hlucb_service {
  std::unique_ptr<hlucb::service::Campaign> campaign;
  std::unique_ptr<hlucb::service::HttpServer> server;
};

namespace {

thread_local std::string g_last_error;

hlucb_status map_code(hlucb::ErrorCode code) {
  using hlucb::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return HLUCB_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidConfig: return HLUCB_ERR_INVALID_CONFIG;
    case ErrorCode::Domain: return HLUCB_ERR_DOMAIN;
    case ErrorCode::State: return HLUCB_ERR_STATE;
    case ErrorCode::UnknownDuel: return HLUCB_ERR_UNKNOWN_DUEL;
    case ErrorCode::DuplicateOutcome: return HLUCB_ERR_DUPLICATE_OUTCOME;
    case ErrorCode::Terminated: return HLUCB_ERR_TERMINATED;
    case ErrorCode::Io: return HLUCB_ERR_IO;
    case ErrorCode::Parse: return HLUCB_ERR_PARSE;
    case ErrorCode::Mismatch: return HLUCB_ERR_MISMATCH;
  }
  return HLUCB_ERR_INTERNAL;
}

hlucb_status set_error(hlucb_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
hlucb_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const hlucb::Error& e) {
    return set_error(map_code(e.code()), e.what());
  } catch (const hlucb::service::ServiceError& e) {
    return set_error(HLUCB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(HLUCB_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(HLUCB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(HLUCB_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(HLUCB_ERR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) hlucb::fail(hlucb::ErrorCode::InvalidArgument, what);
}

hlucb::RankingConfig to_config(const hlucb_config* c) {
  require(c != nullptr, "config is null");
  return {c->n, c->k, c->h, c->sigma, c->radius_constant};
}

hlucb::sim::ComparatorModel to_model(const hlucb_model* m) {
  require(m != nullptr, "model is null");
  switch (m->kind) {
    case HLUCB_MODEL_BRADLEY_TERRY:
      require(m->values != nullptr, "model values are null");
      return hlucb::sim::ComparatorModel(
          hlucb::sim::BradleyTerry{std::vector<double>(m->values, m->values + m->n)});
    case HLUCB_MODEL_PLANTED_BORDA:
      require(m->values != nullptr, "model values are null");
      return hlucb::sim::ComparatorModel(
          hlucb::sim::PlantedBorda{std::vector<double>(m->values, m->values + m->n)});
    case HLUCB_MODEL_DETERMINISTIC:
      require(m->order != nullptr, "model order is null");
      return hlucb::sim::ComparatorModel(
          hlucb::sim::Deterministic{std::vector<std::size_t>(m->order, m->order + m->n)});
  }
  hlucb::fail(hlucb::ErrorCode::InvalidArgument, "unknown model kind");
}

nlohmann::ordered_json result_json(const hlucb::RankingResult& r) {
  nlohmann::ordered_json doc;
  doc["set_top"] = r.top;
  doc["middle"] = r.middle;
  doc["set_bottom"] = r.bottom;
  doc["full_order"] = r.full_order;
  doc["provisional"] = r.provisional;
  return doc;
}

}  // namespace

extern "C" {

const char* hlucb_version(void) { return HLUCB_VERSION_STRING; }

const char* hlucb_last_error(void) { return g_last_error.c_str(); }

const char* hlucb_status_name(hlucb_status status) {
  switch (status) {
    case HLUCB_OK: return "ok";
    case HLUCB_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case HLUCB_ERR_INVALID_CONFIG: return "invalid_config";
    case HLUCB_ERR_DOMAIN: return "domain";
    case HLUCB_ERR_STATE: return "state";
    case HLUCB_ERR_UNKNOWN_DUEL: return "unknown_duel";
    case HLUCB_ERR_DUPLICATE_OUTCOME: return "duplicate_outcome";
    case HLUCB_ERR_TERMINATED: return "terminated";
    case HLUCB_ERR_IO: return "io";
    case HLUCB_ERR_PARSE: return "parse";
    case HLUCB_ERR_MISMATCH: return "mismatch";
    case HLUCB_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case HLUCB_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void hlucb_string_free(char* str) { std::free(str); }

void hlucb_config_init(hlucb_config* config) {
  if (!config) return;
  *config = hlucb_config{0, 0, 0, 0.1, 1.0};
}

hlucb_status hlucb_config_validate(const hlucb_config* config) {
  return guarded([&] {
    hlucb::validate(to_config(config));
    return HLUCB_OK;
  });
}

hlucb_status hlucb_confidence_radius(uint64_t count, size_t n, double sigma,
                                     double radius_constant, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = hlucb::confidence_radius(count, n, sigma, radius_constant);
    return HLUCB_OK;
  });
}

hlucb_status hlucb_engine_create(const hlucb_config* config, uint64_t seed, hlucb_engine** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new hlucb_engine{hlucb::Engine(to_config(config), seed)};
    return HLUCB_OK;
  });
}

void hlucb_engine_destroy(hlucb_engine* engine) { delete engine; }

hlucb_status hlucb_engine_restore(const char* json, hlucb_engine** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "null argument");
    auto doc = nlohmann::json::parse(json);
    *out = new hlucb_engine{hlucb::Engine::from_json(doc)};
    return HLUCB_OK;
  });
}

hlucb_status hlucb_engine_snapshot(const hlucb_engine* engine, char** json_out) {
  return guarded([&] {
    require(engine != nullptr && json_out != nullptr, "null argument");
    *json_out = dup_string(engine->engine.canonical());
    return HLUCB_OK;
  });
}

hlucb_status hlucb_engine_next_duels(hlucb_engine* engine, hlucb_duel* out, size_t capacity,
                                     size_t* count) {
  return guarded([&] {
    require(engine != nullptr && count != nullptr, "null argument");
    require(out != nullptr || capacity == 0, "out is null");
    auto duels = engine->engine.next_duels();
    *count = duels.size();
    for (std::size_t i = 0; i < duels.size() && i < capacity; ++i) {
      out[i] = hlucb_duel{duels[i].id, duels[i].focal, duels[i].opponent,
                          duels[i].display_swap ? 1 : 0};
    }
    if (capacity < duels.size()) {
      return set_error(HLUCB_ERR_BUFFER_TOO_SMALL,
                       "need room for " + std::to_string(duels.size()) + " duels");
    }
    return HLUCB_OK;
  });
}

hlucb_status hlucb_engine_record_outcome(hlucb_engine* engine, uint64_t duel_id, int focal_won) {
  return guarded([&] {
    require(engine != nullptr, "engine is null");
    engine->engine.record_outcome(duel_id, focal_won != 0);
    return HLUCB_OK;
  });
}

hlucb_status hlucb_engine_phase(const hlucb_engine* engine, hlucb_phase* out) {
  return guarded([&] {
    require(engine != nullptr && out != nullptr, "null argument");
    *out = static_cast<hlucb_phase>(engine->engine.phase());
    return HLUCB_OK;
  });
}

hlucb_status hlucb_engine_indices(const hlucb_engine* engine, hlucb_indices* out) {
  return guarded([&] {
    require(engine != nullptr && out != nullptr, "null argument");
    auto sel = engine->engine.selection();
    *out = hlucb_indices{sel.bounds.d1, sel.bounds.d2, sel.focus.b1, sel.focus.b2,
                         sel.item_b1(), sel.item_b2(), sel.stop ? 1 : 0};
    return HLUCB_OK;
  });
}

hlucb_status hlucb_engine_score(const hlucb_engine* engine, size_t item, double* tau_hat,
                                uint64_t* count, double* radius) {
  return guarded([&] {
    require(engine != nullptr, "engine is null");
    auto scores = engine->engine.scores();
    require(item < scores.size(), "item out of range");
    if (tau_hat) *tau_hat = scores[item].tau_hat;
    if (count) *count = scores[item].count;
    if (radius) *radius = scores[item].radius;
    return HLUCB_OK;
  });
}

hlucb_status hlucb_engine_result(const hlucb_engine* engine, int allow_provisional,
                                 char** json_out) {
  return guarded([&] {
    require(engine != nullptr && json_out != nullptr, "null argument");
    *json_out = dup_string(result_json(engine->engine.result(allow_provisional != 0)).dump());
    return HLUCB_OK;
  });
}

hlucb_status hlucb_geometric_weights(size_t n, double ratio, uint64_t permute_seed,
                                     double* out) {
  return guarded([&] {
    require(out != nullptr || n == 0, "out is null");
    auto w = hlucb::sim::geometric_weights(n, ratio, permute_seed);
    std::copy(w.begin(), w.end(), out);
    return HLUCB_OK;
  });
}

hlucb_status hlucb_true_borda(const hlucb_model* model, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    auto borda = to_model(model).true_borda();
    std::copy(borda.begin(), borda.end(), out);
    return HLUCB_OK;
  });
}

const char* hlucb_sim_csv_header(void) {
  static const std::string header = hlucb::sim::SimReport::csv_header();
  return header.c_str();
}

hlucb_status hlucb_simulate(const hlucb_config* config, const hlucb_model* model,
                            uint64_t budget, uint64_t seed, const char* log_path,
                            char** report_json, char** csv_row) {
  return guarded([&] {
    hlucb::sim::SimOptions options;
    options.budget = budget;
    options.keep_log = log_path != nullptr;
    auto report = hlucb::sim::run_simulation(to_config(config), to_model(model), seed, options);
    if (log_path) hlucb::write_log_file(log_path, report.log);
    char* json = report_json ? dup_string(report.to_json().dump()) : nullptr;
    try {
      if (csv_row) *csv_row = dup_string(report.csv_row());
    } catch (...) {
      std::free(json);
      throw;
    }
    if (report_json) *report_json = json;
    return HLUCB_OK;
  });
}

hlucb_status hlucb_replay_log(const char* log_path, const hlucb_config* config, uint64_t seed,
                              const char* instance, hlucb_engine** out) {
  return guarded([&] {
    require(log_path != nullptr && out != nullptr, "null argument");
    auto events = hlucb::read_log_file(log_path);
    *out = new hlucb_engine{
        hlucb::replay(to_config(config), seed, events, instance ? instance : "")};
    return HLUCB_OK;
  });
}

hlucb_status hlucb_campaign_replay(const char* manifest_path, const char* log_dir,
                                   const char* instance, hlucb_engine** out) {
  return guarded([&] {
    require(manifest_path && log_dir && instance && out, "null argument");
    auto manifest = hlucb::ItemManifest::read_file(manifest_path);
    *out = new hlucb_engine{hlucb::service::replay_instance(manifest, log_dir, instance)};
    return HLUCB_OK;
  });
}

hlucb_status hlucb_campaign_ranking_csv(const char* manifest_path, const hlucb_engine* engine,
                                        const char* instance, char** csv_out) {
  return guarded([&] {
    require(manifest_path && engine && instance && csv_out, "null argument");
    auto manifest = hlucb::ItemManifest::read_file(manifest_path);
    const auto& items = manifest.instance_items(instance);
    *csv_out = dup_string(
        hlucb::stats::ranking_csv(hlucb::service::labeled_ranking(engine->engine, items)));
    return HLUCB_OK;
  });
}

hlucb_status hlucb_accuracy_from_csv(const char* ranking_path, hlucb_accuracy* out) {
  return guarded([&] {
    require(ranking_path && out, "null argument");
    auto ranking = hlucb::stats::read_ranking_csv_file(ranking_path);
    auto r = hlucb::stats::accuracy_from_ranking(ranking);
    *out = hlucb_accuracy{r.true_positive_rate, r.false_positive_rate, r.accuracy,
                          ranking.size(),       r.fakes,               r.reals,
                          r.top_half};
    return HLUCB_OK;
  });
}

hlucb_status hlucb_pearson(const double* x, const double* y, size_t n, double* out) {
  return guarded([&] {
    require(x && y && out, "null argument");
    *out = hlucb::stats::pearson({x, n}, {y, n});
    return HLUCB_OK;
  });
}

hlucb_status hlucb_spearman(const double* x, const double* y, size_t n, double* out) {
  return guarded([&] {
    require(x && y && out, "null argument");
    *out = hlucb::stats::spearman({x, n}, {y, n});
    return HLUCB_OK;
  });
}

hlucb_status hlucb_p_value(double r, size_t n, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = hlucb::stats::p_value(r, n);
    return HLUCB_OK;
  });
}

hlucb_status hlucb_correlate_files(const char* margins_path, const char* human_path,
                                   const char* transform, size_t permutations, uint64_t seed,
                                   char** report_json) {
  return guarded([&] {
    require(margins_path && human_path && report_json, "null argument");
    hlucb::stats::CorrelateOptions options;
    options.transform = hlucb::stats::transform_from_string(transform ? transform : "identity");
    options.permutations = permutations;
    options.seed = seed;
    auto margins = hlucb::stats::read_margins_csv_file(margins_path);
    auto human = hlucb::stats::read_human_scores_file(human_path);
    auto report = hlucb::stats::correlate_model_vs_human(margins, human, options);
    *report_json = dup_string(report.to_json().dump());
    return HLUCB_OK;
  });
}

hlucb_status hlucb_service_create(const char* manifest_path, const char* log_dir,
                                  const char* config_path, const char* image_root,
                                  hlucb_service** out) {
  return guarded([&] {
    require(manifest_path && log_dir && out, "null argument");
    auto manifest = hlucb::ItemManifest::read_file(manifest_path);
    std::optional<hlucb::service::CampaignConfig> config;
    if (config_path) config = hlucb::service::CampaignConfig::read_file(config_path);
    auto svc = std::make_unique<hlucb_service>();
    svc->campaign =
        std::make_unique<hlucb::service::Campaign>(std::move(manifest), log_dir, config);
    svc->server = std::make_unique<hlucb::service::HttpServer>(*svc->campaign,
                                                               image_root ? image_root : ".");
    *out = svc.release();
    return HLUCB_OK;
  });
}

hlucb_status hlucb_service_bind(hlucb_service* service, const char* host, int port,
                                int* bound_port) {
  return guarded([&] {
    require(service && host, "null argument");
    int bound = service->server->bind(host, port);
    if (bound_port) *bound_port = bound;
    return HLUCB_OK;
  });
}

hlucb_status hlucb_service_run(hlucb_service* service) {
  return guarded([&] {
    require(service != nullptr, "service is null");
    service->server->serve();
    return HLUCB_OK;
  });
}

void hlucb_service_stop(hlucb_service* service) {
  if (service) service->server->stop();
}

void hlucb_service_destroy(hlucb_service* service) {
  if (!service) return;
  service->server.reset();
  service->campaign.reset();
  delete service;
}

}  // extern "C"
