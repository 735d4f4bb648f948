// Exercises the shared library through its C header only.
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlucb/hlucb.h"
#include "support/test_support.hpp"

extern "C" int hlucb_header_check_default_sigma(void);

using nlohmann::json;

namespace {

hlucb_config config(size_t n, size_t k, size_t h) {
  hlucb_config c;
  hlucb_config_init(&c);
  c.n = n;
  c.k = k;
  c.h = h;
  return c;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  hlucb_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version, status names and defaults") {
  CHECK(std::string(hlucb_version()) == "0.1.0");
  CHECK(std::string(hlucb_status_name(HLUCB_OK)) == "ok");
  CHECK(std::string(hlucb_status_name(HLUCB_ERR_BUFFER_TOO_SMALL)) == "buffer_too_small");
  CHECK(hlucb_header_check_default_sigma() == 1);
  hlucb_string_free(nullptr);
}

TEST_CASE("config validation reports through last_error") {
  hlucb_config c = config(20, 10, 2);
  CHECK(hlucb_config_validate(&c) == HLUCB_OK);
  CHECK(std::string(hlucb_last_error()).empty());
  c.h = 10;
  CHECK(hlucb_config_validate(&c) == HLUCB_ERR_INVALID_CONFIG);
  CHECK(std::string(hlucb_last_error()).find("k - h") != std::string::npos);
  CHECK(hlucb_config_validate(nullptr) == HLUCB_ERR_INVALID_ARGUMENT);

  double r = 0;
  CHECK(hlucb_confidence_radius(4, 2, 1.0, 1.0, &r) == HLUCB_OK);
  CHECK(r == doctest::Approx(0.416277305578848878).epsilon(1e-15));
  CHECK(hlucb_confidence_radius(0, 20, 0.1, 1.0, &r) == HLUCB_ERR_DOMAIN);
  CHECK(hlucb_confidence_radius(4, 20, 0.1, 1.0, nullptr) == HLUCB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("engine lifecycle through the C API") {
  hlucb_config c = config(4, 2, 0);
  hlucb_engine* e = nullptr;
  REQUIRE(hlucb_engine_create(&c, 3, &e) == HLUCB_OK);

  hlucb_phase phase;
  REQUIRE(hlucb_engine_phase(e, &phase) == HLUCB_OK);
  CHECK(phase == HLUCB_PHASE_INITIALIZING);

  size_t count = 0;
  CHECK(hlucb_engine_next_duels(e, nullptr, 0, &count) == HLUCB_ERR_BUFFER_TOO_SMALL);
  CHECK(count == 4);
  std::vector<hlucb_duel> duels(2);
  CHECK(hlucb_engine_next_duels(e, duels.data(), 2, &count) == HLUCB_ERR_BUFFER_TOO_SMALL);
  const uint64_t first = duels[0].duel_id;
  duels.resize(count);
  REQUIRE(hlucb_engine_next_duels(e, duels.data(), duels.size(), &count) == HLUCB_OK);
  CHECK(duels[0].duel_id == first);  // same round, not a new one
  for (size_t i = 0; i < count; ++i) {
    CHECK(duels[i].focal == i);
    CHECK(duels[i].opponent != i);
  }

  char* result = nullptr;
  CHECK(hlucb_engine_result(e, 0, &result) == HLUCB_ERR_STATE);
  CHECK(result == nullptr);

  // strongest-first by item index: the lower index wins
  int guard = 0;
  while (phase != HLUCB_PHASE_TERMINATED && guard++ < 100000) {
    REQUIRE(hlucb_engine_next_duels(e, duels.data(), duels.size(), &count) != HLUCB_ERR_INTERNAL);
    if (count > duels.size()) duels.resize(count);
    REQUIRE(hlucb_engine_next_duels(e, duels.data(), duels.size(), &count) == HLUCB_OK);
    for (size_t i = 0; i < count; ++i) {
      const hlucb_status st =
          hlucb_engine_record_outcome(e, duels[i].duel_id, duels[i].focal < duels[i].opponent);
      REQUIRE((st == HLUCB_OK || st == HLUCB_ERR_TERMINATED));
    }
    REQUIRE(hlucb_engine_phase(e, &phase) == HLUCB_OK);
  }
  REQUIRE(phase == HLUCB_PHASE_TERMINATED);

  hlucb_indices idx;
  REQUIRE(hlucb_engine_indices(e, &idx) == HLUCB_OK);
  CHECK(idx.stop == 1);
  CHECK(idx.d1 == 1);
  CHECK(idx.d2 == 2);

  REQUIRE(hlucb_engine_result(e, 0, &result) == HLUCB_OK);
  const json r = json::parse(take(result));
  CHECK(r["set_top"] == json::array({0, 1}));
  CHECK(r["set_bottom"] == json::array({2, 3}));
  CHECK(r["provisional"] == false);

  double tau = -1, rad = -1;
  uint64_t n = 0;
  CHECK(hlucb_engine_score(e, 0, &tau, &n, &rad) == HLUCB_OK);
  CHECK(tau == 1.0);
  CHECK(n > 0);
  CHECK(hlucb_engine_score(e, 4, &tau, &n, &rad) == HLUCB_ERR_INVALID_ARGUMENT);

  CHECK(hlucb_engine_record_outcome(e, 1, 1) == HLUCB_ERR_TERMINATED);

  char* snap = nullptr;
  REQUIRE(hlucb_engine_snapshot(e, &snap) == HLUCB_OK);
  const std::string text = take(snap);
  hlucb_engine* restored = nullptr;
  REQUIRE(hlucb_engine_restore(text.c_str(), &restored) == HLUCB_OK);
  REQUIRE(hlucb_engine_snapshot(restored, &snap) == HLUCB_OK);
  CHECK(take(snap) == text);
  hlucb_engine_destroy(restored);
  hlucb_engine_destroy(e);
  hlucb_engine_destroy(nullptr);
}

TEST_CASE("engine errors map to status codes") {
  hlucb_config c = config(3, 1, 0);
  hlucb_engine* e = nullptr;
  REQUIRE(hlucb_engine_create(&c, 1, &e) == HLUCB_OK);
  size_t count = 0;
  std::vector<hlucb_duel> duels(8);
  REQUIRE(hlucb_engine_next_duels(e, duels.data(), duels.size(), &count) == HLUCB_OK);
  CHECK(hlucb_engine_record_outcome(e, 999, 1) == HLUCB_ERR_UNKNOWN_DUEL);
  REQUIRE(hlucb_engine_record_outcome(e, duels[0].duel_id, 1) == HLUCB_OK);
  CHECK(hlucb_engine_record_outcome(e, duels[0].duel_id, 1) == HLUCB_ERR_DUPLICATE_OUTCOME);
  CHECK(hlucb_engine_record_outcome(nullptr, 1, 1) == HLUCB_ERR_INVALID_ARGUMENT);
  hlucb_engine_destroy(e);

  hlucb_engine* bad = nullptr;
  CHECK(hlucb_engine_restore("{not json", &bad) == HLUCB_ERR_PARSE);
  CHECK(bad == nullptr);
  CHECK(hlucb_engine_restore(nullptr, &bad) == HLUCB_ERR_INVALID_ARGUMENT);
  c.k = 3;
  CHECK(hlucb_engine_create(&c, 1, &bad) == HLUCB_ERR_INVALID_CONFIG);
  CHECK(std::strlen(hlucb_last_error()) > 0);
}

TEST_CASE("simulation, log replay and statistics") {
  testing::TempDir dir;
  hlucb_config c = config(8, 4, 1);
  std::vector<double> w(8);
  REQUIRE(hlucb_geometric_weights(8, 2.0, 0, w.data()) == HLUCB_OK);
  CHECK(w[0] == 128.0);
  CHECK(w[7] == 1.0);
  hlucb_model m{HLUCB_MODEL_BRADLEY_TERRY, 8, w.data(), nullptr};
  std::vector<double> borda(8);
  REQUIRE(hlucb_true_borda(&m, borda.data()) == HLUCB_OK);
  CHECK(borda[0] > borda[7]);

  const std::string log = dir.file("sim.jsonl");
  char* report = nullptr;
  char* row = nullptr;
  REQUIRE(hlucb_simulate(&c, &m, 200000, 42, log.c_str(), &report, &row) == HLUCB_OK);
  const json rep = json::parse(take(report));
  const std::string csv = take(row);
  CHECK(csv.rfind("42,8,4,1,", 0) == 0);
  CHECK(std::string(hlucb_sim_csv_header()).rfind("seed,n,k,h", 0) == 0);
  CHECK(rep["terminated"] == true);

  hlucb_engine* e = nullptr;
  REQUIRE(hlucb_replay_log(log.c_str(), &c, 42, nullptr, &e) == HLUCB_OK);
  hlucb_phase phase;
  REQUIRE(hlucb_engine_phase(e, &phase) == HLUCB_OK);
  CHECK(phase == HLUCB_PHASE_TERMINATED);
  hlucb_engine_destroy(e);
  hlucb_config smaller = config(4, 2, 1);
  CHECK(hlucb_replay_log(log.c_str(), &smaller, 42, nullptr, &e) == HLUCB_ERR_INVALID_ARGUMENT);
  CHECK(hlucb_replay_log(dir.file("none").c_str(), &c, 42, nullptr, &e) == HLUCB_ERR_IO);

  hlucb_model bad{HLUCB_MODEL_BRADLEY_TERRY, 8, nullptr, nullptr};
  CHECK(hlucb_simulate(&c, &bad, 10, 1, nullptr, nullptr, nullptr) ==
        HLUCB_ERR_INVALID_ARGUMENT);

  const double x[] = {1, 2, 3, 4, 5};
  const double y[] = {2, 1, 4, 3, 5};
  double r = 0, p = 0;
  REQUIRE(hlucb_pearson(x, y, 5, &r) == HLUCB_OK);
  CHECK(r == doctest::Approx(0.8));
  REQUIRE(hlucb_spearman(x, y, 5, &r) == HLUCB_OK);
  CHECK(r == doctest::Approx(0.8));
  REQUIRE(hlucb_p_value(0.5, 10, &p) == HLUCB_OK);
  CHECK(p == doctest::Approx(0.1411).epsilon(1e-3));
  CHECK(hlucb_pearson(x, y, 1, &r) != HLUCB_OK);

  const std::string ranking = dir.file("ranking.csv");
  testing::write_text(ranking, "position,item_id,label\n1,a,fake\n2,b,real\n3,c,fake\n4,d,real\n");
  hlucb_accuracy acc;
  REQUIRE(hlucb_accuracy_from_csv(ranking.c_str(), &acc) == HLUCB_OK);
  CHECK(acc.true_positive_rate == 0.5);
  CHECK(acc.false_positive_rate == 0.5);
  CHECK(acc.n == 4);
  CHECK(hlucb_accuracy_from_csv(dir.file("missing.csv").c_str(), &acc) == HLUCB_ERR_IO);
}

TEST_CASE("service handle binds and stops") {
  testing::TempDir dir;
  const std::string manifest = dir.file("manifest.csv");
  testing::write_text(manifest,
                      "id,path,method,label,instance\n"
                      "a,a.png,method_a,fake,A\nb,b.png,real,real,A\nc,c.png,real,real,A\n"
                      "d,d.png,method_a,fake,B\ne,e.png,real,real,B\nf,f.png,real,real,B\n");
  hlucb_service* svc = nullptr;
  REQUIRE(hlucb_service_create(manifest.c_str(), dir.file("logs").c_str(), nullptr,
                               dir.path().c_str(), &svc) == HLUCB_OK);
  int port = 0;
  REQUIRE(hlucb_service_bind(svc, "127.0.0.1", 0, &port) == HLUCB_OK);
  CHECK(port > 0);
  hlucb_service_stop(svc);
  hlucb_service_destroy(svc);

  CHECK(hlucb_service_create(dir.file("nope.csv").c_str(), dir.file("logs").c_str(), nullptr,
                             dir.path().c_str(), &svc) == HLUCB_ERR_IO);
}
