// hlucb command-line front end. Talks to the library only through hlucb.h.

#include <hlucb/hlucb.h>

#include <algorithm>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure : std::runtime_error {
  Failure(int exit_code, const std::string& what)
      : std::runtime_error(what), exit_code(exit_code) {}
  int exit_code;
};

int exit_code_for(hlucb_status status) {
  switch (status) {
    case HLUCB_ERR_INVALID_ARGUMENT:
    case HLUCB_ERR_INVALID_CONFIG:
    case HLUCB_ERR_DOMAIN:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

void check(hlucb_status status) {
  if (status != HLUCB_OK) {
    throw Failure(exit_code_for(status),
                  std::string(hlucb_status_name(status)) + ": " + hlucb_last_error());
  }
}

// Owns a string handed out by the library.
class OwnedString {
 public:
  OwnedString() = default;
  ~OwnedString() { hlucb_string_free(ptr_); }
  OwnedString(const OwnedString&) = delete;
  OwnedString& operator=(const OwnedString&) = delete;

  char** out() { return &ptr_; }
  std::string str() const { return ptr_ ? ptr_ : ""; }

 private:
  char* ptr_ = nullptr;
};

struct EngineHandle {
  hlucb_engine* ptr = nullptr;
  ~EngineHandle() { hlucb_engine_destroy(ptr); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure(kExitRuntime, "cannot open " + path + " for writing");
  out << content;
  if (!out.flush()) throw Failure(kExitRuntime, "write failed: " + path);
}

struct RankingFlags {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t h = 0;
  double sigma = 0.1;
  double c = 1.0;
  std::uint64_t seed = 1;

  hlucb_config config() const {
    hlucb_config cfg;
    hlucb_config_init(&cfg);
    cfg.n = n;
    cfg.k = k;
    cfg.h = h;
    cfg.sigma = sigma;
    cfg.radius_constant = c;
    return cfg;
  }
};

void add_ranking_flags(CLI::App* cmd, RankingFlags& f, bool required) {
  auto* n = cmd->add_option("--n", f.n, "number of items");
  auto* k = cmd->add_option("--k", f.k, "split point");
  if (required) {
    n->required();
    k->required();
  }
  cmd->add_option("--h", f.h, "allowed mistakes per set")->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "risk parameter")->capture_default_str();
  cmd->add_option("--c", f.c, "radius constant")->capture_default_str();
  cmd->add_option("--seed", f.seed, "seed")->capture_default_str();
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  RankingFlags ranking;
  std::string model = "bt";
  double ratio = 1.3;
  std::size_t trials = 1;
  std::uint64_t budget = 1'000'000;
  std::string out;
  std::string log_dir;
};

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

int run_simulate(const SimulateArgs& args) {
  const hlucb_config cfg = args.ranking.config();
  check(hlucb_config_validate(&cfg));
  if (args.trials == 0) throw Failure(kExitUsage, "--trials must be >= 1");
  if (!args.log_dir.empty()) std::filesystem::create_directories(args.log_dir);

  std::ostringstream csv;
  csv << hlucb_sim_csv_header() << '\n';
  std::vector<std::uint64_t> used;
  std::size_t terminated = 0;
  std::size_t within_h = 0;
  const std::size_t n = cfg.n;

  for (std::size_t t = 0; t < args.trials; ++t) {
    const std::uint64_t seed = args.ranking.seed + t;
    std::vector<double> values;
    std::vector<std::size_t> order;
    hlucb_model model{HLUCB_MODEL_BRADLEY_TERRY, n, nullptr, nullptr};
    if (args.model == "bt") {
      values.resize(n);
      check(hlucb_geometric_weights(n, args.ratio, seed, values.data()));
      model.values = values.data();
    } else if (args.model == "planted") {
      // evenly spaced win rates in [0.1, 0.9], strongest first, then shuffled
      order = shuffled_order(n, seed);
      values.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        values[order[r]] = 0.9 - 0.8 * static_cast<double>(r) / static_cast<double>(n - 1);
      }
      model.kind = HLUCB_MODEL_PLANTED_BORDA;
      model.values = values.data();
    } else {
      order = shuffled_order(n, seed);
      model.kind = HLUCB_MODEL_DETERMINISTIC;
      model.order = order.data();
    }

    std::string log_path;
    if (!args.log_dir.empty()) {
      log_path = (std::filesystem::path(args.log_dir) / ("trial_" + std::to_string(t) + ".jsonl"))
                     .string();
    }
    OwnedString report;
    OwnedString row;
    check(hlucb_simulate(&cfg, &model, args.budget, seed,
                         log_path.empty() ? nullptr : log_path.c_str(), report.out(), row.out()));
    csv << row.str() << '\n';

    // columns: seed,n,k,h,sigma,radius_constant,comparisons_used,terminated,top,bottom
    std::vector<std::string> fields;
    std::stringstream ss(row.str());
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    used.push_back(std::stoull(fields.at(6)));
    const bool term = fields.at(7) == "true";
    terminated += term;
    if (term && std::stoull(fields.at(8)) <= cfg.h && std::stoull(fields.at(9)) <= cfg.h) {
      ++within_h;
    }
  }

  if (!args.out.empty()) write_file(args.out, csv.str());

  std::vector<std::uint64_t> sorted = used;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.size() % 2
                            ? static_cast<double>(sorted[sorted.size() / 2])
                            : 0.5 * static_cast<double>(sorted[sorted.size() / 2 - 1] +
                                                        sorted[sorted.size() / 2]);
  std::cout << "trials:             " << args.trials << '\n'
            << "terminated:         " << terminated << '\n'
            << "both errors <= h:   " << within_h << " ("
            << 100.0 * static_cast<double>(within_h) / static_cast<double>(args.trials) << "%)\n"
            << "median comparisons: " << median << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// replay / rank / export

struct CampaignArgs {
  std::string manifest;
  std::string log_dir;
  std::string instance;
};

void add_campaign_flags(CLI::App* cmd, CampaignArgs& a, bool required) {
  auto* m = cmd->add_option("--manifest", a.manifest, "item manifest CSV");
  auto* d = cmd->add_option("--log-dir", a.log_dir, "campaign log directory");
  auto* i = cmd->add_option("--instance", a.instance, "instance name");
  if (required) {
    m->required()->check(CLI::ExistingFile);
    d->required()->check(CLI::ExistingDirectory);
    i->required();
  }
}

void print_engine_summary(const hlucb_engine* engine, std::size_t n) {
  hlucb_phase phase;
  check(hlucb_engine_phase(engine, &phase));
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t count = 0;
    check(hlucb_engine_score(engine, i, nullptr, &count, nullptr));
    total += count;
  }
  const char* names[] = {"initializing", "active", "terminated"};
  std::cout << "phase:       " << names[phase] << '\n'
            << "items:       " << n << '\n'
            << "comparisons: " << total << '\n';
}

std::size_t engine_size(const hlucb_engine* engine) {
  std::size_t n = 0;
  while (hlucb_engine_score(engine, n, nullptr, nullptr, nullptr) == HLUCB_OK) ++n;
  return n;
}

struct ReplayArgs {
  std::string log;
  RankingFlags ranking;
  CampaignArgs campaign;
  std::string out;
};

int run_replay(const ReplayArgs& args) {
  EngineHandle engine;
  if (!args.log.empty()) {
    const hlucb_config cfg = args.ranking.config();
    check(hlucb_config_validate(&cfg));
    check(hlucb_replay_log(args.log.c_str(), &cfg, args.ranking.seed,
                           args.campaign.instance.empty() ? nullptr
                                                          : args.campaign.instance.c_str(),
                           &engine.ptr));
  } else {
    if (args.campaign.manifest.empty() || args.campaign.log_dir.empty() ||
        args.campaign.instance.empty()) {
      throw Failure(kExitUsage, "replay needs --log or --manifest, --log-dir and --instance");
    }
    check(hlucb_campaign_replay(args.campaign.manifest.c_str(), args.campaign.log_dir.c_str(),
                                args.campaign.instance.c_str(), &engine.ptr));
  }
  print_engine_summary(engine.ptr, engine_size(engine.ptr));
  if (!args.out.empty()) {
    OwnedString snapshot;
    check(hlucb_engine_snapshot(engine.ptr, snapshot.out()));
    write_file(args.out, snapshot.str() + "\n");
  }
  return 0;
}

struct RankArgs {
  CampaignArgs campaign;
  std::string out;
};

std::string campaign_ranking(const CampaignArgs& c, EngineHandle& engine) {
  check(hlucb_campaign_replay(c.manifest.c_str(), c.log_dir.c_str(), c.instance.c_str(),
                              &engine.ptr));
  OwnedString csv;
  check(hlucb_campaign_ranking_csv(c.manifest.c_str(), engine.ptr, c.instance.c_str(),
                                   csv.out()));
  return csv.str();
}

int run_rank(const RankArgs& args) {
  EngineHandle engine;
  const std::string csv = campaign_ranking(args.campaign, engine);
  print_engine_summary(engine.ptr, engine_size(engine.ptr));
  std::cout << '\n' << csv;
  if (!args.out.empty()) write_file(args.out, csv);
  return 0;
}

struct ExportArgs {
  CampaignArgs campaign;
  std::string what = "ranking";
  std::string out;
};

int run_export(const ExportArgs& args) {
  EngineHandle engine;
  const std::string csv = campaign_ranking(args.campaign, engine);
  std::string content;
  if (args.what == "ranking") {
    content = csv;
  } else if (args.what == "snapshot") {
    OwnedString s;
    check(hlucb_engine_snapshot(engine.ptr, s.out()));
    content = s.str() + "\n";
  } else {
    OwnedString s;
    check(hlucb_engine_result(engine.ptr, 1, s.out()));
    content = s.str() + "\n";
  }
  write_file(args.out, content);
  std::cout << "wrote " << args.what << " for instance " << args.campaign.instance << " to "
            << args.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// accuracy / correlate

int run_accuracy(const std::string& ranking, const std::string& out) {
  hlucb_accuracy acc;
  check(hlucb_accuracy_from_csv(ranking.c_str(), &acc));
  char buf[256];
  std::snprintf(buf, sizeof buf, "TP rate:  %.4f\nFP rate:  %.4f\naccuracy: %.4f\n",
                acc.true_positive_rate, acc.false_positive_rate, acc.accuracy);
  std::cout << "items:    " << acc.n << " (" << acc.fakes << " fake, " << acc.reals
            << " real; top " << acc.top_half << " read as fake)\n"
            << buf;
  if (!out.empty()) {
    std::snprintf(buf, sizeof buf,
                  "{\"true_positive_rate\":%.17g,\"false_positive_rate\":%.17g,"
                  "\"accuracy\":%.17g,\"n\":%zu,\"fakes\":%zu,\"reals\":%zu,\"top_half\":%zu}\n",
                  acc.true_positive_rate, acc.false_positive_rate, acc.accuracy, acc.n,
                  acc.fakes, acc.reals, acc.top_half);
    write_file(out, buf);
  }
  return 0;
}

struct CorrelateArgs {
  std::string margins;
  std::string human;
  std::string transform = "identity";
  std::size_t permutations = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int run_correlate(const CorrelateArgs& args) {
  OwnedString report;
  check(hlucb_correlate_files(args.margins.c_str(), args.human.c_str(), args.transform.c_str(),
                              args.permutations, args.seed, report.out()));
  std::cout << report.str() << '\n';
  if (!args.out.empty()) write_file(args.out, report.str() + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// serve

struct ServeArgs {
  CampaignArgs campaign;
  std::string config;
  std::string images = ".";
  std::string host = "127.0.0.1";
  int port = 8080;
};

int run_serve(const ServeArgs& args) {
  // Block the stop signals in every thread; one waiter turns them into stop().
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  hlucb_service* service = nullptr;
  check(hlucb_service_create(args.campaign.manifest.c_str(), args.campaign.log_dir.c_str(),
                             args.config.empty() ? nullptr : args.config.c_str(),
                             args.images.c_str(), &service));
  struct Guard {
    hlucb_service* s;
    ~Guard() { hlucb_service_destroy(s); }
  } guard{service};

  int bound = 0;
  check(hlucb_service_bind(service, args.host.c_str(), args.port, &bound));
  std::cout << "listening on http://" << args.host << ':' << bound << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    hlucb_service_stop(service);
  });
  const hlucb_status status = hlucb_service_run(service);
  // run() may return on its own (listener failure); wake the waiter
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  check(status);
  std::cout << "stopped" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hlucb: active pairwise ranking with Hamming-LUCB"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", hlucb_version());
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run seeded simulations, one CSV row per trial");
  add_ranking_flags(simulate, sim.ranking, true);
  simulate->add_option("--model", sim.model, "comparator model")
      ->check(CLI::IsMember({"bt", "planted", "det"}))
      ->capture_default_str();
  simulate->add_option("--ratio", sim.ratio, "Bradley-Terry weight ratio")->capture_default_str();
  simulate->add_option("--trials", sim.trials, "number of trials")->capture_default_str();
  simulate->add_option("--budget", sim.budget, "max comparisons per trial")->capture_default_str();
  simulate->add_option("--out", sim.out, "CSV output path");
  simulate->add_option("--log-dir", sim.log_dir, "write trial_<i>.jsonl event logs here");

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "rebuild an engine from an event log");
  replay->add_option("--log", rep.log, "JSONL event log")->check(CLI::ExistingFile);
  add_ranking_flags(replay, rep.ranking, false);
  add_campaign_flags(replay, rep.campaign, false);
  replay->add_option("--out", rep.out, "write the engine snapshot JSON here");

  RankArgs rank_args;
  auto* rank = app.add_subcommand("rank", "current ranking of a campaign instance");
  add_campaign_flags(rank, rank_args.campaign, true);
  rank->add_option("--out", rank_args.out, "ranking CSV output path");

  std::string accuracy_ranking;
  std::string accuracy_out;
  auto* accuracy = app.add_subcommand("accuracy", "TP/FP/accuracy of a labeled ranking");
  accuracy->add_option("--ranking", accuracy_ranking, "ranking CSV")
      ->required()
      ->check(CLI::ExistingFile);
  accuracy->add_option("--out", accuracy_out, "JSON output path");

  CorrelateArgs corr;
  auto* correlate = app.add_subcommand("correlate", "correlate model margins with human scores");
  correlate->add_option("--margins", corr.margins, "item_id,margin CSV")
      ->required()
      ->check(CLI::ExistingFile);
  correlate->add_option("--human", corr.human, "ranking CSV or item_id,score CSV")
      ->required()
      ->check(CLI::ExistingFile);
  correlate->add_option("--transform", corr.transform, "margin transform")
      ->check(CLI::IsMember({"identity", "signed_log"}))
      ->capture_default_str();
  correlate->add_option("--permutations", corr.permutations, "permutation test size (0: t-test)");
  correlate->add_option("--seed", corr.seed, "permutation seed")->capture_default_str();
  correlate->add_option("--out", corr.out, "JSON output path");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "run the rating service");
  serve->add_option("--manifest", srv.campaign.manifest, "item manifest CSV")
      ->required()
      ->check(CLI::ExistingFile);
  serve->add_option("--log-dir", srv.campaign.log_dir, "campaign log directory")->required();
  serve->add_option("--config", srv.config, "campaign config JSON")->check(CLI::ExistingFile);
  serve->add_option("--images", srv.images, "image root")->capture_default_str();
  serve->add_option("--host", srv.host, "bind address")->capture_default_str();
  serve->add_option("--port", srv.port, "port (0: any free port)")->capture_default_str();

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "write a campaign instance's state to a file");
  add_campaign_flags(export_cmd, exp.campaign, true);
  export_cmd->add_option("--what", exp.what, "what to export")
      ->check(CLI::IsMember({"ranking", "snapshot", "result"}))
      ->capture_default_str();
  export_cmd->add_option("--out", exp.out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*replay) return run_replay(rep);
    if (*rank) return run_rank(rank_args);
    if (*accuracy) return run_accuracy(accuracy_ranking, accuracy_out);
    if (*correlate) return run_correlate(corr);
    if (*serve) {
      std::filesystem::create_directories(srv.campaign.log_dir);
      return run_serve(srv);
    }
    if (*export_cmd) return run_export(exp);
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
