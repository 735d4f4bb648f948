#include "comparator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace hlucb::sim {

using nlohmann::ordered_json;

namespace {

constexpr const char* kGeneratorName = "mt19937_64";
constexpr const char* kSimInstance = "sim";

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_double(double x) { return nlohmann::json(x).dump(); }

}  // namespace

ComparatorModel::ComparatorModel(ModelKind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const BradleyTerry& bt) {
                   if (bt.weights.size() < 2)
                     fail(ErrorCode::InvalidArgument, "Bradley-Terry model needs >= 2 items");
                   for (double w : bt.weights) {
                     if (!(w > 0.0) || !std::isfinite(w))
                       fail(ErrorCode::InvalidArgument, "Bradley-Terry weights must be positive");
                   }
                 },
                 [](const PlantedBorda& pb) {
                   if (pb.tau_star.size() < 2)
                     fail(ErrorCode::InvalidArgument, "planted model needs >= 2 items");
                   for (double t : pb.tau_star) {
                     if (!(t >= 0.0 && t <= 1.0))
                       fail(ErrorCode::InvalidArgument, "planted scores must lie in [0, 1]");
                   }
                 },
                 [this](const Deterministic& det) {
                   const std::size_t n = det.order.size();
                   if (n < 2) fail(ErrorCode::InvalidArgument, "deterministic model needs >= 2 items");
                   rank_of_.assign(n, n);
                   for (std::size_t pos = 0; pos < n; ++pos) {
                     const std::size_t item = det.order[pos];
                     if (item >= n || rank_of_[item] != n)
                       fail(ErrorCode::InvalidArgument, "deterministic order is not a permutation");
                     rank_of_[item] = pos;
                   }
                 },
             },
             kind_);
}

std::size_t ComparatorModel::size() const noexcept {
  return std::visit(overloaded{
                        [](const BradleyTerry& bt) { return bt.weights.size(); },
                        [](const PlantedBorda& pb) { return pb.tau_star.size(); },
                        [](const Deterministic& det) { return det.order.size(); },
                    },
                    kind_);
}

std::string ComparatorModel::name() const {
  return std::visit(overloaded{
                        [](const BradleyTerry&) { return std::string("bradley_terry"); },
                        [](const PlantedBorda&) { return std::string("planted_borda"); },
                        [](const Deterministic&) { return std::string("deterministic"); },
                    },
                    kind_);
}

double ComparatorModel::duel_probability(std::size_t i, std::size_t j) const {
  const std::size_t n = size();
  if (i >= n || j >= n) fail(ErrorCode::InvalidArgument, "item index out of range");
  if (i == j) fail(ErrorCode::InvalidArgument, "an item cannot duel itself");
  return std::visit(overloaded{
                        [&](const BradleyTerry& bt) {
                          return bt.weights[i] / (bt.weights[i] + bt.weights[j]);
                        },
                        [&](const PlantedBorda& pb) { return pb.tau_star[i]; },
                        [&](const Deterministic&) { return rank_of_[i] < rank_of_[j] ? 1.0 : 0.0; },
                    },
                    kind_);
}

std::vector<double> ComparatorModel::true_borda() const {
  const std::size_t n = size();
  std::vector<double> borda(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum += duel_probability(i, j);
    }
    borda[i] = sum / static_cast<double>(n - 1);
  }
  return borda;
}

std::vector<double> geometric_weights(std::size_t n, double ratio, std::uint64_t permute_seed) {
  if (!(ratio > 0.0)) fail(ErrorCode::InvalidArgument, "weight ratio must be positive");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(ratio, static_cast<double>(n - 1 - i));
  if (permute_seed != 0 && n > 1) {
    SplitMix64 gen(permute_seed);
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(gen, i + 1));
      std::swap(w[i], w[j]);
    }
  }
  return w;
}

std::size_t hamming_set_error(const std::vector<std::size_t>& returned,
                              const std::vector<std::size_t>& truth) {
  const std::set<std::size_t> truth_set(truth.begin(), truth.end());
  return static_cast<std::size_t>(std::count_if(
      returned.begin(), returned.end(), [&](std::size_t item) { return !truth_set.count(item); }));
}

ordered_json SimReport::to_json() const {
  ordered_json doc;
  doc["seed"] = seed;
  doc["n"] = config.n;
  doc["k"] = config.k;
  doc["h"] = config.h;
  doc["sigma"] = config.sigma;
  doc["radius_constant"] = config.radius_constant;
  doc["model"] = model;
  doc["generator"] = generator;
  doc["comparisons_used"] = comparisons_used;
  doc["terminated"] = terminated;
  doc["set_error_top"] = set_error_top;
  doc["set_error_bottom"] = set_error_bottom;
  doc["set_top"] = ranking.top;
  doc["middle"] = ranking.middle;
  doc["set_bottom"] = ranking.bottom;
  if (!log.empty()) {
    ordered_json events = ordered_json::array();
    for (const auto& e : log) events.push_back(hlucb::to_json(e));
    doc["log"] = std::move(events);
  }
  return doc;
}

std::string SimReport::csv_header() {
  return "seed,n,k,h,sigma,radius_constant,comparisons_used,terminated,set_error_top,"
         "set_error_bottom";
}

std::string SimReport::csv_row() const {
  std::ostringstream row;
  row << seed << ',' << config.n << ',' << config.k << ',' << config.h << ','
      << format_double(config.sigma) << ',' << format_double(config.radius_constant) << ','
      << comparisons_used << ',' << (terminated ? "true" : "false") << ',' << set_error_top
      << ',' << set_error_bottom;
  return row.str();
}

SimReport run_simulation(const RankingConfig& config, const ComparatorModel& model,
                         std::uint64_t seed, const SimOptions& options) {
  validate(config);
  if (model.size() != config.n)
    fail(ErrorCode::InvalidArgument, "comparator model size differs from n");
  if (options.budget < config.n)
    fail(ErrorCode::InvalidArgument, "budget must cover the n initialization duels");

  SimReport report;
  report.seed = seed;
  report.config = config;
  report.generator = kGeneratorName;
  report.model = model.name();

  Engine engine(config, seed);
  std::mt19937_64 outcomes(seed);

  while (!engine.is_terminated() && report.comparisons_used < options.budget) {
    const std::vector<Duel> round = engine.issue_round();
    if (options.keep_log) {
      for (const auto& duel : round) report.log.emplace_back(IssueEvent{kSimInstance, duel});
    }
    for (const auto& duel : round) {
      if (engine.is_terminated() || report.comparisons_used >= options.budget) break;
      const double p = model.duel_probability(duel.focal, duel.opponent);
      const bool focal_won = uniform_unit(outcomes) < p;
      engine.record_outcome(duel.id, focal_won);
      ++report.comparisons_used;
      if (options.keep_log) {
        ComparisonRecord rec;
        rec.seq = report.comparisons_used;
        rec.instance = kSimInstance;
        rec.duel_id = duel.id;
        rec.focal = duel.focal;
        rec.opponent = duel.opponent;
        rec.focal_won = focal_won;
        rec.timestamp = static_cast<std::int64_t>(report.comparisons_used);
        report.log.emplace_back(std::move(rec));
      }
    }
  }

  report.terminated = engine.is_terminated();
  report.ranking = engine.result(/*allow_provisional=*/true);
  report.final_state = engine.canonical();

  const auto truth_order = descending_order(model.true_borda());
  const std::vector<std::size_t> truth_top(truth_order.begin(),
                                           truth_order.begin() + static_cast<std::ptrdiff_t>(config.k));
  const std::vector<std::size_t> truth_bottom(truth_order.begin() + static_cast<std::ptrdiff_t>(config.k),
                                              truth_order.end());
  report.set_error_top = hamming_set_error(report.ranking.top, truth_top);
  report.set_error_bottom = hamming_set_error(report.ranking.bottom, truth_bottom);
  return report;
}

}  // namespace hlucb::sim
