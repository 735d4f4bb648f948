#include "rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace hlucb::stats {

using nlohmann::ordered_json;

namespace {

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(value)) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    fail(ErrorCode::Parse, where + "not a finite number: '" + text + "'");
  }
}

std::size_t parse_position(const std::string& text, const std::string& where) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), ::isdigit))
    fail(ErrorCode::Parse, where + "position must be a positive integer");
  return static_cast<std::size_t>(std::stoull(text));
}

void check_samples(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::Domain, "correlation inputs differ in length");
  if (x.size() < 3) fail(ErrorCode::Domain, "correlation needs at least 3 samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      fail(ErrorCode::Domain, "correlation inputs must be finite");
  }
}

double pearson_unchecked(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) fail(ErrorCode::Domain, "correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------

LabeledRanking read_ranking_csv(std::istream& in, const std::string& source) {
  const csv::Table table = csv::parse(in, source);
  csv::require_header(table, {"position", "item_id", "label"}, source);
  const std::size_t n = table.rows.size();

  std::vector<const csv::Row*> by_position(n, nullptr);
  std::set<std::string> ids;
  for (const auto& row : table.rows) {
    const auto where = source + ":" + std::to_string(row.line) + ": ";
    const std::size_t pos = parse_position(row.fields[0], where);
    if (pos < 1 || pos > n) fail(ErrorCode::Parse, where + "position outside 1.." + std::to_string(n));
    if (by_position[pos - 1]) fail(ErrorCode::Parse, where + "repeated position " + row.fields[0]);
    if (!ids.insert(row.fields[1]).second)
      fail(ErrorCode::Parse, where + "repeated item id '" + row.fields[1] + "'");
    try {
      label_from_string(row.fields[2]);
    } catch (const Error& e) {
      fail(ErrorCode::Parse, where + e.what());
    }
    by_position[pos - 1] = &row;
  }

  LabeledRanking ranking;
  for (const auto* row : by_position) {
    ranking.item_ids.push_back(row->fields[1]);
    ranking.labels.push_back(label_from_string(row->fields[2]));
  }
  return ranking;
}

LabeledRanking read_ranking_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open ranking '" + path + "'");
  return read_ranking_csv(in, path);
}

std::string ranking_csv(const LabeledRanking& ranking) {
  std::ostringstream out;
  out << "position,item_id,label\n";
  for (std::size_t i = 0; i < ranking.size(); ++i)
    out << i + 1 << ',' << ranking.item_ids[i] << ',' << to_string(ranking.labels[i]) << '\n';
  return out.str();
}

AccuracyReport accuracy_from_ranking(const LabeledRanking& ranking) {
  const std::size_t n = ranking.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "accuracy of an empty ranking");
  if (ranking.labels.size() != n) fail(ErrorCode::InvalidArgument, "labels do not cover the ranking");

  AccuracyReport report;
  report.top_half = (n + 1) / 2;
  std::size_t fakes_top = 0, reals_top = 0, correct = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const bool fake = ranking.labels[pos] == Label::Fake;
    const bool in_top = pos < report.top_half;
    (fake ? report.fakes : report.reals) += 1;
    if (in_top) (fake ? fakes_top : reals_top) += 1;
    if (fake == in_top) ++correct;
  }
  auto rate = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  report.true_positive_rate = rate(fakes_top, report.fakes);
  report.false_positive_rate = rate(reals_top, report.reals);
  report.accuracy = rate(correct, n);
  return report;
}

// ---------------------------------------------------------------------------

MarginScores read_margins_csv(std::istream& in, const std::string& source) {
  const csv::Table table = csv::parse(in, source);
  csv::require_header(table, {"item_id", "margin"}, source);
  MarginScores margins;
  for (const auto& row : table.rows) {
    const auto where = source + ":" + std::to_string(row.line) + ": ";
    const double m = parse_double(row.fields[1], where);
    if (!margins.emplace(row.fields[0], m).second)
      fail(ErrorCode::Parse, where + "repeated item id '" + row.fields[0] + "'");
  }
  return margins;
}

MarginScores read_margins_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open margins '" + path + "'");
  return read_margins_csv(in, path);
}

const char* to_string(MarginTransform mode) noexcept {
  return mode == MarginTransform::SignedLog ? "signed_log" : "identity";
}

MarginTransform transform_from_string(const std::string& name) {
  if (name == "identity") return MarginTransform::Identity;
  if (name == "signed_log") return MarginTransform::SignedLog;
  fail(ErrorCode::InvalidArgument, "unknown margin transform '" + name + "'");
}

double transform_margin(double margin, MarginTransform mode) {
  if (mode == MarginTransform::Identity) return margin;
  return std::copysign(std::log1p(std::fabs(margin)), margin);
}

std::vector<double> margin_transform(std::span<const double> margins, MarginTransform mode) {
  std::vector<double> out(margins.size());
  std::transform(margins.begin(), margins.end(), out.begin(),
                 [mode](double m) { return transform_margin(m, mode); });
  return out;
}

// ---------------------------------------------------------------------------

double pearson(std::span<const double> x, std::span<const double> y) {
  check_samples(x, y);
  return pearson_unchecked(x, y);
}

std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[idx[j]] == values[idx[i]]) ++j;
    // positions i..j-1 share ranks i+1..j
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[idx[t]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_samples(x, y);
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pearson_unchecked(rx, ry);
}

double p_value(double r, std::size_t n) {
  if (n < 4) fail(ErrorCode::Domain, "p_value needs n >= 4");
  if (!(std::fabs(r) <= 1.0)) fail(ErrorCode::Domain, "correlation must lie in [-1, 1]");
  if (std::fabs(r) == 1.0) return 0.0;
  const double dof = static_cast<double>(n - 2);
  const double t = std::fabs(r) * std::sqrt(dof / (1.0 - r * r));
  const boost::math::students_t dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

double permutation_p_value(std::span<const double> x, std::span<const double> y,
                           bool use_spearman, std::size_t permutations, std::uint64_t seed) {
  check_samples(x, y);
  if (permutations == 0) fail(ErrorCode::InvalidArgument, "permutation count must be positive");
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> b(y.begin(), y.end());
  if (use_spearman) {
    a = fractional_ranks(a);
    b = fractional_ranks(b);
  }
  const double observed = std::fabs(pearson_unchecked(a, b));
  SplitMix64 gen(seed);
  std::size_t at_least = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    for (std::size_t i = b.size() - 1; i > 0; --i)
      std::swap(b[i], b[static_cast<std::size_t>(uniform_below(gen, i + 1))]);
    if (std::fabs(pearson_unchecked(a, b)) >= observed - 1e-12) ++at_least;
  }
  return static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
}

// ---------------------------------------------------------------------------

ordered_json CorrelationReport::to_json() const {
  ordered_json doc;
  doc["pearson_r"] = pearson_r;
  doc["spearman_rho"] = spearman_rho;
  doc["p_value"] = p_value;
  doc["spearman_p_value"] = spearman_p_value;
  doc["p_value_method"] = p_value_method;
  doc["n"] = n;
  doc["transform"] = to_string(transform);
  if (transform == MarginTransform::SignedLog)
    doc["transform_note"] = "sign(m) * log(1 + |m|); defined for nonpositive margins";
  return doc;
}

CorrelationReport correlate_model_vs_human(const MarginScores& margins,
                                           const std::map<std::string, double>& human_scores,
                                           const CorrelateOptions& options) {
  std::vector<std::string> missing_human, missing_margin;
  for (const auto& [id, m] : margins) {
    if (!human_scores.count(id)) missing_human.push_back(id);
  }
  for (const auto& [id, s] : human_scores) {
    if (!margins.count(id)) missing_margin.push_back(id);
  }
  if (!missing_human.empty() || !missing_margin.empty()) {
    std::ostringstream msg;
    msg << "item sets differ";
    auto list = [&](const char* what, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg << "; " << what << ":";
      for (const auto& id : ids) msg << ' ' << id;
    };
    list("no human score for", missing_human);
    list("no margin for", missing_margin);
    fail(ErrorCode::Mismatch, msg.str());
  }

  std::vector<double> x, y;
  for (const auto& [id, m] : margins) {
    x.push_back(transform_margin(m, options.transform));
    y.push_back(human_scores.at(id));
  }

  CorrelationReport report;
  report.n = x.size();
  report.transform = options.transform;
  report.pearson_r = pearson(x, y);
  report.spearman_rho = spearman(x, y);
  if (options.permutations > 0) {
    report.p_value_method = "permutation";
    report.p_value = permutation_p_value(x, y, false, options.permutations, options.seed);
    report.spearman_p_value = permutation_p_value(x, y, true, options.permutations, options.seed);
  } else {
    report.p_value = p_value(report.pearson_r, report.n);
    report.spearman_p_value = p_value(report.spearman_rho, report.n);
  }
  return report;
}

std::map<std::string, double> scores_from_ranking(const LabeledRanking& ranking) {
  std::map<std::string, double> scores;
  const std::size_t n = ranking.size();
  for (std::size_t pos = 0; pos < n; ++pos)
    scores[ranking.item_ids[pos]] = static_cast<double>(n - pos);
  return scores;
}

std::map<std::string, double> read_human_scores_file(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  if (table.header == std::vector<std::string>{"position", "item_id", "label"}) {
    std::ifstream in(path);
    return scores_from_ranking(read_ranking_csv(in, path));
  }
  csv::require_header(table, {"item_id", "score"}, path);
  std::map<std::string, double> scores;
  for (const auto& row : table.rows) {
    const auto where = path + ":" + std::to_string(row.line) + ": ";
    if (!scores.emplace(row.fields[0], parse_double(row.fields[1], where)).second)
      fail(ErrorCode::Parse, where + "repeated item id '" + row.fields[0] + "'");
  }
  return scores;
}

}  // namespace hlucb::stats
