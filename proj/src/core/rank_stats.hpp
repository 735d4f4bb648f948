#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "store.hpp"

namespace hlucb::stats {

/// Items ordered most-fake first, each with its ground-truth label.
struct LabeledRanking {
  std::vector<std::string> item_ids;
  std::vector<Label> labels;  // parallel to item_ids

  std::size_t size() const noexcept { return item_ids.size(); }
};

// CSV `position,item_id,label`, positions 1..n in any row order.
LabeledRanking read_ranking_csv(std::istream& in, const std::string& source);
LabeledRanking read_ranking_csv_file(const std::string& path);
std::string ranking_csv(const LabeledRanking& ranking);

struct AccuracyReport {
  double true_positive_rate = 0.0;   // fakes in the top half / fakes
  double false_positive_rate = 0.0;  // reals in the top half / reals
  double accuracy = 0.0;             // correctly placed / n
  std::size_t top_half = 0;
  std::size_t fakes = 0;
  std::size_t reals = 0;
};

/// The first ceil(n/2) positions are read as "fake" predictions. A rate whose
/// denominator is zero is reported as 0. Throws on an empty ranking.
AccuracyReport accuracy_from_ranking(const LabeledRanking& ranking);

/// Classifier margins keyed by item id: fake logit minus real logit.
using MarginScores = std::map<std::string, double>;

// CSV `item_id,margin`.
MarginScores read_margins_csv(std::istream& in, const std::string& source);
MarginScores read_margins_csv_file(const std::string& path);

enum class MarginTransform { Identity, SignedLog };

const char* to_string(MarginTransform mode) noexcept;
MarginTransform transform_from_string(const std::string& name);

/// identity, or sign(m) * log(1 + |m|).
double transform_margin(double margin, MarginTransform mode);
std::vector<double> margin_transform(std::span<const double> margins, MarginTransform mode);

/// Product-moment correlation. Throws Error{Domain} on size mismatch, fewer
/// than 3 samples, non-finite input or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Ranks 1..n with ties sharing their average rank.
std::vector<double> fractional_ranks(std::span<const double> values);

/// Pearson correlation of the fractional rank vectors.
double spearman(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of t = r * sqrt((n - 2) / (1 - r^2)) under a Student t
/// with n - 2 degrees of freedom. |r| = 1 gives 0. Requires n >= 4.
double p_value(double r, std::size_t n);

/// Two-sided permutation p-value for |correlation| (pearson or spearman),
/// with the +1 correction. Deterministic given `seed`.
double permutation_p_value(std::span<const double> x, std::span<const double> y,
                           bool use_spearman, std::size_t permutations, std::uint64_t seed);

struct CorrelationReport {
  double pearson_r = 0.0;
  double spearman_rho = 0.0;
  double p_value = 1.0;  // for pearson_r
  double spearman_p_value = 1.0;
  std::size_t n = 0;
  MarginTransform transform = MarginTransform::Identity;
  std::string p_value_method = "student_t";

  nlohmann::ordered_json to_json() const;
};

struct CorrelateOptions {
  MarginTransform transform = MarginTransform::Identity;
  std::size_t permutations = 0;  // > 0 switches the p-values to a permutation test
  std::uint64_t seed = 1;
};

/// Aligns margins and human scores by item id, transforms the margins and
/// correlates. Throws Error{Mismatch} listing ids present on one side only.
CorrelationReport correlate_model_vs_human(const MarginScores& margins,
                                           const std::map<std::string, double>& human_scores,
                                           const CorrelateOptions& options = {});

/// Human score per item derived from a most-fake-first ranking: n - position
/// (0-based), so larger means judged more fake.
std::map<std::string, double> scores_from_ranking(const LabeledRanking& ranking);

/// Human scores from either a ranking CSV (`position,item_id,label`, scored
/// via scores_from_ranking) or a score CSV (`item_id,score`, e.g. tau_hat).
std::map<std::string, double> read_human_scores_file(const std::string& path);

}  // namespace hlucb::stats
