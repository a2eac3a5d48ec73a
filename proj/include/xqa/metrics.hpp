#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xqa/textnorm.hpp"

namespace xqa::metrics {

// Controls how prediction and gold text are prepared before scoring.
// normalize = false scores the raw strings (tokens split on whitespace).
struct ScoringOptions {
  bool normalize = true;
};

// De-duplicated gold answers for one question. Answers are kept verbatim;
// two answers that normalize to the same text count once.
class GoldAnswerSet {
 public:
  // Throws DataError when `answers` is empty.
  GoldAnswerSet(std::string question_id, const std::vector<std::string>& answers);

  const std::string& question_id() const noexcept { return question_id_; }
  const std::vector<std::string>& answers() const noexcept { return answers_; }
  std::size_t size() const noexcept { return answers_.size(); }

  friend bool operator==(const GoldAnswerSet&, const GoldAnswerSet&) = default;

 private:
  std::string question_id_;
  std::vector<std::string> answers_;
};

enum class Metric : std::size_t { kExactMatch = 0, kLevenshtein = 1, kF1 = 2, kRougeL = 3 };
inline constexpr std::size_t kMetricCount = 4;
std::string_view metric_name(Metric m);

struct ScoreVector {
  double em = 0.0;
  double lev = 0.0;
  double f1 = 0.0;
  double rouge_l = 0.0;

  double operator[](Metric m) const noexcept;
  std::array<double, kMetricCount> values() const noexcept { return {em, lev, f1, rouge_l}; }

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

// Weights of the combined metric, as produced by calibration. The intercept
// takes part in the regression output but not in weighted_average().
struct WeightVector {
  double w_em = 0.0;
  double w_lev = 0.0;
  double w_f1 = 0.0;
  double w_rge = 0.0;
  double intercept = 0.0;

  std::array<double, kMetricCount> metric_weights() const noexcept {
    return {w_em, w_lev, w_f1, w_rge};
  }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

struct CorpusScores {
  ScoreVector mean;
  std::size_t question_count = 0;
};

int exact_match(std::string_view pred, const GoldAnswerSet& gold, const ScoringOptions& opts = {});

// Edit distance over Unicode code points.
std::size_t levenshtein_distance(std::string_view a, std::string_view b);
std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b);

// Best 1 - dist / max(len) over the gold answers; 1 when both sides are empty.
double levenshtein_similarity(std::string_view pred, const GoldAnswerSet& gold,
                              const ScoringOptions& opts = {});

// Precision/recall harmonic mean over distinct words, averaged over all gold
// answers (not maximised).
double token_f1(std::string_view pred, const GoldAnswerSet& gold, const ScoringOptions& opts = {});
double token_f1(const textnorm::TokenSeq& pred, const textnorm::TokenSeq& gold);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// LCS F-measure (beta = 1), best over gold answers.
double rouge_l(std::string_view pred, const GoldAnswerSet& gold, const ScoringOptions& opts = {});
double rouge_l(const textnorm::TokenSeq& pred, const textnorm::TokenSeq& gold);

ScoreVector score_instance(std::string_view pred, const GoldAnswerSet& gold,
                           const ScoringOptions& opts = {});

// sum(w_l * L_l) / sum(w_l). Throws UsageError("degenerate weights") when the
// metric weights sum to zero.
double weighted_average(const ScoreVector& scores, const WeightVector& weights);

// Per-metric arithmetic mean. Throws UsageError on an empty list.
CorpusScores aggregate(std::span<const ScoreVector> per_question);

}  // namespace xqa::metrics
