#include "xqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "xqa/error.hpp"

namespace xqa::metrics {
namespace {

using textnorm::TokenSeq;

std::string prepare(std::string_view text, const ScoringOptions& opts) {
  if (opts.normalize) return textnorm::normalize(text).str();
  return std::string(text);
}

TokenSeq prepare_tokens(std::string_view text, const ScoringOptions& opts) {
  if (opts.normalize) return textnorm::tokenize(textnorm::normalize(text));
  return textnorm::split_whitespace(text);
}

double similarity(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const auto dist = static_cast<double>(levenshtein_distance(a, b));
  return 1.0 - dist / static_cast<double>(longest);
}

}  // namespace

GoldAnswerSet::GoldAnswerSet(std::string question_id, const std::vector<std::string>& answers)
    : question_id_(std::move(question_id)) {
  std::unordered_set<std::string> seen;
  for (const auto& answer : answers) {
    if (seen.insert(textnorm::normalize(answer).str()).second) answers_.push_back(answer);
  }
  if (answers_.empty()) {
    throw DataError("question '" + question_id_ + "' has no gold answers");
  }
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kExactMatch: return "em";
    case Metric::kLevenshtein: return "lev";
    case Metric::kF1: return "f1";
    case Metric::kRougeL: return "rouge_l";
  }
  return "?";
}

double ScoreVector::operator[](Metric m) const noexcept {
  switch (m) {
    case Metric::kExactMatch: return em;
    case Metric::kLevenshtein: return lev;
    case Metric::kF1: return f1;
    case Metric::kRougeL: return rouge_l;
  }
  return 0.0;
}

int exact_match(std::string_view pred, const GoldAnswerSet& gold, const ScoringOptions& opts) {
  const std::string p = prepare(pred, opts);
  for (const auto& answer : gold.answers()) {
    if (prepare(answer, opts) == p) return 1;
  }
  return 0;
}

std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  return levenshtein_distance(textnorm::code_points(a), textnorm::code_points(b));
}

double levenshtein_similarity(std::string_view pred, const GoldAnswerSet& gold,
                              const ScoringOptions& opts) {
  const std::u32string p = textnorm::code_points(prepare(pred, opts));
  double best = 0.0;
  for (const auto& answer : gold.answers()) {
    best = std::max(best, similarity(p, textnorm::code_points(prepare(answer, opts))));
  }
  return best;
}

double token_f1(const TokenSeq& pred, const TokenSeq& gold) {
  const auto pred_set = textnorm::word_set(pred);
  const auto gold_set = textnorm::word_set(gold);
  if (pred_set.empty() && gold_set.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& w : pred_set) shared += gold_set.count(w);
  if (shared == 0) return 0.0;
  // 2 / (|P|/s + |G|/s) == 2s / (|P| + |G|)
  return 2.0 * static_cast<double>(shared) /
         static_cast<double>(pred_set.size() + gold_set.size());
}

double token_f1(std::string_view pred, const GoldAnswerSet& gold, const ScoringOptions& opts) {
  const TokenSeq p = prepare_tokens(pred, opts);
  double sum = 0.0;
  for (const auto& answer : gold.answers()) sum += token_f1(p, prepare_tokens(answer, opts));
  return sum / static_cast<double>(gold.size());
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

double rouge_l(const TokenSeq& pred, const TokenSeq& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  const std::size_t lcs = lcs_length(pred, gold);
  if (lcs == 0) return 0.0;
  // P = lcs/|pred|, R = lcs/|gold|, 2PR/(P+R) == 2 lcs / (|pred| + |gold|)
  return 2.0 * static_cast<double>(lcs) / static_cast<double>(pred.size() + gold.size());
}

double rouge_l(std::string_view pred, const GoldAnswerSet& gold, const ScoringOptions& opts) {
  const TokenSeq p = prepare_tokens(pred, opts);
  double best = 0.0;
  for (const auto& answer : gold.answers()) best = std::max(best, rouge_l(p, prepare_tokens(answer, opts)));
  return best;
}

ScoreVector score_instance(std::string_view pred, const GoldAnswerSet& gold,
                           const ScoringOptions& opts) {
  return ScoreVector{
      .em = static_cast<double>(exact_match(pred, gold, opts)),
      .lev = levenshtein_similarity(pred, gold, opts),
      .f1 = token_f1(pred, gold, opts),
      .rouge_l = rouge_l(pred, gold, opts),
  };
}

double weighted_average(const ScoreVector& scores, const WeightVector& weights) {
  const auto w = weights.metric_weights();
  const auto v = scores.values();
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    numerator += w[i] * v[i];
    denominator += w[i];
  }
  if (denominator == 0.0 || !std::isfinite(denominator)) {
    throw UsageError("degenerate weights");
  }
  return numerator / denominator;
}

CorpusScores aggregate(std::span<const ScoreVector> per_question) {
  if (per_question.empty()) throw UsageError("cannot aggregate an empty question set");
  // Running mean: exact for constant input, unlike sum / n.
  ScoreVector mean;
  std::size_t n = 0;
  for (const auto& s : per_question) {
    const auto k = static_cast<double>(++n);
    mean.em += (s.em - mean.em) / k;
    mean.lev += (s.lev - mean.lev) / k;
    mean.f1 += (s.f1 - mean.f1) / k;
    mean.rouge_l += (s.rouge_l - mean.rouge_l) / k;
  }
  return CorpusScores{.mean = mean, .question_count = n};
}

}  // namespace xqa::metrics
