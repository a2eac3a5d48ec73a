#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xqa/datamodel.hpp"
#include "xqa/metrics.hpp"
#include "xqa/rating_store.hpp"

namespace xqa::report {

// Scores of one model answer, with the aggregated human verdict if rated.
struct ScoredInstance {
  std::string question_id;
  std::string document_id;
  std::string model_id;
  std::string dataset_id;
  std::string question_key;
  metrics::ScoreVector scores;
  std::optional<double> human;
};

// How several raters' verdicts on one answer combine into a label.
enum class VoteRule { kMajority, kAny, kAll };
VoteRule parse_vote_rule(const std::string& name);

// Keyed by (question_id, model_id). Majority is strict: ties count as incorrect.
using HumanVerdicts = std::map<std::pair<std::string, std::string>, int>;
HumanVerdicts aggregate_verdicts(const std::vector<data::HumanRating>& latest, VoteRule rule);

struct Mismatch {
  std::string model_id;
  std::string dataset_id;
  std::vector<std::string> missing_predictions;  // scored as empty answers
  std::vector<std::string> unknown_predictions;  // not in the annotations, ignored
};

struct ScoringInput {
  std::span<const data::AnnotationSet> annotations;
  std::span<const data::PredictionSet> predictions;
  const HumanVerdicts* verdicts = nullptr;
  metrics::ScoringOptions options;
  std::size_t threads = 1;
};

struct ScoringResult {
  std::vector<ScoredInstance> instances;
  std::vector<Mismatch> mismatches;
};

// Annotation sets a prediction file is scored against: the one named by its
// dataset_id, else those sharing question ids, else the only one.
std::vector<const data::AnnotationSet*> datasets_for(const data::PredictionSet& predictions,
                                                     std::span<const data::AnnotationSet> annotations);

// Scores every prediction set against its datasets_for(). Missing predictions
// score as empty answers.
ScoringResult score_predictions(const ScoringInput& input);

enum class GroupBy { kQuestionKey, kDataset, kModel };
GroupBy parse_group_by(const std::string& name);

inline constexpr std::string_view kAllGroups = "*";

struct ReportRow {
  std::string model_id;
  std::string dataset_id;
  std::string question_key;
  double lev = 0.0;
  double em = 0.0;
  double f1 = 0.0;
  double rouge_l = 0.0;
  std::optional<double> human;  // only when every instance of the row is rated
  std::size_t n = 0;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<Mismatch> mismatches;
  std::size_t total_instances = 0;
};

// Groups are (model, dataset, question_key), (model, dataset) or (model) and
// appear in first-seen order.
Report build_report(std::span<const ScoredInstance> instances, GroupBy group_by);

std::string render_text(const Report& report);
std::string render_csv(const Report& report);
std::string render_json(const Report& report);

std::string scored_to_json(std::span<const ScoredInstance> instances);
std::vector<ScoredInstance> load_scored(const std::filesystem::path& path);

}  // namespace xqa::report
