#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xqa/metrics.hpp"

namespace xqa::data {

struct QAInstance {
  std::string question_id;
  std::string document_id;
  // Feature the question targets (e.g. "Ingredient"); defaults to the question text.
  std::string question_key;
  std::string question;
  std::string context;
  metrics::GoldAnswerSet gold;

  friend bool operator==(const QAInstance&, const QAInstance&) = default;
};

struct AnnotationSet {
  std::string dataset_id;
  std::vector<QAInstance> instances;
  // Non-fatal findings, e.g. a gold answer that is not a substring of its context.
  std::vector<std::string> warnings;

  const QAInstance* find(const std::string& question_id) const;
  std::vector<std::string> document_ids() const;
};

struct PredictionRecord {
  std::string question_id;
  std::string answer_text;  // empty = no answer
  double confidence = 0.0;
  std::string model_id;
  // Set when the answer was withheld by answer validation.
  std::optional<std::string> rejection_reason;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct PredictionSet {
  std::string model_id;
  std::optional<std::string> dataset_id;
  std::vector<PredictionRecord> records;

  const PredictionRecord* find(const std::string& question_id) const;
};

// Throws DataError with the path and parse position on malformed JSON, and on
// structural or uniqueness violations.
AnnotationSet load_annotations(const std::filesystem::path& path);
void save_annotations(const AnnotationSet& set, const std::filesystem::path& path);

PredictionSet load_predictions(const std::filesystem::path& path);
void save_predictions(const PredictionSet& set, const std::filesystem::path& path);

struct HyperparameterRecord {
  std::string base_model;
  int epochs = 0;
  int batch_size = 0;
  double learning_rate = 0.0;
  int doc_stride = 0;

  // Throws UsageError unless every numeric field is positive.
  void validate() const;

  friend bool operator==(const HyperparameterRecord&, const HyperparameterRecord&) = default;
};

// Final fine-tuning configurations reported for the two reference datasets.
HyperparameterRecord leaflets_hyperparameters();
HyperparameterRecord reports_hyperparameters();

HyperparameterRecord load_hyperparameters(const std::filesystem::path& path);

// Document-level train/test partition. For k >= 2 each fold's test set is one
// of k near-equal parts; for k == 1 there is a single split.
struct SplitPlan {
  std::vector<std::string> documents;  // sorted, de-duplicated input
  std::uint64_t seed = 0;
  std::size_t k = 0;
  double test_fraction = 0.0;
  std::vector<std::vector<std::string>> test_folds;
  std::map<std::string, std::size_t> fold_of;  // only documents that are tested somewhere

  std::vector<std::string> train(std::size_t fold) const;
  const std::vector<std::string>& test(std::size_t fold) const { return test_folds.at(fold); }
  std::size_t fold_count() const noexcept { return test_folds.size(); }
};

// Deterministic across platforms for a given seed: uses mt19937_64 with a
// hand-rolled bounded draw and Fisher-Yates shuffle.
SplitPlan make_splits(const std::vector<std::string>& documents, std::size_t k,
                      double test_fraction, std::uint64_t seed);

// Shuffle used by make_splits and the rating queue.
void portable_shuffle(std::vector<std::string>& items, std::uint64_t seed);
void portable_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);
std::uint64_t stable_hash(std::string_view text);

std::string split_plan_to_json(const SplitPlan& plan);
std::string fold_to_json(const SplitPlan& plan, std::size_t fold);

}  // namespace xqa::data
