#include "xqa/datamodel.hpp"

#include <algorithm>
#include <set>

#include "json_util.hpp"
#include "xqa/error.hpp"

namespace xqa::data {

using detail::Json;
using detail::optional_field;
using detail::require;

const QAInstance* AnnotationSet::find(const std::string& question_id) const {
  for (const auto& inst : instances) {
    if (inst.question_id == question_id) return &inst;
  }
  return nullptr;
}

std::vector<std::string> AnnotationSet::document_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& inst : instances) {
    if (seen.insert(inst.document_id).second) ids.push_back(inst.document_id);
  }
  return ids;
}

const PredictionRecord* PredictionSet::find(const std::string& question_id) const {
  for (const auto& rec : records) {
    if (rec.question_id == question_id) return &rec;
  }
  return nullptr;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  const std::string where = path.string();
  const Json root = detail::parse_json_file(path);
  if (!root.is_object() || !root.contains("data") || !root["data"].is_array()) {
    throw DataError(where + ": expected an object with a 'data' array");
  }

  AnnotationSet set;
  set.dataset_id = optional_field<std::string>(root, "dataset_id", path.stem().string(), where);
  std::set<std::string> ids;

  for (const auto& doc : root["data"]) {
    std::string document_id = optional_field<std::string>(doc, "document_id", "", where);
    if (document_id.empty()) document_id = optional_field<std::string>(doc, "title", "", where);
    if (document_id.empty()) throw DataError(where + ": document without 'document_id'");
    if (!doc.contains("paragraphs") || !doc["paragraphs"].is_array()) {
      throw DataError(where + ": document '" + document_id + "' has no 'paragraphs' array");
    }
    for (const auto& para : doc["paragraphs"]) {
      const auto context = require<std::string>(para, "context", where);
      if (context.empty()) throw DataError(where + ": empty context in document '" + document_id + "'");
      if (!para.contains("qas") || !para["qas"].is_array()) {
        throw DataError(where + ": paragraph in '" + document_id + "' has no 'qas' array");
      }
      for (const auto& qa : para["qas"]) {
        const auto id = require<std::string>(qa, "id", where);
        if (!ids.insert(id).second) throw DataError(where + ": duplicate question id '" + id + "'");
        const auto question = require<std::string>(qa, "question", where);

        std::vector<std::string> answers;
        if (qa.contains("answers")) {
          if (!qa["answers"].is_array()) throw DataError(where + ": 'answers' of '" + id + "' is not an array");
          for (const auto& ans : qa["answers"]) answers.push_back(require<std::string>(ans, "text", where));
        }
        // Unanswerable questions carry the empty answer, so only an empty
        // prediction matches them exactly.
        if (answers.empty()) answers.emplace_back();

        QAInstance inst{
            .question_id = id,
            .document_id = document_id,
            .question_key = optional_field<std::string>(qa, "question_key", question, where),
            .question = question,
            .context = context,
            .gold = metrics::GoldAnswerSet(id, answers),
        };
        for (const auto& answer : inst.gold.answers()) {
          if (!answer.empty() && context.find(answer) == std::string::npos) {
            set.warnings.push_back(where + ": answer '" + answer + "' of question '" + id +
                                   "' does not occur in its context");
          }
        }
        set.instances.push_back(std::move(inst));
      }
    }
  }
  return set;
}

void save_annotations(const AnnotationSet& set, const std::filesystem::path& path) {
  Json data = Json::array();
  for (const auto& doc_id : set.document_ids()) {
    Json paragraphs = Json::array();
    for (const auto& inst : set.instances) {
      if (inst.document_id != doc_id) continue;
      Json answers = Json::array();
      for (const auto& a : inst.gold.answers()) {
        if (!a.empty()) answers.push_back(Json{{"text", a}});
      }
      paragraphs.push_back(Json{
          {"context", inst.context},
          {"qas", Json::array({Json{{"id", inst.question_id},
                                    {"question", inst.question},
                                    {"question_key", inst.question_key},
                                    {"answers", answers}}})},
      });
    }
    data.push_back(Json{{"document_id", doc_id}, {"paragraphs", paragraphs}});
  }
  const Json root{{"dataset_id", set.dataset_id}, {"data", data}};
  detail::write_file(path, root.dump(2) + "\n");
}

PredictionSet load_predictions(const std::filesystem::path& path) {
  const std::string where = path.string();
  const Json root = detail::parse_json_file(path);
  if (!root.is_object()) throw DataError(where + ": expected a JSON object");

  PredictionSet set;
  set.model_id = optional_field<std::string>(root, "model_id", path.stem().string(), where);
  if (root.contains("dataset_id")) set.dataset_id = require<std::string>(root, "dataset_id", where);

  for (const auto& [key, value] : root.items()) {
    if (key == "model_id" || key == "dataset_id") continue;
    if (!value.is_object()) throw DataError(where + ": prediction '" + key + "' is not an object");
    PredictionRecord rec{
        .question_id = key,
        .answer_text = require<std::string>(value, "text", where + " [" + key + "]"),
        .confidence = optional_field<double>(value, "confidence", 0.0, where + " [" + key + "]"),
        .model_id = set.model_id,
        .rejection_reason = std::nullopt,
    };
    if (!(rec.confidence >= 0.0 && rec.confidence <= 1.0)) {
      throw DataError(where + ": confidence of '" + key + "' outside [0,1]");
    }
    if (value.contains("reason")) rec.rejection_reason = require<std::string>(value, "reason", where);
    set.records.push_back(std::move(rec));
  }
  return set;
}

void save_predictions(const PredictionSet& set, const std::filesystem::path& path) {
  Json root{{"model_id", set.model_id}};
  if (set.dataset_id) root["dataset_id"] = *set.dataset_id;
  for (const auto& rec : set.records) {
    Json entry{{"text", rec.answer_text}, {"confidence", rec.confidence}};
    if (rec.rejection_reason) entry["reason"] = *rec.rejection_reason;
    root[rec.question_id] = entry;
  }
  detail::write_file(path, root.dump(2) + "\n");
}

void HyperparameterRecord::validate() const {
  if (base_model.empty()) throw UsageError("hyperparameters: base_model must be set");
  if (epochs <= 0 || batch_size <= 0 || doc_stride <= 0 || !(learning_rate > 0.0)) {
    throw UsageError("hyperparameters: epochs, batch_size, learning_rate and doc_stride must be positive");
  }
}

HyperparameterRecord leaflets_hyperparameters() {
  return {"deepset-gelectra-large-germanquad", 2, 12, 0.00001, 128};
}

HyperparameterRecord reports_hyperparameters() {
  return {"deepset-gelectra-large-germanquad", 5, 12, 0.00001, 128};
}

HyperparameterRecord load_hyperparameters(const std::filesystem::path& path) {
  const std::string where = path.string();
  const Json root = detail::parse_json_file(path);
  HyperparameterRecord rec{
      .base_model = require<std::string>(root, "base_model", where),
      .epochs = require<int>(root, "epochs", where),
      .batch_size = require<int>(root, "batch_size", where),
      .learning_rate = require<double>(root, "learning_rate", where),
      .doc_stride = require<int>(root, "doc_stride", where),
  };
  rec.validate();
  return rec;
}

}  // namespace xqa::data
