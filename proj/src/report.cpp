#include "xqa/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "xqa/error.hpp"
#include "xqa/format.hpp"
#include "xqa/parallel.hpp"

namespace xqa::report {

using detail::Json;

VoteRule parse_vote_rule(const std::string& name) {
  if (name == "majority") return VoteRule::kMajority;
  if (name == "any") return VoteRule::kAny;
  if (name == "all") return VoteRule::kAll;
  throw UsageError("vote rule must be majority, any or all (got '" + name + "')");
}

HumanVerdicts aggregate_verdicts(const std::vector<data::HumanRating>& latest, VoteRule rule) {
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> votes;  // (yes, total)
  for (const auto& r : latest) {
    auto& [yes, total] = votes[{r.question_id, r.model_id}];
    yes += r.verdict;
    ++total;
  }
  HumanVerdicts out;
  for (const auto& [key, count] : votes) {
    const auto [yes, total] = count;
    int verdict = 0;
    switch (rule) {
      case VoteRule::kMajority: verdict = 2 * yes > total ? 1 : 0; break;
      case VoteRule::kAny: verdict = yes > 0 ? 1 : 0; break;
      case VoteRule::kAll: verdict = yes == total ? 1 : 0; break;
    }
    out[key] = verdict;
  }
  return out;
}

std::vector<const data::AnnotationSet*> datasets_for(const data::PredictionSet& preds,
                                                          std::span<const data::AnnotationSet> annotations) {
  std::vector<const data::AnnotationSet*> matched;
  if (preds.dataset_id) {
    for (const auto& a : annotations) {
      if (a.dataset_id == *preds.dataset_id) matched.push_back(&a);
    }
    if (matched.empty()) {
      throw DataError("predictions of '" + preds.model_id + "' refer to unknown dataset '" +
                      *preds.dataset_id + "'");
    }
    return matched;
  }
  for (const auto& a : annotations) {
    const bool shares = std::any_of(preds.records.begin(), preds.records.end(),
                                    [&](const auto& r) { return a.find(r.question_id) != nullptr; });
    if (shares) matched.push_back(&a);
  }
  if (matched.empty()) {
    if (annotations.size() == 1) {
      matched.push_back(&annotations[0]);
    } else {
      throw UsageError("cannot tell which dataset the predictions of '" + preds.model_id +
                       "' belong to; set dataset_id in the predictions file");
    }
  }
  return matched;
}

ScoringResult score_predictions(const ScoringInput& input) {
  struct Job {
    const data::QAInstance* instance;
    const data::PredictionRecord* prediction;  // null = missing, scored as empty answer
    const data::PredictionSet* set;
    const data::AnnotationSet* dataset;
  };
  std::vector<Job> jobs;
  ScoringResult result;

  for (const auto& preds : input.predictions) {
    const auto datasets = datasets_for(preds, input.annotations);
    std::set<std::string> known;
    for (const auto* ds : datasets) {
      Mismatch mm{preds.model_id, ds->dataset_id, {}, {}};
      for (const auto& inst : ds->instances) {
        known.insert(inst.question_id);
        const auto* rec = preds.find(inst.question_id);
        if (rec == nullptr) mm.missing_predictions.push_back(inst.question_id);
        jobs.push_back({&inst, rec, &preds, ds});
      }
      if (!mm.missing_predictions.empty()) result.mismatches.push_back(std::move(mm));
    }
    Mismatch extra{preds.model_id, "", {}, {}};
    for (const auto& rec : preds.records) {
      if (!known.contains(rec.question_id)) extra.unknown_predictions.push_back(rec.question_id);
    }
    if (!extra.unknown_predictions.empty()) result.mismatches.push_back(std::move(extra));
  }

  result.instances.resize(jobs.size());
  parallel_for(jobs.size(), input.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::string answer = job.prediction != nullptr ? job.prediction->answer_text : std::string();
    ScoredInstance out{
        .question_id = job.instance->question_id,
        .document_id = job.instance->document_id,
        .model_id = job.set->model_id,
        .dataset_id = job.dataset->dataset_id,
        .question_key = job.instance->question_key,
        .scores = metrics::score_instance(answer, job.instance->gold, input.options),
        .human = std::nullopt,
    };
    if (input.verdicts != nullptr) {
      if (auto it = input.verdicts->find({out.question_id, out.model_id}); it != input.verdicts->end()) {
        out.human = static_cast<double>(it->second);
      }
    }
    result.instances[i] = std::move(out);
  });
  return result;
}

GroupBy parse_group_by(const std::string& name) {
  if (name == "question_key" || name == "question") return GroupBy::kQuestionKey;
  if (name == "dataset") return GroupBy::kDataset;
  if (name == "model") return GroupBy::kModel;
  throw UsageError("group-by must be question_key, dataset or model (got '" + name + "')");
}

Report build_report(std::span<const ScoredInstance> instances, GroupBy group_by) {
  struct Group {
    ReportRow row;
    std::vector<metrics::ScoreVector> scores;
    double human_sum = 0.0;
    std::size_t rated = 0;
  };
  std::vector<Group> groups;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;

  for (const auto& inst : instances) {
    const std::string dataset = group_by == GroupBy::kModel ? std::string(kAllGroups) : inst.dataset_id;
    const std::string key = group_by == GroupBy::kQuestionKey ? inst.question_key : std::string(kAllGroups);
    auto [it, inserted] = index.emplace(std::tuple(inst.model_id, dataset, key), groups.size());
    if (inserted) {
      Group g;
      g.row.model_id = inst.model_id;
      g.row.dataset_id = dataset;
      g.row.question_key = key;
      groups.push_back(std::move(g));
    }
    Group& g = groups[it->second];
    g.scores.push_back(inst.scores);
    if (inst.human) {
      g.human_sum += *inst.human;
      ++g.rated;
    }
  }

  Report report;
  report.total_instances = instances.size();
  for (auto& g : groups) {
    const auto corpus = metrics::aggregate(g.scores);
    g.row.lev = corpus.mean.lev;
    g.row.em = corpus.mean.em;
    g.row.f1 = corpus.mean.f1;
    g.row.rouge_l = corpus.mean.rouge_l;
    g.row.n = corpus.question_count;
    if (g.rated == g.scores.size()) g.row.human = g.human_sum / static_cast<double>(g.rated);
    report.rows.push_back(std::move(g.row));
  }
  return report;
}

std::string render_text(const Report& report) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "Dataset", "Question", "Levenshtein", "Exact Match", "F1", "ROUGE-L",
                   "Human Expert", "n"});
  for (const auto& r : report.rows) {
    cells.push_back({r.model_id, r.dataset_id, r.question_key, fixed(r.lev), fixed(r.em), fixed(r.f1),
                     fixed(r.rouge_l), r.human ? fixed(*r.human) : "-", std::to_string(r.n)});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], textnorm::code_points(row[c]).size());
    }
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c > 0) line += "  ";
      line += cells[r][c];
      if (c + 1 < cells[r].size()) {
        line.append(width[c] - textnorm::code_points(cells[r][c]).size(), ' ');
      }
    }
    out << line << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

std::string render_csv(const Report& report) {
  std::ostringstream out;
  out << "model_id,dataset_id,question_key,lev,em,f1,rouge_l,human,n\n";
  for (const auto& r : report.rows) {
    out << csv_escape(r.model_id) << ',' << csv_escape(r.dataset_id) << ',' << csv_escape(r.question_key) << ','
        << full_precision(r.lev) << ',' << full_precision(r.em) << ',' << full_precision(r.f1) << ','
        << full_precision(r.rouge_l) << ',' << (r.human ? full_precision(*r.human) : "") << ',' << r.n << '\n';
  }
  return out.str();
}

std::string render_json(const Report& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back(Json{
        {"model_id", r.model_id},
        {"dataset_id", r.dataset_id},
        {"question_key", r.question_key},
        {"lev", r.lev},
        {"em", r.em},
        {"f1", r.f1},
        {"rouge_l", r.rouge_l},
        {"human", r.human ? Json(*r.human) : Json(nullptr)},
        {"n", r.n},
    });
  }
  Json mismatches = Json::array();
  for (const auto& m : report.mismatches) {
    mismatches.push_back(Json{{"model_id", m.model_id},
                              {"dataset_id", m.dataset_id},
                              {"missing_predictions", m.missing_predictions},
                              {"unknown_predictions", m.unknown_predictions}});
  }
  return Json{{"rows", rows}, {"total_instances", report.total_instances}, {"mismatches", mismatches}}.dump(2) +
         "\n";
}

std::string scored_to_json(std::span<const ScoredInstance> instances) {
  Json arr = Json::array();
  for (const auto& s : instances) {
    Json j{
        {"question_id", s.question_id}, {"document_id", s.document_id}, {"model_id", s.model_id},
        {"dataset_id", s.dataset_id},   {"question_key", s.question_key}, {"em", s.scores.em},
        {"lev", s.scores.lev},          {"f1", s.scores.f1},             {"rouge_l", s.scores.rouge_l},
    };
    if (s.human) j["human"] = *s.human;
    arr.push_back(std::move(j));
  }
  return Json{{"instances", arr}}.dump(2) + "\n";
}

std::vector<ScoredInstance> load_scored(const std::filesystem::path& path) {
  const std::string where = path.string();
  const Json root = detail::parse_json_file(path);
  if (!root.is_object() || !root.contains("instances") || !root["instances"].is_array()) {
    throw DataError(where + ": expected an object with an 'instances' array");
  }
  std::vector<ScoredInstance> out;
  for (const auto& j : root["instances"]) {
    ScoredInstance s{
        .question_id = detail::require<std::string>(j, "question_id", where),
        .document_id = detail::optional_field<std::string>(j, "document_id", "", where),
        .model_id = detail::require<std::string>(j, "model_id", where),
        .dataset_id = detail::require<std::string>(j, "dataset_id", where),
        .question_key = detail::require<std::string>(j, "question_key", where),
        .scores = {detail::require<double>(j, "em", where), detail::require<double>(j, "lev", where),
                   detail::require<double>(j, "f1", where), detail::require<double>(j, "rouge_l", where)},
        .human = std::nullopt,
    };
    for (double v : s.scores.values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw DataError(where + ": score of '" + s.question_id + "' outside [0,1]");
    }
    if (j.contains("human") && !j["human"].is_null()) {
      s.human = detail::require<double>(j, "human", where);
      if (!(*s.human >= 0.0 && *s.human <= 1.0)) {
        throw DataError(where + ": human verdict of '" + s.question_id + "' outside [0,1]");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace xqa::report
