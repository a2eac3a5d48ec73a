#include "xqa/rating_service.hpp"

#include <algorithm>

#include "json_util.hpp"
#include "xqa/error.hpp"
#include "xqa/report.hpp"

namespace xqa::rating {

using detail::Json;

std::vector<RatingItem> build_items(std::span<const data::AnnotationSet> annotations,
                                    std::span<const data::PredictionSet> predictions,
                                    const rules::RuleBook* rule_book) {
  std::vector<RatingItem> items;
  for (const auto& preds : predictions) {
    for (const auto* ds : report::datasets_for(preds, annotations)) {
      for (const auto& inst : ds->instances) {
        const auto* rec = preds.find(inst.question_id);
        auto criteria = rules::criteria_for(rule_book, inst.question_key);
        if (!criteria) {
          throw DataError("no rating criteria for question key '" + inst.question_key + "'");
        }
        items.push_back(RatingItem{
            .question_id = inst.question_id,
            .model_id = preds.model_id,
            .question_key = inst.question_key,
            .question = inst.question,
            .context = inst.context,
            .model_answer = rec != nullptr ? rec->answer_text : std::string(),
            .gold_answers = inst.gold.answers(),
            .criteria = std::move(*criteria),
        });
      }
    }
  }
  return items;
}

RatingSession::RatingSession(std::string id, std::vector<RatingItem> items,
                             std::shared_ptr<data::RatingStore> store, SessionOptions options)
    : id_(std::move(id)), items_(std::move(items)), store_(std::move(store)), options_(options) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!item_index_.emplace(std::pair(items_[i].question_id, items_[i].model_id), i).second) {
      throw DataError("duplicate rating item (" + items_[i].question_id + ", " + items_[i].model_id + ")");
    }
  }
  for (const auto& r : store_->latest()) remember_rater(r.rater_id);
}

void RatingSession::remember_rater(const std::string& rater_id) {
  std::lock_guard lock(mutex_);
  if (std::find(raters_.begin(), raters_.end(), rater_id) == raters_.end()) raters_.push_back(rater_id);
}

std::vector<std::size_t> RatingSession::queue_for(const std::string& rater_id) const {
  std::vector<std::size_t> order(items_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  data::portable_shuffle(order, options_.seed ^ data::stable_hash(rater_id));
  return order;
}

RatingTask RatingSession::make_task(const std::string& rater_id, std::size_t position, std::size_t item,
                                    const std::map<data::RatingKey, data::HumanRating>& rated) const {
  const RatingItem& it = items_[item];
  RatingTask task;
  task.question_id = it.question_id;
  task.model_id = it.model_id;
  task.question_key = it.question_key;
  task.question = it.question;
  task.model_answer = it.model_answer;
  task.criteria = it.criteria;
  task.position = position;
  task.total = items_.size();
  if (!options_.blind) task.gold_answers = it.gold_answers;
  if (auto r = rated.find({it.question_id, it.model_id, rater_id}); r != rated.end()) {
    task.previous_verdict = r->second.verdict;
  }

  const std::u32string context = textnorm::code_points(it.context);
  std::optional<std::size_t> answer_at;
  std::size_t answer_len = 0;
  const auto locate = [&](const std::string& text) {
    if (answer_at || text.empty()) return;
    const std::u32string needle = textnorm::code_points(text);
    if (const auto pos = context.find(needle); pos != std::u32string::npos) {
      answer_at = pos;
      answer_len = needle.size();
    }
  };
  locate(it.model_answer);
  const bool model_answer_found = answer_at.has_value();
  for (const auto& g : it.gold_answers) locate(g);

  std::size_t begin = 0;
  std::size_t end = context.size();
  if (!options_.full_context && answer_at) {
    begin = *answer_at > options_.margin ? *answer_at - options_.margin : 0;
    end = std::min(context.size(), *answer_at + answer_len + options_.margin);
  } else if (!options_.full_context) {
    end = std::min(context.size(), 2 * options_.margin);
  }
  task.excerpt_start = begin;
  task.context_excerpt = textnorm::to_utf8(std::u32string_view(context).substr(begin, end - begin));
  if (model_answer_found) task.answer_offset = *answer_at - begin;
  return task;
}

std::optional<RatingTask> RatingSession::next_task(const std::string& rater_id) {
  if (rater_id.empty()) throw UsageError("rater id must not be empty");
  remember_rater(rater_id);
  const auto rated = store_->latest_by_key();
  const auto queue = queue_for(rater_id);
  for (std::size_t pos = 0; pos < queue.size(); ++pos) {
    const RatingItem& it = items_[queue[pos]];
    if (!rated.contains({it.question_id, it.model_id, rater_id})) return make_task(rater_id, pos, queue[pos], rated);
  }
  return std::nullopt;
}

RatingTask RatingSession::task_at(const std::string& rater_id, std::size_t position) {
  if (rater_id.empty()) throw UsageError("rater id must not be empty");
  if (position >= items_.size()) throw NotFound("position " + std::to_string(position) + " out of range");
  remember_rater(rater_id);
  const auto queue = queue_for(rater_id);
  return make_task(rater_id, position, queue[position], store_->latest_by_key());
}

Progress RatingSession::submit_verdict(const std::string& rater_id, const std::string& question_id,
                                       const std::string& model_id, int verdict) {
  if (rater_id.empty()) throw UsageError("rater id must not be empty");
  if (verdict != 0 && verdict != 1) throw UsageError("verdict must be 0 or 1");
  if (!item_index_.contains({question_id, model_id})) {
    throw NotFound("unknown task (" + question_id + ", " + model_id + ")");
  }
  remember_rater(rater_id);
  store_->append(data::HumanRating{question_id, model_id, rater_id, verdict, data::utc_timestamp()});
  return progress();
}

Progress RatingSession::progress() const {
  std::vector<std::string> raters;
  {
    std::lock_guard lock(mutex_);
    raters = raters_;
  }
  const auto rated = store_->latest_by_key();
  Progress p;
  p.items = items_.size();
  for (const auto& rater : raters) {
    RaterProgress rp{rater, 0, items_.size()};
    for (const auto& it : items_) {
      if (rated.contains({it.question_id, it.model_id, rater})) ++rp.rated;
    }
    p.total_rated += rp.rated;
    p.raters.push_back(std::move(rp));
  }
  p.total_expected = items_.size() * raters.size();
  return p;
}

std::string RatingSession::export_jsonl() const { return store_->export_jsonl(); }

RatingSession& RatingService::add_session(std::unique_ptr<RatingSession> session) {
  std::lock_guard lock(mutex_);
  const std::string id = session->id();
  auto [it, inserted] = sessions_.emplace(id, std::move(session));
  if (!inserted) throw UsageError("session '" + id + "' already exists");
  return *it->second;
}

RatingSession& RatingService::session(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return *it->second;
}

std::string task_to_json(const RatingTask& t) {
  Json j{
      {"question_id", t.question_id},
      {"model_id", t.model_id},
      {"question_key", t.question_key},
      {"question", t.question},
      {"context_excerpt", t.context_excerpt},
      {"excerpt_start", t.excerpt_start},
      {"answer_offset", t.answer_offset ? Json(*t.answer_offset) : Json(nullptr)},
      {"model_answer", t.model_answer},
      {"gold_answers", t.gold_answers},
      {"criteria", t.criteria},
      {"position", t.position},
      {"total", t.total},
      {"previous_verdict", t.previous_verdict ? Json(*t.previous_verdict) : Json(nullptr)},
  };
  return j.dump();
}

std::string progress_to_json(const Progress& p) {
  Json raters = Json::array();
  for (const auto& r : p.raters) raters.push_back(Json{{"rater_id", r.rater_id}, {"rated", r.rated}, {"total", r.total}});
  return Json{{"items", p.items},
              {"raters", raters},
              {"total_rated", p.total_rated},
              {"total_expected", p.total_expected}}
      .dump();
}

}  // namespace xqa::rating
