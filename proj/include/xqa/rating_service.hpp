#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xqa/datamodel.hpp"
#include "xqa/rating_store.hpp"
#include "xqa/rules.hpp"

namespace xqa::rating {

// Unknown session or task; maps to HTTP 404.
class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RatingItem {
  std::string question_id;
  std::string model_id;
  std::string question_key;
  std::string question;
  std::string context;
  std::string model_answer;
  std::vector<std::string> gold_answers;
  std::string criteria;
};

struct RatingTask {
  std::string question_id;
  std::string model_id;
  std::string question_key;
  std::string question;
  std::string context_excerpt;
  std::size_t excerpt_start = 0;               // code point offset of the excerpt in the context
  std::optional<std::size_t> answer_offset;    // code point offset of the model answer in the excerpt
  std::string model_answer;
  std::vector<std::string> gold_answers;       // empty in blind mode
  std::string criteria;
  std::size_t position = 0;                    // index in this rater's queue
  std::size_t total = 0;
  std::optional<int> previous_verdict;
};

struct SessionOptions {
  std::uint64_t seed = 0;
  std::size_t margin = 500;  // code points shown on each side of the answer
  bool full_context = false;
  bool blind = false;
};

struct RaterProgress {
  std::string rater_id;
  std::size_t rated = 0;
  std::size_t total = 0;
};

struct Progress {
  std::size_t items = 0;
  std::vector<RaterProgress> raters;
  std::size_t total_rated = 0;
  std::size_t total_expected = 0;  // items x known raters
};

// Items come verbatim from the annotation and prediction files: one per
// (question, model). Every item needs rating criteria, from the rule book or
// the built-in table; a missing one is a DataError.
std::vector<RatingItem> build_items(std::span<const data::AnnotationSet> annotations,
                                    std::span<const data::PredictionSet> predictions,
                                    const rules::RuleBook* rule_book);

class RatingSession {
 public:
  RatingSession(std::string id, std::vector<RatingItem> items, std::shared_ptr<data::RatingStore> store,
                SessionOptions options = {});

  const std::string& id() const noexcept { return id_; }
  std::size_t item_count() const noexcept { return items_.size(); }

  // First item in the rater's queue that the rater has not rated yet.
  std::optional<RatingTask> next_task(const std::string& rater_id);
  // Any queue position, rated or not (revision mode). Throws NotFound when out of range.
  RatingTask task_at(const std::string& rater_id, std::size_t position);

  // Throws UsageError for a verdict outside {0,1} or an empty rater id,
  // NotFound when (question_id, model_id) is not an item of this session.
  Progress submit_verdict(const std::string& rater_id, const std::string& question_id,
                          const std::string& model_id, int verdict);

  Progress progress() const;
  std::string export_jsonl() const;

  // Deterministic per-rater item order.
  std::vector<std::size_t> queue_for(const std::string& rater_id) const;

 private:
  RatingTask make_task(const std::string& rater_id, std::size_t position, std::size_t item,
                       const std::map<data::RatingKey, data::HumanRating>& rated) const;
  void remember_rater(const std::string& rater_id);

  std::string id_;
  std::vector<RatingItem> items_;
  std::map<std::pair<std::string, std::string>, std::size_t> item_index_;
  std::shared_ptr<data::RatingStore> store_;
  SessionOptions options_;
  mutable std::mutex mutex_;
  std::vector<std::string> raters_;
};

class RatingService {
 public:
  RatingSession& add_session(std::unique_ptr<RatingSession> session);
  RatingSession& session(const std::string& id);

 private:
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<RatingSession>> sessions_;
};

std::string task_to_json(const RatingTask& task);
std::string progress_to_json(const Progress& progress);

// HTTP front end:
//   GET  /api/session/{id}/next?rater=R          -> {"done":false,"task":{...}} | {"done":true}
//   GET  /api/session/{id}/task?rater=R&position=P
//   POST /api/session/{id}/verdict  {"rater_id","question_id","model_id","verdict"}
//   GET  /api/session/{id}/progress
//   GET  /api/session/{id}/export               -> ratings JSONL
//   GET  /                                       -> rating UI assets
class RatingServer {
 public:
  explicit RatingServer(RatingService& service, std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~RatingServer();
  RatingServer(const RatingServer&) = delete;
  RatingServer& operator=(const RatingServer&) = delete;

  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Serves on the calling thread until stop().
  bool listen();
  // Serves on a background thread.
  void start();
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = -1;
};

}  // namespace xqa::rating
