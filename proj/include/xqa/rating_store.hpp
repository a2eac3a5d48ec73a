#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

namespace xqa::data {

struct HumanRating {
  std::string question_id;
  std::string model_id;
  std::string rater_id;
  int verdict = 0;  // 1 = correct, 0 = incorrect
  std::string timestamp;

  friend bool operator==(const HumanRating&, const HumanRating&) = default;
};

using RatingKey = std::tuple<std::string, std::string, std::string>;  // question, model, rater
RatingKey key_of(const HumanRating& rating);

std::string rating_to_json_line(const HumanRating& rating);
HumanRating rating_from_json_line(const std::string& line);

// Reads a ratings JSONL file. Blank lines are skipped; any other malformed
// line is a DataError.
std::vector<HumanRating> read_ratings(const std::filesystem::path& path);

// Keeps the last record per (question, model, rater), in first-seen order.
std::vector<HumanRating> latest_ratings(const std::vector<HumanRating>& log);

// Append-only JSONL ratings log. Appends are serialized and flushed to disk
// before append() returns.
class RatingStore {
 public:
  explicit RatingStore(std::filesystem::path path);

  // Throws UsageError for a verdict outside {0, 1}, DataError on I/O failure.
  void append(const HumanRating& rating);

  std::vector<HumanRating> all() const;
  std::vector<HumanRating> latest() const;
  std::map<RatingKey, HumanRating> latest_by_key() const;

  // Raw file content.
  std::string export_jsonl() const;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<HumanRating> log_;
};

std::string utc_timestamp();

}  // namespace xqa::data
