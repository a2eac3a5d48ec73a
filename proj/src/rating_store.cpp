#include "xqa/rating_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include "json_util.hpp"
#include "xqa/error.hpp"

namespace xqa::data {

RatingKey key_of(const HumanRating& rating) {
  return {rating.question_id, rating.model_id, rating.rater_id};
}

std::string rating_to_json_line(const HumanRating& rating) {
  const detail::Json j{
      {"question_id", rating.question_id}, {"model_id", rating.model_id},
      {"rater_id", rating.rater_id},       {"verdict", rating.verdict},
      {"timestamp", rating.timestamp},
  };
  return j.dump();
}

HumanRating rating_from_json_line(const std::string& line) {
  const detail::Json j = detail::parse_json(line, "rating");
  const std::string where = "rating";
  if (!j.contains("verdict") || !j["verdict"].is_number_integer()) {
    throw DataError("rating: 'verdict' must be the integer 0 or 1");
  }
  HumanRating r{
      .question_id = detail::require<std::string>(j, "question_id", where),
      .model_id = detail::require<std::string>(j, "model_id", where),
      .rater_id = detail::require<std::string>(j, "rater_id", where),
      .verdict = j["verdict"].get<int>(),
      .timestamp = detail::optional_field<std::string>(j, "timestamp", "", where),
  };
  if (r.verdict != 0 && r.verdict != 1) throw DataError("rating: verdict must be 0 or 1");
  return r;
}

std::vector<HumanRating> read_ratings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open ratings file");
  std::vector<HumanRating> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(rating_from_json_line(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<HumanRating> latest_ratings(const std::vector<HumanRating>& log) {
  std::map<RatingKey, std::size_t> slot;
  std::vector<HumanRating> out;
  for (const auto& r : log) {
    auto [it, inserted] = slot.emplace(key_of(r), out.size());
    if (inserted) {
      out.push_back(r);
    } else {
      out[it->second] = r;
    }
  }
  return out;
}

RatingStore::RatingStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    log_ = read_ratings(path_);
  } else {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream touch(path_, std::ios::binary);
    if (!touch) throw DataError(path_.string() + ": cannot create ratings file");
  }
}

void RatingStore::append(const HumanRating& rating) {
  if (rating.verdict != 0 && rating.verdict != 1) {
    throw UsageError("verdict must be 0 or 1");
  }
  const std::string line = rating_to_json_line(rating) + "\n";

  std::lock_guard lock(mutex_);
  const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw DataError(path_.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw DataError(path_.string() + ": " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw DataError(path_.string() + ": fsync failed");
  log_.push_back(rating);
}

std::vector<HumanRating> RatingStore::all() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::vector<HumanRating> RatingStore::latest() const {
  std::lock_guard lock(mutex_);
  return latest_ratings(log_);
}

std::map<RatingKey, HumanRating> RatingStore::latest_by_key() const {
  std::lock_guard lock(mutex_);
  std::map<RatingKey, HumanRating> out;
  for (const auto& r : log_) out.insert_or_assign(key_of(r), r);
  return out;
}

std::string RatingStore::export_jsonl() const {
  std::lock_guard lock(mutex_);
  return detail::read_file(path_);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

}  // namespace xqa::data
