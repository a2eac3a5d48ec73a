#pragma once

// Shared test scaffolding: temporary directories, random inputs, and an
// in-process mock of the QA endpoint.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "xqa/textnorm.hpp"

namespace testing {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline fs::path data_dir() { return fs::path(XQA_TEST_DATA_DIR); }

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("xqa-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Characters that exercise normalization: letters in several scripts, case
// pairs, combining marks, punctuation, whitespace and control characters.
inline const std::vector<char32_t>& fuzz_alphabet() {
  static const std::vector<char32_t> alphabet{
      U'a', U'b', U'c', U'A', U'B', U'Z', U'ä', U'Ä', U'ß', U'ẞ', U'é', U'e', U'́', U'ö', U'Ö',
      U'Σ', U'σ', U'ς', U'İ', U'ı', U'Ǆ', U'ǅ', U'水', U'ア', U'😀', U'0', U'7', U' ', U' ', U'\t',
      U'\n', U' ', U' ', U'\u0001', U'\u007f', U'.', U',', U'-', U'!', U'?', U'"', U'(',
      U'«', U'»', U'—', U'¿', U'$', U'+', U'°', U'​', U'ﬁ', U'Å', U'Å'};
  return alphabet;
}

inline std::string random_text(std::mt19937_64& rng, std::size_t max_len,
                               const std::vector<char32_t>& alphabet = fuzz_alphabet()) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::u32string s;
  for (std::size_t n = len(rng); n > 0; --n) s += alphabet[pick(rng)];
  return xqa::textnorm::to_utf8(s);
}

// Word sequences drawn from a small vocabulary so that overlaps are common.
inline std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t max_len, std::size_t vocabulary = 4) {
  static const std::vector<std::string> words{"a", "b", "c", "d", "e", "f", "g", "h"};
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, std::min(vocabulary, words.size()) - 1);
  std::vector<std::string> out;
  for (std::size_t n = len(rng); n > 0; --n) out.push_back(words[pick(rng)]);
  return out;
}

inline std::string join(const std::vector<std::string>& words, const std::string& sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) out += (i ? sep : "") + words[i];
  return out;
}

// Runs an httplib server with a POST /answer handler on a free local port.
class MockQaServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit MockQaServer(Handler handler) {
    server_.Post("/answer", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockQaServer() {
    server_.stop();
    thread_.join();
  }
  MockQaServer(const MockQaServer&) = delete;
  MockQaServer& operator=(const MockQaServer&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::size_t requests() const { return requests_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
};

// A scripted model: for each request it returns every scripted answer of the
// asked question that occurs in the submitted context, located by code point
// offsets, plus the first context word as a low-confidence distractor.
class ScriptedModel {
 public:
  explicit ScriptedModel(const fs::path& script) {
    const Json doc = Json::parse(slurp(script));
    for (const auto& a : doc["answers"]) {
      answers_.push_back({a["question"].get<std::string>(), a["text"].get<std::string>(),
                          a["confidence"].get<double>()});
    }
  }

  void operator()(const httplib::Request& req, httplib::Response& res) const {
    const auto body = Json::parse(req.body);
    const auto question = body["question"].get<std::string>();
    const auto context = xqa::textnorm::code_points(body["context"].get<std::string>());
    const auto top_k = body["top_k"].get<std::size_t>();
    Json answers = Json::array();
    for (const auto& a : answers_) {
      if (a.question != question) continue;
      const auto text = xqa::textnorm::code_points(a.text);
      const auto pos = context.find(text);
      if (pos == std::u32string::npos) continue;
      answers.push_back({{"text", a.text}, {"start", pos}, {"end", pos + text.size()}, {"confidence", a.confidence}});
    }
    std::size_t end = 0;
    while (end < context.size() && !xqa::textnorm::is_whitespace(context[end])) ++end;
    if (end > 0) {
      answers.push_back({{"text", xqa::textnorm::to_utf8(context.substr(0, end))},
                         {"start", 0},
                         {"end", end},
                         {"confidence", 0.05}});
    }
    while (answers.size() > top_k) answers.erase(answers.end() - 1);
    res.set_content(Json{{"answers", answers}}.dump(), "application/json");
  }

 private:
  struct Scripted {
    std::string question;
    std::string text;
    double confidence;
  };
  std::vector<Scripted> answers_;
};

}  // namespace testing
