#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "xqa/datamodel.hpp"
#include "xqa/textnorm.hpp"

namespace xqa::qa {

// ---------------------------------------------------------------------------
// Scope restriction

struct Region {
  std::string region_id;
  std::optional<std::string> heading;
  std::string text;
  std::optional<std::string> category;
};

struct DocumentRegions {
  std::string document_id;
  std::vector<Region> regions;  // document order
};

enum class MatchTarget { kHeading, kBody, kBoth };
MatchTarget parse_match_target(const std::string& name);

struct ScopeRule {
  std::string question_key;
  std::vector<std::string> keywords;  // stored normalized
  MatchTarget match_target = MatchTarget::kBoth;

  // Normalizes keywords; throws UsageError when none remain.
  ScopeRule(std::string key, const std::vector<std::string>& raw_keywords, MatchTarget target);
};

struct Scope {
  std::string text;
  std::vector<std::string> region_ids;  // regions that make up `text`
  bool fallback = false;                // no region matched; `text` is the whole document
};

inline constexpr std::string_view kRegionSeparator = "\n\n";

// Joins (in document order) every region whose normalized heading and/or body
// contains a keyword. Falls back to all regions when nothing matches.
Scope restrict_scope(const DocumentRegions& doc, const ScopeRule& rule);
// Whole document, used when a question has no scope rule.
Scope full_scope(const DocumentRegions& doc);

std::vector<DocumentRegions> load_documents(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Chunking

struct TokenRange {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

// Windows of `window` tokens advancing by window - doc_stride, so that
// neighbouring chunks share doc_stride tokens. Stops at the first chunk that
// reaches the end. Throws UsageError("stride must be smaller than window")
// unless 0 < doc_stride < window.
std::vector<TokenRange> chunk_context(std::size_t token_count, std::size_t window, std::size_t doc_stride);
std::vector<TokenRange> chunk_context(const textnorm::TokenSeq& tokens, std::size_t window,
                                      std::size_t doc_stride);

// Whitespace-delimited word of a text, located by code point offsets.
struct WordSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<WordSpan> word_spans(std::u32string_view text);

// ---------------------------------------------------------------------------
// Endpoint protocol: POST /answer {"question","context","top_k"} ->
// {"answers":[{"text","start","end","confidence"}]}, offsets in code points.

struct AnswerRequest {
  std::string question;
  std::string context;
  int top_k = 1;
};

struct EndpointAnswer {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  double confidence = 0.0;
};

// Outcome of one request. Timeouts are reported as a value, everything else
// (unreachable endpoint, bad status, non-conforming payload) as TransportError.
struct EndpointReply {
  bool timed_out = false;
  std::vector<EndpointAnswer> answers;
};

class QaEndpoint {
 public:
  virtual ~QaEndpoint() = default;
  // `chunk_index` is only used for error reporting.
  virtual EndpointReply answer(const AnswerRequest& request, int chunk_index) = 0;
};

// Parses and checks a response body against the protocol. `context_length`
// is the code point length of the submitted context.
std::vector<EndpointAnswer> parse_answer_response(const std::string& body, std::size_t context_length,
                                                  int chunk_index);
std::string answer_request_to_json(const AnswerRequest& request);

class HttpQaEndpoint final : public QaEndpoint {
 public:
  // `base_url` like "http://127.0.0.1:8080".
  explicit HttpQaEndpoint(std::string base_url,
                          std::chrono::milliseconds timeout = std::chrono::seconds(30));
  EndpointReply answer(const AnswerRequest& request, int chunk_index) override;

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

// ---------------------------------------------------------------------------
// Querying and merging

struct AnswerCandidate {
  std::string text;
  double confidence = 0.0;
  int chunk_index = 0;
  std::size_t start = 0;  // code point offsets within the scope text
  std::size_t end = 0;

  friend bool operator==(const AnswerCandidate&, const AnswerCandidate&) = default;
};

struct QueryConfig {
  std::size_t window = 256;  // whitespace tokens per request
  std::size_t doc_stride = 128;
  int top_k = 3;
  std::size_t parallelism = 1;

  static QueryConfig from(const data::HyperparameterRecord& hp, std::size_t window);
};

struct QueryResult {
  std::vector<AnswerCandidate> candidates;
  std::size_t requests = 0;
  bool partial = false;  // some chunk timed out
  std::vector<int> timed_out_chunks;
};

QueryResult query_model(QaEndpoint& endpoint, const std::string& question, const std::string& scope,
                        const QueryConfig& config);

// Candidates are connected when their normalized texts are equal or their
// spans overlap; each connected group keeps its best member. Output is sorted
// by confidence desc, then start asc, then text, then end, then chunk index.
// Empty result means "no answer".
std::vector<AnswerCandidate> merge_predictions(const std::vector<AnswerCandidate>& candidates);
bool ranks_before(const AnswerCandidate& a, const AnswerCandidate& b);
bool same_answer(const AnswerCandidate& a, const AnswerCandidate& b);

// ---------------------------------------------------------------------------
// Validation

struct ValidationRule {
  std::string question_key;
  std::optional<std::string> must_match;
  std::optional<std::string> must_not_match;
  std::optional<std::size_t> min_length;  // code points
  std::optional<std::size_t> max_length;
  std::string must_match_reason = "answer does not match the required pattern";
  std::string must_not_match_reason = "answer matches a forbidden pattern";

  // Throws UsageError when no constraint is set or a pattern does not compile.
  void check() const;
};

struct Verdict {
  bool accepted = true;
  std::string reason;

  static Verdict accept() { return {}; }
  static Verdict reject(std::string why) { return {false, std::move(why)}; }
};

Verdict validate_answer(const std::string& answer, const ValidationRule& rule);

}  // namespace xqa::qa
