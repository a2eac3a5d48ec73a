#include "xqa/qa_client.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "httplib.h"
#include "json_util.hpp"
#include "xqa/error.hpp"

namespace xqa::qa {

std::string answer_request_to_json(const AnswerRequest& request) {
  const detail::Json j{{"question", request.question}, {"context", request.context}, {"top_k", request.top_k}};
  return j.dump();
}

std::vector<EndpointAnswer> parse_answer_response(const std::string& body, std::size_t context_length,
                                                  int chunk_index) {
  const auto fail = [chunk_index](const std::string& why) {
    return TransportError("chunk " + std::to_string(chunk_index) + ": non-conforming response: " + why,
                          chunk_index);
  };
  detail::Json j;
  try {
    j = detail::Json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("invalid JSON (") + e.what() + ")");
  }
  if (!j.is_object() || !j.contains("answers") || !j["answers"].is_array()) {
    throw fail("missing 'answers' array");
  }
  std::vector<EndpointAnswer> out;
  for (const auto& a : j["answers"]) {
    if (!a.is_object() || !a.contains("text") || !a["text"].is_string() || !a.contains("start") ||
        !a["start"].is_number_integer() || !a.contains("end") || !a["end"].is_number_integer() ||
        !a.contains("confidence") || !a["confidence"].is_number()) {
      throw fail("answer needs text, integer start/end and numeric confidence");
    }
    const auto start = a["start"].get<long long>();
    const auto end = a["end"].get<long long>();
    const double confidence = a["confidence"].get<double>();
    if (!(confidence >= 0.0 && confidence <= 1.0)) throw fail("confidence outside [0,1]");
    if (start < 0 || end <= start || static_cast<std::size_t>(end) > context_length) {
      throw fail("span [" + std::to_string(start) + ", " + std::to_string(end) +
                 ") outside the submitted context");
    }
    out.push_back({a["text"].get<std::string>(), static_cast<std::size_t>(start),
                   static_cast<std::size_t>(end), confidence});
  }
  return out;
}

HttpQaEndpoint::HttpQaEndpoint(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (base_url_.ends_with('/')) base_url_.pop_back();
}

EndpointReply HttpQaEndpoint::answer(const AnswerRequest& request, int chunk_index) {
  // Split "scheme://host:port/prefix" into the client origin and a path prefix.
  std::string origin = base_url_;
  std::string prefix;
  const auto scheme_end = base_url_.find("://");
  const auto path_start = base_url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start != std::string::npos) {
    origin = base_url_.substr(0, path_start);
    prefix = base_url_.substr(path_start);
  }

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  auto res = client.Post(prefix + "/answer", answer_request_to_json(request), "application/json");
  if (!res) {
    if (res.error() == httplib::Error::Read) return EndpointReply{.timed_out = true, .answers = {}};
    throw TransportError("chunk " + std::to_string(chunk_index) + ": " + base_url_ +
                             " unreachable: " + httplib::to_string(res.error()),
                         chunk_index);
  }
  if (res->status != 200) {
    throw TransportError("chunk " + std::to_string(chunk_index) + ": endpoint returned HTTP " +
                             std::to_string(res->status),
                         chunk_index);
  }
  const std::size_t length = textnorm::code_points(request.context).size();
  return EndpointReply{.timed_out = false, .answers = parse_answer_response(res->body, length, chunk_index)};
}

QueryResult query_model(QaEndpoint& endpoint, const std::string& question, const std::string& scope,
                        const QueryConfig& config) {
  const std::u32string text = textnorm::code_points(scope);
  const auto words = word_spans(text);
  const auto chunks = chunk_context(words.size(), config.window, config.doc_stride);

  struct ChunkOutcome {
    std::size_t offset = 0;
    EndpointReply reply;
    std::exception_ptr error;
  };
  std::vector<ChunkOutcome> outcomes(chunks.size());

  const auto run_chunk = [&](std::size_t i) {
    const std::size_t begin = words[chunks[i].begin].begin;
    const std::size_t end = words[chunks[i].end - 1].end;
    outcomes[i].offset = begin;
    try {
      const AnswerRequest request{question, textnorm::to_utf8(std::u32string_view(text).substr(begin, end - begin)),
                                  config.top_k};
      outcomes[i].reply = endpoint.answer(request, static_cast<int>(i));
    } catch (...) {
      outcomes[i].error = std::current_exception();
    }
  };

  std::size_t issued = 0;
  const std::size_t workers = std::min(std::max<std::size_t>(config.parallelism, 1), chunks.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      run_chunk(i);
      ++issued;
      if (outcomes[i].error) std::rethrow_exception(outcomes[i].error);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < chunks.size(); i = next++) run_chunk(i);
      });
    }
    pool.clear();
    issued = chunks.size();
    for (const auto& o : outcomes) {
      if (o.error) std::rethrow_exception(o.error);
    }
  }

  QueryResult result;
  result.requests = issued;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.reply.timed_out) {
      result.partial = true;
      result.timed_out_chunks.push_back(static_cast<int>(i));
      continue;
    }
    for (const auto& a : o.reply.answers) {
      result.candidates.push_back({a.text, a.confidence, static_cast<int>(i), a.start + o.offset, a.end + o.offset});
    }
  }
  return result;
}

}  // namespace xqa::qa
