#include "xqa/error.hpp"
#include "xqa/qa_client.hpp"

namespace xqa::qa {

std::vector<TokenRange> chunk_context(std::size_t token_count, std::size_t window, std::size_t doc_stride) {
  if (doc_stride == 0 || doc_stride >= window) throw UsageError("stride must be smaller than window");
  std::vector<TokenRange> chunks;
  const std::size_t step = window - doc_stride;
  for (std::size_t start = 0; start < token_count; start += step) {
    const std::size_t end = std::min(start + window, token_count);
    chunks.push_back({start, end});
    if (end == token_count) break;
  }
  return chunks;
}

std::vector<TokenRange> chunk_context(const textnorm::TokenSeq& tokens, std::size_t window,
                                      std::size_t doc_stride) {
  return chunk_context(tokens.size(), window, doc_stride);
}

std::vector<WordSpan> word_spans(std::u32string_view text) {
  std::vector<WordSpan> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && textnorm::is_whitespace(text[i])) ++i;
    if (i == text.size()) break;
    const std::size_t begin = i;
    while (i < text.size() && !textnorm::is_whitespace(text[i])) ++i;
    spans.push_back({begin, i});
  }
  return spans;
}

QueryConfig QueryConfig::from(const data::HyperparameterRecord& hp, std::size_t window) {
  hp.validate();
  QueryConfig config;
  config.window = window;
  config.doc_stride = static_cast<std::size_t>(hp.doc_stride);
  if (config.doc_stride >= config.window) {
    throw UsageError("doc_stride " + std::to_string(hp.doc_stride) + " must be smaller than window " +
                     std::to_string(window));
  }
  return config;
}

}  // namespace xqa::qa
