#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace xqa::textnorm {

// UTF-8 text that has passed through normalize(): NFC, lowercase, no control
// or punctuation characters, single spaces between words, no outer spaces.
class NormalizedText {
 public:
  NormalizedText() = default;

  const std::string& str() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }

  friend bool operator==(const NormalizedText&, const NormalizedText&) = default;

 private:
  friend NormalizedText normalize(std::string_view raw);
  explicit NormalizedText(std::string text) : text_(std::move(text)) {}

  std::string text_;
};

using TokenSeq = std::vector<std::string>;
using WordSet = std::set<std::string>;

NormalizedText normalize(std::string_view raw);

// Whitespace split of normalized text. Never yields empty tokens.
TokenSeq tokenize(const NormalizedText& text);

// Whitespace split of arbitrary text (used when scoring un-normalized input).
TokenSeq split_whitespace(std::string_view text);

WordSet word_set(const TokenSeq& tokens);

// Decodes UTF-8 into code points; invalid sequences become U+FFFD.
std::u32string code_points(std::string_view utf8);
std::string to_utf8(std::u32string_view text);

bool is_whitespace(char32_t c);

}  // namespace xqa::textnorm
