#include "xqa/textnorm.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <stdexcept>

namespace xqa::textnorm {
namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* instance = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || instance == nullptr) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  return *instance;
}

icu::UnicodeString compose(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc().normalize(in, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  return out;
}

bool is_removed(UChar32 c) {
  if (u_charType(c) == U_CONTROL_CHAR) return true;
  return (U_GET_GC_MASK(c) & U_GC_P_MASK) != 0;
}

}  // namespace

bool is_whitespace(char32_t c) {
  return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0;
}

NormalizedText normalize(std::string_view raw) {
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  text = compose(text);
  text.toLower(icu::Locale::getRoot());
  // Full case mapping can emit decomposed sequences (e.g. U+0130).
  text = compose(text);

  icu::UnicodeString cleaned;
  bool pending_space = false;
  for (int32_t i = 0; i < text.length();) {
    const UChar32 c = text.char32At(i);
    i += U16_LENGTH(c);
    if (is_removed(c) || u_isUWhiteSpace(c)) {
      pending_space = !cleaned.isEmpty();
      continue;
    }
    if (pending_space) {
      cleaned.append(static_cast<UChar>(u' '));
      pending_space = false;
    }
    cleaned.append(c);
  }

  std::string out;
  cleaned.toUTF8String(out);
  return NormalizedText(std::move(out));
}

TokenSeq split_whitespace(std::string_view text) {
  TokenSeq tokens;
  const std::u32string cps = code_points(text);
  std::u32string current;
  for (char32_t c : cps) {
    if (is_whitespace(c)) {
      if (!current.empty()) tokens.push_back(to_utf8(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(to_utf8(current));
  return tokens;
}

TokenSeq tokenize(const NormalizedText& text) {
  TokenSeq tokens;
  const std::string& s = text.str();
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t end = s.find(' ', start);
    if (end == std::string::npos) end = s.size();
    if (end > start) tokens.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

WordSet word_set(const TokenSeq& tokens) { return WordSet(tokens.begin(), tokens.end()); }

std::u32string code_points(std::string_view utf8) {
  const icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  std::u32string out;
  out.reserve(static_cast<std::size_t>(text.length()));
  for (int32_t i = 0; i < text.length();) {
    const UChar32 c = text.char32At(i);
    i += U16_LENGTH(c);
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

std::string to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

}  // namespace xqa::textnorm
