#include "xqa/error.hpp"
#include "xqa/qa_client.hpp"

namespace xqa::qa {

void ValidationRule::check() const {
  if (!must_match && !must_not_match && !min_length && !max_length) {
    throw UsageError("validation rule '" + question_key + "' has no constraint");
  }
  for (const auto* pattern : {&must_match, &must_not_match}) {
    if (!*pattern) continue;
    try {
      std::regex re(**pattern);
    } catch (const std::regex_error& e) {
      throw UsageError("validation rule '" + question_key + "': bad pattern '" + **pattern + "': " + e.what());
    }
  }
}

Verdict validate_answer(const std::string& answer, const ValidationRule& rule) {
  const std::size_t length = textnorm::code_points(answer).size();
  if (rule.min_length && length < *rule.min_length) {
    return Verdict::reject("answer shorter than " + std::to_string(*rule.min_length) + " characters");
  }
  if (rule.max_length && length > *rule.max_length) {
    return Verdict::reject("answer longer than " + std::to_string(*rule.max_length) + " characters");
  }
  if (rule.must_match && !std::regex_search(answer, std::regex(*rule.must_match))) {
    return Verdict::reject(rule.must_match_reason);
  }
  if (rule.must_not_match && std::regex_search(answer, std::regex(*rule.must_not_match))) {
    return Verdict::reject(rule.must_not_match_reason);
  }
  return Verdict::accept();
}

}  // namespace xqa::qa
