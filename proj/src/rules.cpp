#include "xqa/rules.hpp"

#include <array>
#include <utility>

#include "json_util.hpp"
#include "xqa/error.hpp"

namespace xqa::rules {
namespace {

using detail::Json;

constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kReferenceCriteria{{
    {"ingredient",
     "All ingredients (there may be one or more) must be included in the answer, each with correct spelling"},
    {"look", "Description of look (e.g. color and shape of pills) must be correct, details (e.g. notches) may be missing"},
    {"application", "Description of application must be essentially correct, details may be missing"},
    {"damage cause",
     "Description of cause must be essentially correct, different wording is acceptable; if there are several "
     "possible causes, one of these is sufficient"},
    {"assessor name", "Last name must be exact, first name may be missing or abbreviated, title may be missing"},
}};

qa::ValidationRule parse_validation(const std::string& key, const Json& v, const std::string& where) {
  qa::ValidationRule rule;
  rule.question_key = key;
  if (v.contains("must_match")) rule.must_match = detail::require<std::string>(v, "must_match", where);
  if (v.contains("must_not_match")) rule.must_not_match = detail::require<std::string>(v, "must_not_match", where);
  if (v.contains("min_length")) rule.min_length = detail::require<std::size_t>(v, "min_length", where);
  if (v.contains("max_length")) rule.max_length = detail::require<std::size_t>(v, "max_length", where);
  rule.must_match_reason = detail::optional_field<std::string>(v, "must_match_reason", rule.must_match_reason, where);
  rule.must_not_match_reason =
      detail::optional_field<std::string>(v, "must_not_match_reason", rule.must_not_match_reason, where);
  try {
    rule.check();
  } catch (const UsageError& e) {
    throw DataError(where + ": " + e.what());
  }
  return rule;
}

}  // namespace

const QuestionRules* RuleBook::find(std::string_view question_key) const {
  for (const auto& q : questions) {
    if (q.question_key == question_key) return &q;
  }
  return nullptr;
}

RuleBook load_rules(const std::filesystem::path& path) {
  const std::string where = path.string();
  const Json root = detail::parse_json_file(path);
  if (!root.is_object()) throw DataError(where + ": expected an object keyed by question_key");
  RuleBook book;
  for (const auto& [key, entry] : root.items()) {
    const std::string at = where + " [" + key + "]";
    if (!entry.is_object()) throw DataError(at + ": expected an object");
    QuestionRules q;
    q.question_key = key;
    q.question = detail::require<std::string>(entry, "question", at);
    if (entry.contains("scope")) {
      const auto& s = entry["scope"];
      const auto keywords = detail::require<std::vector<std::string>>(s, "keywords", at);
      try {
        q.scope.emplace(key, keywords,
                        qa::parse_match_target(detail::optional_field<std::string>(s, "match_target", "both", at)));
      } catch (const UsageError& e) {
        throw DataError(at + ": " + e.what());
      }
    }
    if (entry.contains("validation")) q.validation = parse_validation(key, entry["validation"], at);
    if (entry.contains("criteria")) q.criteria = detail::require<std::string>(entry, "criteria", at);
    book.questions.push_back(std::move(q));
  }
  return book;
}

std::optional<std::string> reference_criteria(std::string_view question_key) {
  const std::string norm = textnorm::normalize(question_key).str();
  for (const auto& [key, text] : kReferenceCriteria) {
    if (norm == key) return std::string(text);
  }
  return std::nullopt;
}

std::optional<std::string> criteria_for(const RuleBook* book, std::string_view question_key) {
  if (book != nullptr) {
    if (const auto* q = book->find(question_key); q != nullptr && q->criteria) return q->criteria;
  }
  return reference_criteria(question_key);
}

}  // namespace xqa::rules
