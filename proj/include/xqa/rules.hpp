#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xqa/qa_client.hpp"

namespace xqa::rules {

// Per-feature configuration: the question posed to the QA model, how its
// search scope is restricted, how its answers are validated, and the rating
// criteria shown to human experts.
struct QuestionRules {
  std::string question_key;
  std::string question;
  std::optional<qa::ScopeRule> scope;
  std::optional<qa::ValidationRule> validation;
  std::optional<std::string> criteria;
};

struct RuleBook {
  std::vector<QuestionRules> questions;  // file order

  const QuestionRules* find(std::string_view question_key) const;
};

// JSON object keyed by question_key:
//   {"Assessor Name": {"question": "...",
//                      "scope": {"keywords": [...], "match_target": "heading|body|both"},
//                      "validation": {"must_match": "...", "must_not_match": "...",
//                                     "must_match_reason": "...", "must_not_match_reason": "...",
//                                     "min_length": 1, "max_length": 80},
//                      "criteria": "..."}}
RuleBook load_rules(const std::filesystem::path& path);

// Built-in expert rating criteria for the leaflet and damage-report features,
// matched on the normalized question key.
std::optional<std::string> reference_criteria(std::string_view question_key);

// Criteria from the rule book if present, else the built-in table.
std::optional<std::string> criteria_for(const RuleBook* book, std::string_view question_key);

}  // namespace xqa::rules
