#include "json_util.hpp"
#include "xqa/error.hpp"
#include "xqa/qa_client.hpp"

namespace xqa::qa {
namespace {

bool contains_keyword(const std::string& text, const std::vector<std::string>& keywords) {
  const std::string norm = textnorm::normalize(text).str();
  for (const auto& kw : keywords) {
    if (norm.find(kw) != std::string::npos) return true;
  }
  return false;
}

bool region_matches(const Region& region, const ScopeRule& rule) {
  const bool check_heading = rule.match_target != MatchTarget::kBody;
  const bool check_body = rule.match_target != MatchTarget::kHeading;
  if (check_heading && region.heading && contains_keyword(*region.heading, rule.keywords)) return true;
  return check_body && contains_keyword(region.text, rule.keywords);
}

void append_region(Scope& scope, const Region& region) {
  if (!scope.region_ids.empty()) scope.text += kRegionSeparator;
  scope.text += region.text;
  scope.region_ids.push_back(region.region_id);
}

}  // namespace

MatchTarget parse_match_target(const std::string& name) {
  if (name == "heading") return MatchTarget::kHeading;
  if (name == "body") return MatchTarget::kBody;
  if (name == "both") return MatchTarget::kBoth;
  throw UsageError("match_target must be heading, body or both (got '" + name + "')");
}

ScopeRule::ScopeRule(std::string key, const std::vector<std::string>& raw_keywords, MatchTarget target)
    : question_key(std::move(key)), match_target(target) {
  for (const auto& kw : raw_keywords) {
    auto norm = textnorm::normalize(kw).str();
    if (!norm.empty()) keywords.push_back(std::move(norm));
  }
  if (keywords.empty()) throw UsageError("scope rule '" + question_key + "' has no usable keywords");
}

Scope restrict_scope(const DocumentRegions& doc, const ScopeRule& rule) {
  Scope scope;
  for (const auto& region : doc.regions) {
    if (region_matches(region, rule)) append_region(scope, region);
  }
  if (scope.region_ids.empty()) {
    scope = full_scope(doc);
    scope.fallback = true;
  }
  return scope;
}

Scope full_scope(const DocumentRegions& doc) {
  Scope scope;
  for (const auto& region : doc.regions) append_region(scope, region);
  return scope;
}

std::vector<DocumentRegions> load_documents(const std::filesystem::path& path) {
  const std::string where = path.string();
  const detail::Json root = detail::parse_json_file(path);
  if (!root.is_object() || !root.contains("documents") || !root["documents"].is_array()) {
    throw DataError(where + ": expected an object with a 'documents' array");
  }
  std::vector<DocumentRegions> docs;
  for (const auto& d : root["documents"]) {
    DocumentRegions doc;
    doc.document_id = detail::require<std::string>(d, "document_id", where);
    if (!d.contains("regions") || !d["regions"].is_array()) {
      throw DataError(where + ": document '" + doc.document_id + "' has no 'regions' array");
    }
    for (const auto& r : d["regions"]) {
      Region region;
      region.region_id = detail::optional_field<std::string>(
          r, "region_id", "r" + std::to_string(doc.regions.size()), where);
      if (r.contains("heading") && !r["heading"].is_null()) {
        region.heading = detail::require<std::string>(r, "heading", where);
      }
      if (r.contains("category") && !r["category"].is_null()) {
        region.category = detail::require<std::string>(r, "category", where);
      }
      region.text = detail::require<std::string>(r, "text", where);
      if (region.text.empty()) {
        throw DataError(where + ": empty region '" + region.region_id + "' in '" + doc.document_id + "'");
      }
      doc.regions.push_back(std::move(region));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace xqa::qa
