#include <algorithm>
#include <numeric>
#include <tuple>

#include "xqa/qa_client.hpp"

namespace xqa::qa {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

bool spans_overlap(const AnswerCandidate& a, const AnswerCandidate& b) {
  return a.start < b.end && b.start < a.end;
}

}  // namespace

bool ranks_before(const AnswerCandidate& a, const AnswerCandidate& b) {
  return std::tie(b.confidence, a.start, a.text, a.end, a.chunk_index) <
         std::tie(a.confidence, b.start, b.text, b.end, b.chunk_index);
}

bool same_answer(const AnswerCandidate& a, const AnswerCandidate& b) {
  return spans_overlap(a, b) || textnorm::normalize(a.text) == textnorm::normalize(b.text);
}

std::vector<AnswerCandidate> merge_predictions(const std::vector<AnswerCandidate>& candidates) {
  const std::size_t n = candidates.size();
  std::vector<textnorm::NormalizedText> norm;
  norm.reserve(n);
  for (const auto& c : candidates) norm.push_back(textnorm::normalize(c.text));

  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (spans_overlap(candidates[i], candidates[j]) || norm[i] == norm[j]) sets.unite(i, j);
    }
  }

  std::vector<std::ptrdiff_t> best(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (best[root] < 0 || ranks_before(candidates[i], candidates[static_cast<std::size_t>(best[root])])) {
      best[root] = static_cast<std::ptrdiff_t>(i);
    }
  }
  std::vector<AnswerCandidate> merged;
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] >= 0) merged.push_back(candidates[static_cast<std::size_t>(best[i])]);
  }
  std::sort(merged.begin(), merged.end(), ranks_before);
  return merged;
}

}  // namespace xqa::qa
