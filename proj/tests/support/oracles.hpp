#pragma once

// Independent brute-force reference implementations used to check the
// library. They favour obviousness over speed and share no code with src/.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "xqa/qa_client.hpp"
#include "xqa/textnorm.hpp"

namespace oracle {

// Plain recursion over suffixes. Matching equal leading characters is always
// optimal, which keeps the recursion tractable for strings up to length 8.
inline std::size_t edit_distance(const std::u32string& a, const std::u32string& b, std::size_t i = 0,
                                 std::size_t j = 0) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return edit_distance(a, b, i + 1, j + 1);
  return 1 + std::min({edit_distance(a, b, i + 1, j), edit_distance(a, b, i, j + 1),
                       edit_distance(a, b, i + 1, j + 1)});
}

inline bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& seq) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < seq.size() && k < sub.size(); ++i) {
    if (seq[i] == sub[k]) ++k;
  }
  return k == sub.size();
}

// Enumerates every subsequence of the shorter sequence.
inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto& shorter = a.size() <= b.size() ? a : b;
  const auto& longer = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (unsigned long mask = 0; mask < (1UL << shorter.size()); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < shorter.size(); ++i) {
      if (mask & (1UL << i)) sub.push_back(shorter[i]);
    }
    if (sub.size() > best && is_subsequence(sub, longer)) best = sub.size();
  }
  return best;
}

inline double set_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  const std::set<std::string> p(pred.begin(), pred.end());
  const std::set<std::string> g(gold.begin(), gold.end());
  if (p.empty() && g.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& w : p) shared += g.count(w);
  if (shared == 0) return 0.0;
  const double precision = static_cast<double>(shared) / static_cast<double>(p.size());
  const double recall = static_cast<double>(shared) / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

inline double lcs_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  const double lcs = static_cast<double>(lcs_length(pred, gold));
  if (lcs == 0) return 0.0;
  const double precision = lcs / static_cast<double>(pred.size());
  const double recall = lcs / static_cast<double>(gold.size());
  return 2 * precision * recall / (precision + recall);
}

// Least squares through the normal equations, solved by Gauss-Jordan
// elimination with partial pivoting in extended precision. Rows of `x` are
// samples; a leading column of ones is added for the intercept.
inline std::vector<double> least_squares(const std::vector<std::array<double, 4>>& x, const std::vector<double>& y) {
  constexpr std::size_t p = 5;
  long double a[p][p + 1] = {};
  for (std::size_t r = 0; r < x.size(); ++r) {
    const long double row[p] = {1.0L, x[r][0], x[r][1], x[r][2], x[r][3]};
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) a[i][j] += row[i] * row[j];
      a[i][p] += row[i] * y[r];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[pivot][c])) pivot = r;
    }
    for (std::size_t j = 0; j <= p; ++j) std::swap(a[c][j], a[pivot][j]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= p; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t i = 0; i < p; ++i) beta[i] = static_cast<double>(a[i][p] / a[i][i]);
  return beta;  // intercept, w_em, w_lev, w_f1, w_rge
}

// Chunk ranges generated one by one from the definition.
inline std::vector<std::pair<std::size_t, std::size_t>> chunks(std::size_t n, std::size_t window, std::size_t stride) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (n == 0) return out;
  for (std::size_t start = 0;; start += window - stride) {
    out.emplace_back(start, std::min(start + window, n));
    if (start + window >= n) break;
  }
  return out;
}

inline bool better(const xqa::qa::AnswerCandidate& a, const xqa::qa::AnswerCandidate& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.start != b.start) return a.start < b.start;
  if (a.text != b.text) return a.text < b.text;
  if (a.end != b.end) return a.end < b.end;
  return a.chunk_index < b.chunk_index;
}

// Repeatedly fuses any two groups that contain a pair of related candidates
// until no pair is left, then keeps the best member of each group.
inline std::vector<xqa::qa::AnswerCandidate> merge(const std::vector<xqa::qa::AnswerCandidate>& candidates) {
  const auto related = [](const xqa::qa::AnswerCandidate& a, const xqa::qa::AnswerCandidate& b) {
    const bool overlap = a.start < b.end && b.start < a.end;
    return overlap || xqa::textnorm::normalize(a.text).str() == xqa::textnorm::normalize(b.text).str();
  };
  std::vector<std::vector<xqa::qa::AnswerCandidate>> groups;
  for (const auto& c : candidates) groups.push_back({c});
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < groups.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < groups.size() && !changed; ++j) {
        for (const auto& a : groups[i]) {
          for (const auto& b : groups[j]) {
            if (!changed && related(a, b)) changed = true;
          }
        }
        if (changed) {
          groups[i].insert(groups[i].end(), groups[j].begin(), groups[j].end());
          groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(j));
        }
      }
    }
  }
  std::vector<xqa::qa::AnswerCandidate> out;
  for (const auto& g : groups) out.push_back(*std::min_element(g.begin(), g.end(), better));
  std::sort(out.begin(), out.end(), better);
  return out;
}

}  // namespace oracle
