#include <algorithm>
#include <cmath>
#include <random>

#include "json_util.hpp"
#include "xqa/datamodel.hpp"
#include "xqa/error.hpp"

namespace xqa::data {
namespace {

// Uniform draw in [0, bound) by rejection; std::uniform_int_distribution is
// implementation-defined and would break cross-platform reproducibility.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % bound);
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void fisher_yates(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(draw_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

void portable_shuffle(std::vector<std::string>& items, std::uint64_t seed) { fisher_yates(items, seed); }
void portable_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) { fisher_yates(items, seed); }

std::vector<std::string> SplitPlan::train(std::size_t fold) const {
  const auto& held_out = test_folds.at(fold);
  std::vector<std::string> out;
  for (const auto& doc : documents) {
    if (std::find(held_out.begin(), held_out.end(), doc) == held_out.end()) out.push_back(doc);
  }
  return out;
}

SplitPlan make_splits(const std::vector<std::string>& documents, std::size_t k,
                      double test_fraction, std::uint64_t seed) {
  if (k < 1) throw UsageError("k must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test fraction must lie strictly between 0 and 1");
  }
  SplitPlan plan;
  plan.documents = documents;
  std::sort(plan.documents.begin(), plan.documents.end());
  plan.documents.erase(std::unique(plan.documents.begin(), plan.documents.end()), plan.documents.end());
  const std::size_t n = plan.documents.size();
  if (k > n) {
    throw UsageError("k = " + std::to_string(k) + " exceeds the number of documents (" +
                     std::to_string(n) + ")");
  }
  plan.seed = seed;
  plan.k = k;
  plan.test_fraction = test_fraction;

  std::vector<std::string> order = plan.documents;
  portable_shuffle(order, seed);

  if (k == 1) {
    // The small epsilon keeps exact products such as 0.2 * 170 from rounding up.
    auto test_size = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n) - 1e-9));
    test_size = std::clamp<std::size_t>(test_size, 1, n);
    plan.test_folds.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_size));
  } else {
    std::size_t begin = 0;
    for (std::size_t fold = 0; fold < k; ++fold) {
      const std::size_t size = n / k + (fold < n % k ? 1 : 0);
      plan.test_folds.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                   order.begin() + static_cast<std::ptrdiff_t>(begin + size));
      begin += size;
    }
  }
  for (auto& fold : plan.test_folds) std::sort(fold.begin(), fold.end());
  for (std::size_t fold = 0; fold < plan.test_folds.size(); ++fold) {
    for (const auto& doc : plan.test_folds[fold]) plan.fold_of[doc] = fold;
  }
  return plan;
}

std::string fold_to_json(const SplitPlan& plan, std::size_t fold) {
  detail::Json out{
      {"fold", fold},
      {"seed", plan.seed},
      {"test", plan.test(fold)},
      {"train", plan.train(fold)},
  };
  return out.dump(2) + "\n";
}

std::string split_plan_to_json(const SplitPlan& plan) {
  detail::Json folds = detail::Json::array();
  for (std::size_t fold = 0; fold < plan.fold_count(); ++fold) {
    folds.push_back(detail::Json{{"fold", fold}, {"test", plan.test(fold)}, {"train", plan.train(fold)}});
  }
  detail::Json out{
      {"seed", plan.seed},
      {"k", plan.k},
      {"test_fraction", plan.test_fraction},
      {"document_count", plan.documents.size()},
      {"folds", folds},
  };
  return out.dump(2) + "\n";
}

}  // namespace xqa::data
