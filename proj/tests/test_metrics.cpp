#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "xqa/error.hpp"
#include "xqa/metrics.hpp"

using namespace xqa::metrics;
using Catch::Approx;
using xqa::textnorm::code_points;
using xqa::textnorm::normalize;
using xqa::textnorm::tokenize;
using xqa::textnorm::TokenSeq;

namespace {

GoldAnswerSet gold(std::vector<std::string> answers) { return GoldAnswerSet("q", answers); }

const std::vector<char32_t> kSmallAlphabet{U'a', U'b', U'c', U'ä', U'水'};

}  // namespace

TEST_CASE("gold answer sets de-duplicate after normalization", "[metrics]") {
  const auto g = gold({"White pills.", "white pills", "WHITE  PILLS", "blue"});
  CHECK(g.size() == 2);
  CHECK(g.answers().front() == "White pills.");
  CHECK_THROWS_AS(gold({}), xqa::DataError);
}

TEST_CASE("exact match examples", "[metrics]") {
  CHECK(exact_match("Metoprololtartrat", gold({"Metoprololtartrat"})) == 1);
  CHECK(exact_match("metoprololtartrat.", gold({"Metoprololtartrat"})) == 1);
  CHECK(exact_match("Metoprolol", gold({"Metoprololtartrat"})) == 0);
  CHECK(exact_match("b", gold({"a", "B"})) == 1);
  CHECK(exact_match("metoprololtartrat.", gold({"Metoprololtartrat"}), {.normalize = false}) == 0);
}

TEST_CASE("levenshtein examples", "[metrics]") {
  CHECK(levenshtein_distance("kitten", "sitting") == oracle::edit_distance(U"kitten", U"sitting"));
  CHECK(levenshtein_distance("kitten", "sitting") == 3);
  CHECK(levenshtein_distance("same", "same") == 0);
  CHECK(levenshtein_distance("", "abc") == 3);
  CHECK(levenshtein_distance("ä", "a") == 1);  // one code point, not two bytes
  CHECK(levenshtein_similarity("abc", gold({"abd"})) == Approx(1.0 - 1.0 / 3.0).margin(1e-9));
  CHECK(levenshtein_similarity("abc", gold({"abc"})) == 1.0);
  CHECK(levenshtein_similarity("xyz", gold({"abc"})) == 0.0);
  CHECK(levenshtein_similarity("", gold({""})) == 1.0);
}

TEST_CASE("token f1 examples", "[metrics]") {
  CHECK(token_f1("white round pills", gold({"white pills"})) == Approx(0.8).margin(1e-9));
  CHECK(token_f1("white round pills", gold({"white pills", "white round pills"})) == Approx(0.9).margin(1e-9));
  CHECK(token_f1("blue", gold({"white pills"})) == 0.0);
  CHECK(token_f1("", gold({""})) == 1.0);
  CHECK(token_f1("pills pills white", gold({"white pills"})) == 1.0);  // distinct words
}

TEST_CASE("rouge-l examples", "[metrics]") {
  CHECK(rouge_l(TokenSeq{"a", "c", "d"}, TokenSeq{"a", "b", "c", "d"}) == Approx(6.0 / 7.0).margin(1e-9));
  CHECK(oracle::lcs_length({"a", "c", "d"}, {"a", "b", "c", "d"}) == 3);
  CHECK(rouge_l("a b c", gold({"a b c"})) == 1.0);
  CHECK(rouge_l("a b", gold({"c d"})) == 0.0);
  CHECK(rouge_l("c d", gold({"x", "c d e"})) == Approx(0.8).margin(1e-12));  // best over gold
}

TEST_CASE("score_instance bundles the four metrics", "[metrics]") {
  const auto g = gold({"white pills"});
  const auto s = score_instance("white round pills", g);
  const double lev =
      1.0 - static_cast<double>(oracle::edit_distance(U"white round pills", U"white pills")) / 17.0;
  CHECK(s.em == 0.0);
  CHECK(s.lev == Approx(lev).margin(1e-12));
  CHECK(s.f1 == Approx(oracle::set_f1({"white", "round", "pills"}, {"white", "pills"})).margin(1e-12));
  CHECK(s.rouge_l == Approx(oracle::lcs_f1({"white", "round", "pills"}, {"white", "pills"})).margin(1e-12));
  CHECK(score_instance("white pills", g) == ScoreVector{1, 1, 1, 1});
  CHECK(score_instance("", gold({"x"})) == ScoreVector{0, 0, 0, 0});
}

TEST_CASE("levenshtein equals the recursive oracle", "[metrics][oracle]") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto a = code_points(testing::random_text(rng, 8, kSmallAlphabet));
    const auto b = code_points(testing::random_text(rng, 8, kSmallAlphabet));
    REQUIRE(levenshtein_distance(a, b) == oracle::edit_distance(a, b));
  }
}

TEST_CASE("lcs equals subsequence enumeration", "[metrics][oracle]") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto a = testing::random_words(rng, 10);
    const auto b = testing::random_words(rng, 10);
    REQUIRE(lcs_length(a, b) == oracle::lcs_length(a, b));
  }
}

TEST_CASE("f1 and rouge-l equal their oracles on normalized words", "[metrics][oracle]") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const auto pred = testing::join(testing::random_words(rng, 6, 6));
    const auto g1 = testing::join(testing::random_words(rng, 6, 6));
    const auto g2 = testing::join(testing::random_words(rng, 6, 6));
    const auto gs = gold({g1, g2});
    const auto p = tokenize(normalize(pred));
    double mean = 0.0;
    double best_rouge = 0.0;
    for (const auto& a : gs.answers()) {
      const auto t = tokenize(normalize(a));
      mean += oracle::set_f1(p, t);
      best_rouge = std::max(best_rouge, oracle::lcs_f1(p, t));
    }
    mean /= static_cast<double>(gs.size());
    REQUIRE(token_f1(pred, gs) == Approx(mean).margin(1e-12));
    REQUIRE(rouge_l(pred, gs) == Approx(best_rouge).margin(1e-12));
  }
}

TEST_CASE("levenshtein is a metric", "[metrics][property]") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto a = code_points(testing::random_text(rng, 7, kSmallAlphabet));
    const auto b = code_points(testing::random_text(rng, 7, kSmallAlphabet));
    const auto c = code_points(testing::random_text(rng, 7, kSmallAlphabet));
    REQUIRE(levenshtein_distance(a, b) == levenshtein_distance(b, a));
    REQUIRE((levenshtein_distance(a, b) == 0) == (a == b));
    REQUIRE(levenshtein_distance(a, c) <= levenshtein_distance(a, b) + levenshtein_distance(b, c));
  }
}

TEST_CASE("metric range and single-reference dominance", "[metrics][property]") {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 10000; ++i) {
    const auto pred = testing::random_text(rng, 16);
    std::vector<std::string> answers{testing::random_text(rng, 16)};
    if (i % 3 == 0) answers.push_back(testing::random_text(rng, 16));
    if (i % 5 == 0) answers.push_back(pred);
    const auto gs = gold(answers);
    const auto s = score_instance(pred, gs);
    for (double v : s.values()) REQUIRE((v >= 0.0 && v <= 1.0));
    if (gs.size() == 1 && s.em == 1.0) {
      REQUIRE(s.lev == 1.0);
      REQUIRE(s.f1 == 1.0);
      REQUIRE(s.rouge_l == 1.0);
    }
  }
}

TEST_CASE("single-reference symmetry of f1 and rouge-l", "[metrics][property]") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 2000; ++i) {
    const auto a = testing::random_text(rng, 16);
    const auto b = testing::random_text(rng, 16);
    REQUIRE(token_f1(a, gold({b})) == Approx(token_f1(b, gold({a}))).margin(1e-15));
    REQUIRE(rouge_l(a, gold({b})) == Approx(rouge_l(b, gold({a}))).margin(1e-15));
  }
}

TEST_CASE("weighted average", "[metrics]") {
  const ScoreVector s{0.8, 0.6, 0.4, 0.2};
  CHECK(weighted_average(s, {1, 1, 1, 1, 0}) == Approx(0.5).margin(1e-15));
  CHECK(weighted_average(s, {2, 2, 2, 2, 0}) == Approx(0.5).margin(1e-15));
  CHECK(weighted_average(s, {1, 0, 0, 0, 0}) == Approx(0.8).margin(1e-15));
  CHECK(weighted_average(s, {1, 0, 0, 0, 7}) == Approx(0.8).margin(1e-15));  // intercept ignored
  CHECK_THROWS_WITH(weighted_average(s, {0, 0, 0, 0, 1}), Catch::Matchers::ContainsSubstring("degenerate weights"));

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 100; ++i) {
    const ScoreVector v{unit(rng), unit(rng), unit(rng), unit(rng)};
    const WeightVector w{unit(rng) + 0.1, unit(rng), unit(rng), unit(rng), 0};
    const double c = scale(rng);
    const double base = weighted_average(v, w);
    REQUIRE(std::abs(weighted_average(v, {c * w.w_em, c * w.w_lev, c * w.w_f1, c * w.w_rge, 0}) - base) <= 1e-12);
    const double e = unit(rng) + 0.1;
    REQUIRE(std::abs(weighted_average(v, {e, e, e, e, 0}) - (v.em + v.lev + v.f1 + v.rouge_l) / 4) <= 1e-12);
  }
}

TEST_CASE("aggregate", "[metrics]") {
  const std::vector<ScoreVector> two{{1, 1, 1, 1}, {0, 0, 0, 0}};
  const auto c = aggregate(two);
  CHECK(c.mean == ScoreVector{0.5, 0.5, 0.5, 0.5});
  CHECK(c.question_count == 2);
  CHECK_THROWS_AS(aggregate(std::vector<ScoreVector>{}), xqa::UsageError);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const ScoreVector v{unit(rng), unit(rng), unit(rng), unit(rng)};
    const std::vector<ScoreVector> copies(1 + i % 37, v);
    REQUIRE(aggregate(copies).mean == v);
  }
}
