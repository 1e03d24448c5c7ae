// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/leanscorer.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "mathesis/error.hpp"
#include "oracle_sugeno.hpp"

using namespace mathesis;
using gateway::Rating;
using gateway::RatingVector;
using leanscorer::FuzzyParams;
using leanscorer::Rational;
using leanscorer::Verdict;

namespace {

RatingVector vec(const std::string& letters) {
  RatingVector v;
  for (char c : letters) v.push_back(gateway::rating_from_letter(c));
  return v;
}

const FuzzyParams kDefaults{};

}  // namespace

// ---------------------------------------------------------------------------
// rational_from_decimal
// ---------------------------------------------------------------------------

TEST_CASE("decimal parameters convert to exact rationals") {
  CHECK(leanscorer::rational_from_decimal(0.1) == Rational(1, 10));
  CHECK(leanscorer::rational_from_decimal(0.2) == Rational(1, 5));
  CHECK(leanscorer::rational_from_decimal(0.5) == Rational(1, 2));
  CHECK(leanscorer::rational_from_decimal(0.6) == Rational(3, 5));
  CHECK(leanscorer::rational_from_decimal(1.0) == Rational(1));
  CHECK(leanscorer::rational_from_decimal(0.0) == Rational(0));
  CHECK_THROWS_AS(
      leanscorer::rational_from_decimal(std::numeric_limits<double>::infinity()),
      Error);
}

// ---------------------------------------------------------------------------
// FuzzyParams validation
// ---------------------------------------------------------------------------

TEST_CASE("parameter validation enforces the weight ordering and threshold") {
  FuzzyParams p;
  CHECK_NOTHROW(p.validate());

  FuzzyParams equal_weights;
  equal_weights.f_b = equal_weights.f_a;
  CHECK_THROWS_AS(equal_weights.validate(), Error);

  FuzzyParams inverted;
  inverted.f_c = 0.9;
  CHECK_THROWS_AS(inverted.validate(), Error);

  for (double alpha : {0.0, 1.0, -0.1, 1.5}) {
    FuzzyParams bad;
    bad.alpha = alpha;
    CAPTURE(alpha);
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  FuzzyParams negative_penalty;
  negative_penalty.minor_penalty_single = -0.1;
  CHECK_THROWS_AS(negative_penalty.validate(), Error);
}

// ---------------------------------------------------------------------------
// fuzzy_measure
// ---------------------------------------------------------------------------

TEST_CASE("subset importance hits its pinned values") {
  using leanscorer::fuzzy_measure_exact;
  CHECK(fuzzy_measure_exact(3, 0, 0, 3, kDefaults) == Rational(1));
  CHECK(fuzzy_measure_exact(1, 0, 1, 3, kDefaults) == Rational(0));
  CHECK(fuzzy_measure_exact(2, 0, 0, 3, kDefaults) == Rational(2, 3));
  // One minor inconsistency: shallow slope. (2/4) * (1 - 0.1) = 0.45.
  CHECK(fuzzy_measure_exact(2, 1, 0, 4, kDefaults) == Rational(9, 20));
  // Two minors: steep slope. (1/4) * (1 - 0.4) = 0.15.
  CHECK(fuzzy_measure_exact(1, 2, 0, 4, kDefaults) == Rational(3, 20));
  // The steep slope clamps at zero rather than going negative.
  CHECK(fuzzy_measure_exact(1, 5, 0, 6, kDefaults) == Rational(0));
}

TEST_CASE("subset importance rejects impossible counts") {
  using leanscorer::fuzzy_measure_exact;
  CHECK_THROWS_AS(fuzzy_measure_exact(1, 0, 0, 0, kDefaults), Error);
  CHECK_THROWS_AS(fuzzy_measure_exact(-1, 0, 0, 3, kDefaults), Error);
  CHECK_THROWS_AS(fuzzy_measure_exact(2, 2, 0, 3, kDefaults), Error);
}

TEST_CASE("subset importance is bounded and veto-dominated") {
  using leanscorer::fuzzy_measure_exact;
  for (int n = 1; n <= 6; ++n) {
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; a + b <= n; ++b) {
        for (int c = 0; a + b + c <= n; ++c) {
          const Rational m = fuzzy_measure_exact(a, b, c, n, kDefaults);
          CAPTURE(a);
          CAPTURE(b);
          CAPTURE(c);
          CAPTURE(n);
          CHECK(m >= Rational(0));
          CHECK(m <= Rational(1));
          if (c > 0) CHECK(m == Rational(0));
          // Trading a top rating away never helps.
          if (a > 0) {
            CHECK(fuzzy_measure_exact(a - 1, b, c, n, kDefaults) <= m);
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// sugeno_score
// ---------------------------------------------------------------------------

TEST_CASE("aggregate scores hit their pinned values") {
  CHECK(leanscorer::sugeno_score_exact(vec("AAA"), kDefaults) == Rational(1));
  CHECK(leanscorer::sugeno_score_exact(vec("AAC"), kDefaults) == Rational(0));
  CHECK(leanscorer::sugeno_score_exact(vec("AAAB"), kDefaults) == Rational(3, 4));
  CHECK(leanscorer::sugeno_score_exact(vec("AB"), kDefaults) == Rational(1, 2));
  CHECK(leanscorer::sugeno_score_exact(vec("AABB"), kDefaults) == Rational(1, 2));
  CHECK(leanscorer::sugeno_score_exact(vec("ABB"), kDefaults) == Rational(1, 3));
  CHECK(leanscorer::sugeno_score_exact(vec("AAB"), kDefaults) == Rational(2, 3));
  // A lone minor inconsistency scores zero: the subset importance counts
  // only perfect ratings, so no prefix ever clears the weight floor.
  CHECK(leanscorer::sugeno_score_exact(vec("B"), kDefaults) == Rational(0));
  CHECK(leanscorer::sugeno_score_exact(vec("C"), kDefaults) == Rational(0));

  CHECK(leanscorer::sugeno_score(vec("AAAB"), kDefaults) == 0.75);
  CHECK(leanscorer::sugeno_score(vec("AAA"), kDefaults) == 1.0);
}

TEST_CASE("empty rating vectors are refused") {
  CHECK_THROWS_AS(leanscorer::sugeno_score_exact(RatingVector{}, kDefaults),
                  Error);
}

TEST_CASE("the aggregate agrees with the brute-force reference everywhere") {
  const auto vectors = testing::all_rating_vectors(6);
  CHECK(vectors.size() == 1092);
  for (const RatingVector& v : vectors) {
    const Rational fast = leanscorer::sugeno_score_exact(v, kDefaults);
    const testing::Rat slow = testing::oracle_sugeno(v, kDefaults);
    CHECK(fast.numerator() == slow.numerator());
    CHECK(fast.denominator() == slow.denominator());
  }
}

TEST_CASE("scores are permutation invariant") {
  RatingVector v = vec("AABBC");
  std::sort(v.begin(), v.end());
  do {
    CHECK(leanscorer::sugeno_score_exact(v, kDefaults) ==
          leanscorer::sugeno_score_exact(vec("AABBC"), kDefaults));
  } while (std::next_permutation(v.begin(), v.end()));
}

TEST_CASE("degrading any single rating never raises the score") {
  for (const RatingVector& v : testing::all_rating_vectors(5)) {
    const Rational base = leanscorer::sugeno_score_exact(v, kDefaults);
    for (size_t i = 0; i < v.size(); ++i) {
      if (v[i] == Rating::C) continue;
      RatingVector worse = v;
      worse[i] = (v[i] == Rating::A) ? Rating::B : Rating::C;
      CHECK(leanscorer::sugeno_score_exact(worse, kDefaults) <= base);
    }
  }
}

TEST_CASE("a perfect score needs every rating to be perfect") {
  for (const RatingVector& v : testing::all_rating_vectors(5)) {
    const bool all_a =
        std::all_of(v.begin(), v.end(), [](Rating r) { return r == Rating::A; });
    CHECK((leanscorer::sugeno_score_exact(v, kDefaults) == Rational(1)) == all_a);
  }
}

TEST_CASE("custom parameters flow through the aggregation") {
  FuzzyParams params;
  params.f_b = 0.4;
  params.minor_penalty_single = 0.25;
  // [A, B]: prefix {A} gives min(1, 1/2); prefix {A, B} gives
  // min(0.4, (1/2)(1 - 0.25)) = min(2/5, 3/8) = 3/8. Max is 1/2.
  CHECK(leanscorer::sugeno_score_exact(vec("AB"), params) == Rational(1, 2));
  // [A, B, B, B]: best prefix is {A} at min(1, 1/4) = 1/4.
  CHECK(leanscorer::sugeno_score_exact(vec("ABBB"), params) == Rational(1, 4));
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

TEST_CASE("classification accepts exactly at the threshold") {
  CHECK(leanscorer::classify(0.6, kDefaults) == Verdict::Accept);
  CHECK(leanscorer::classify(0.75, kDefaults) == Verdict::Accept);
  CHECK(leanscorer::classify(0.5999, kDefaults) == Verdict::Reject);
  CHECK(leanscorer::classify(0.0, kDefaults) == Verdict::Reject);

  // A vector whose exact score equals the threshold: three perfect ratings
  // out of five stop at 3/5 = 0.6.
  CHECK(leanscorer::sugeno_score_exact(vec("AAABB"), kDefaults) ==
        Rational(3, 5));
  CHECK(leanscorer::classify(leanscorer::sugeno_score(vec("AAABB"), kDefaults),
                             kDefaults) == Verdict::Accept);
}

// ---------------------------------------------------------------------------
// score_formalization
// ---------------------------------------------------------------------------

namespace {

// A judge double that returns canned stage outputs and records the prompts it
// was asked to complete.
class FakeJudge final : public gateway::Backend {
 public:
  FakeJudge(std::string decompose, std::string evaluate)
      : gateway::Backend(make_config(), std::make_shared<FixedClock>(0)),
        decompose_(std::move(decompose)),
        evaluate_(std::move(evaluate)) {}

  std::vector<std::string> template_ids;
  std::vector<std::string> prompts;

 protected:
  RawResponse complete_raw(const std::string& template_id,
                           const std::string& prompt) override {
    template_ids.push_back(template_id);
    prompts.push_back(prompt);
    return {template_id == "leanscorer_decompose" ? decompose_ : evaluate_,
            std::nullopt, std::nullopt};
  }

 private:
  static gateway::BackendConfig make_config() {
    gateway::BackendConfig cfg;
    cfg.name = "fake_judge";
    return cfg;
  }

  std::string decompose_;
  std::string evaluate_;
};

}  // namespace

TEST_CASE("two-stage scoring wires the judge stages together") {
  const std::string conditions =
      "### Mathematical conditions:\n1. n is a natural number.\n"
      "### Question:\nShow n = n.";
  const std::string evaluation =
      "### Step 1\nConsistency Rating: \\box{Perfectly Match}\n"
      "### Step 2\nConsistency Rating: \\box{Minor Inconsistency}\n";
  FakeJudge judge(conditions, evaluation);

  const leanscorer::LeanScore score = leanscorer::score_formalization(
      "informal text", "theorem t (n : ℕ) : n = n := by sorry", judge,
      kDefaults);

  REQUIRE(judge.template_ids.size() == 2);
  CHECK(judge.template_ids[0] == "leanscorer_decompose");
  CHECK(judge.template_ids[1] == "leanscorer_evaluate");
  CHECK(judge.prompts[0].find("informal text") != std::string::npos);
  // The second stage sees the informal text, the first stage's decomposition,
  // and the formal statement under review.
  CHECK(judge.prompts[1].find("informal text") != std::string::npos);
  CHECK(judge.prompts[1].find(conditions) != std::string::npos);
  CHECK(judge.prompts[1].find("theorem t (n : ℕ) : n = n := by sorry") !=
        std::string::npos);

  CHECK(score.ratings == RatingVector{Rating::A, Rating::B});
  CHECK(score.score == 0.5);
  CHECK(score.verdict == Verdict::Reject);
  CHECK(score.decomposition_text == conditions);
  CHECK(score.evaluation_text == evaluation);
}

TEST_CASE("a tagless evaluation surfaces as a scoring failure") {
  FakeJudge judge("conditions", "no tags in this response");
  try {
    leanscorer::score_formalization("informal", "formal", judge, kDefaults);
    FAIL("expected an exception");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::ScoringFailed);
  }
}

TEST_CASE("an unknown rating label propagates unchanged") {
  FakeJudge judge("conditions", "\\box{Mostly Fine}");
  try {
    leanscorer::score_formalization("informal", "formal", judge, kDefaults);
    FAIL("expected an exception");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::UnknownRatingLabel);
  }
}

TEST_CASE("the verdict uses exact arithmetic at the acceptance boundary") {
  // Score 3/5 equals the 0.6 threshold exactly and must be accepted.
  FakeJudge judge("conditions",
                  "\\box{Perfectly Match}\\box{Perfectly Match}"
                  "\\box{Perfectly Match}\\box{Minor Inconsistency}"
                  "\\box{Minor Inconsistency}");
  const leanscorer::LeanScore score =
      leanscorer::score_formalization("informal", "formal", judge, kDefaults);
  CHECK(score.score == 0.6);
  CHECK(score.verdict == Verdict::Accept);
}
