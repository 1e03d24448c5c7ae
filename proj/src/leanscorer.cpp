// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/leanscorer.hpp"

#include <algorithm>
#include <cmath>

#include "mathesis/error.hpp"

namespace mathesis::leanscorer {

Rational rational_from_decimal(double value) {
  if (!std::isfinite(value)) {
    throw Error(Errc::InvalidCounts, "non-finite parameter");
  }
  constexpr long long kScale = 1'000'000'000LL;
  const double scaled = std::round(value * static_cast<double>(kScale));
  return Rational(static_cast<long long>(scaled), kScale);
}

void FuzzyParams::validate() const {
  if (!(f_a <= 1.0 && f_a > f_b && f_b > f_c && f_c >= 0.0)) {
    throw Error(Errc::InvalidCounts, "rating weights must satisfy 1 >= f_a > f_b > f_c >= 0");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(Errc::InvalidCounts, "alpha must lie strictly between 0 and 1");
  }
  if (minor_penalty_single < 0.0 || minor_penalty_multi < 0.0) {
    throw Error(Errc::InvalidCounts, "penalties must be non-negative");
  }
}

Rational fuzzy_measure_exact(int count_a, int count_b, int count_c, int n,
                             const FuzzyParams& params) {
  params.validate();
  if (n < 1 || count_a < 0 || count_b < 0 || count_c < 0 ||
      count_a + count_b + count_c > n) {
    throw Error(Errc::InvalidCounts, "rating counts out of range");
  }
  if (count_c > 0) return Rational(0);
  if (count_a == n) return Rational(1);

  const Rational share(count_a, n);
  if (count_b >= 2) {
    const Rational penalty =
        Rational(1) - rational_from_decimal(params.minor_penalty_multi) * count_b;
    return std::max(share * penalty, Rational(0));
  }
  const Rational penalty =
      Rational(1) - rational_from_decimal(params.minor_penalty_single) * count_b;
  return share * penalty;
}

double fuzzy_measure(int count_a, int count_b, int count_c, int n,
                     const FuzzyParams& params) {
  return boost::rational_cast<double>(
      fuzzy_measure_exact(count_a, count_b, count_c, n, params));
}

Rational sugeno_score_exact(const RatingVector& ratings,
                            const FuzzyParams& params) {
  params.validate();
  if (ratings.empty()) {
    throw Error(Errc::InvalidCounts, "empty rating vector");
  }
  // A single major inconsistency anywhere rejects the whole formalization.
  for (Rating r : ratings) {
    if (r == Rating::C) return Rational(0);
  }

  const int n = static_cast<int>(ratings.size());
  const Rational weight_a = rational_from_decimal(params.f_a);
  const Rational weight_b = rational_from_decimal(params.f_b);

  // Only A and B ratings remain. Descending weight order puts every A in
  // front of every B, so prefixes are fully described by their counts.
  int total_a = 0;
  for (Rating r : ratings) {
    if (r == Rating::A) ++total_a;
  }

  Rational best(0);
  int prefix_a = 0;
  int prefix_b = 0;
  for (int i = 1; i <= n; ++i) {
    if (prefix_a < total_a) {
      ++prefix_a;
    } else {
      ++prefix_b;
    }
    const Rational weight = (prefix_b == 0) ? weight_a : weight_b;
    const Rational measure =
        fuzzy_measure_exact(prefix_a, prefix_b, 0, n, params);
    best = std::max(best, std::min(weight, measure));
  }
  return best;
}

double sugeno_score(const RatingVector& ratings, const FuzzyParams& params) {
  return boost::rational_cast<double>(sugeno_score_exact(ratings, params));
}

Verdict classify(double score, const FuzzyParams& params) {
  params.validate();
  return score >= params.alpha ? Verdict::Accept : Verdict::Reject;
}

LeanScore score_formalization(const std::string& informal,
                              const std::string& formal,
                              gateway::Backend& judge,
                              const FuzzyParams& params) {
  params.validate();

  gateway::ChatExchange decompose = judge.complete(
      "leanscorer_decompose",
      gateway::render_prompt("leanscorer_decompose",
                             {{"informal_statement", informal}}));

  gateway::ChatExchange evaluate = judge.complete(
      "leanscorer_evaluate",
      gateway::render_prompt("leanscorer_evaluate",
                             {{"informal_statement", informal},
                              {"math_conditions", decompose.response_text},
                              {"formal_statement", formal}}));

  LeanScore result;
  result.decomposition_text = decompose.response_text;
  result.evaluation_text = evaluate.response_text;
  try {
    result.ratings = gateway::parse_ratings(evaluate.response_text);
  } catch (const Error& err) {
    if (err.code() == Errc::NoRatingsFound) {
      throw Error(Errc::ScoringFailed,
                  "evaluation response carries no ratings: " +
                      std::string(err.what()));
    }
    throw;
  }
  const Rational exact = sugeno_score_exact(result.ratings, params);
  result.score = boost::rational_cast<double>(exact);
  result.verdict = exact >= rational_from_decimal(params.alpha)
                       ? Verdict::Accept
                       : Verdict::Reject;
  return result;
}

}  // namespace mathesis::leanscorer
