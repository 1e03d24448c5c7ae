// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <boost/rational.hpp>

#include "mathesis/gateway.hpp"

namespace mathesis::leanscorer {

using gateway::Rating;
using gateway::RatingVector;

// Exact arithmetic for the score computation; converted to double only at
// the reporting boundary.
using Rational = boost::rational<long long>;

// Converts a decimal-valued double (e.g. 0.1, 0.6) to an exact rational with
// denominator 10^9, normalized. Throws Error(InvalidCounts) for non-finite
// input.
Rational rational_from_decimal(double value);

struct FuzzyParams {
  double f_a = 1.0;   // weight of a "perfectly match" rating
  double f_b = 0.5;   // weight of a "minor inconsistency" rating
  double f_c = 0.0;   // weight of a "major inconsistency" rating
  double minor_penalty_single = 0.1;  // |B| = 1 penalty slope
  double minor_penalty_multi = 0.2;   // |B| >= 2 penalty slope
  double alpha = 0.6;  // acceptance threshold, inclusive

  // Enforces 1 >= f_a > f_b > f_c >= 0 and 0 < alpha < 1.
  void validate() const;  // throws Error(InvalidCounts)
};

enum class Verdict { Accept, Reject };

struct LeanScore {
  double score = 0.0;  // in [0, 1]
  Verdict verdict = Verdict::Reject;
  RatingVector ratings;
  std::string decomposition_text;  // stage-1 judge output, verbatim
  std::string evaluation_text;     // stage-2 judge output, verbatim
};

// Importance of a subset of subtask ratings, given as counts out of n total
// subtasks. Branch order: any major inconsistency vetoes the subset; the full
// all-perfect set has measure one; two or more minor inconsistencies use the
// steeper penalty clamped at zero; otherwise the shallow penalty (which is a
// no-op when the subset holds no minor ratings).
// Preconditions: n >= 1, counts >= 0, count_a+count_b+count_c <= n; violations
// throw Error(InvalidCounts).
Rational fuzzy_measure_exact(int count_a, int count_b, int count_c, int n,
                             const FuzzyParams& params);
double fuzzy_measure(int count_a, int count_b, int count_c, int n,
                     const FuzzyParams& params);

// Aggregates one rating vector into a score in [0, 1]:
// a vector containing any major inconsistency scores zero outright; otherwise
// ratings are sorted by weight (descending), and the score is the maximum over
// prefixes of min(prefix's last weight, measure of the prefix).
// Precondition: non-empty vector (Error(InvalidCounts) otherwise).
Rational sugeno_score_exact(const RatingVector& ratings,
                            const FuzzyParams& params);
double sugeno_score(const RatingVector& ratings, const FuzzyParams& params);

// Accept iff score >= params.alpha (inclusive).
Verdict classify(double score, const FuzzyParams& params);

// Two-stage judged scoring of one (informal, formal) statement pair:
// stage 1 asks the judge backend to decompose the informal statement into
// conditions and conclusions; stage 2 asks it to rate the formal statement
// against that decomposition, one boxed tag per subtask. The tags are parsed,
// aggregated, and classified. A stage-2 response with no tags surfaces as
// Error(ScoringFailed); transport and template errors propagate unchanged.
LeanScore score_formalization(const std::string& informal,
                              const std::string& formal,
                              gateway::Backend& judge,
                              const FuzzyParams& params);

}  // namespace mathesis::leanscorer
