// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mathesis/pipeline.hpp"
#include "mathesis/problems.hpp"

namespace mathesis::bench {

// Expected fraction of problems solved when k attempts are drawn and c of
// the k sampled candidates are correct: 1 - (1 - c/k)^k. Requires k >= 1 and
// 0 <= c <= k (Error(InvalidCounts) otherwise).
double success_rate_at_k(int correct, int k);

// Per-slice evaluation numbers. `lc_at_k` counts candidates that compiled;
// `lsc_at_k` counts candidates that passed full validation (compiled, no
// lint flags, semantic verdict Accept); `proved_fraction` is the plain share
// of problems whose run outcome was Proved.
struct SliceMetrics {
  std::string label;
  int problems = 0;
  double lc_at_k = 0.0;
  double lsc_at_k = 0.0;
  double proved_fraction = 0.0;
};

struct EvalReport {
  int k = 0;
  SliceMetrics overall;
  std::vector<SliceMetrics> per_category;
};

// Builds the evaluation report for a ledger. Every ledger record must match
// a problem id from `problems` (Error(UnknownProblemId) otherwise); problems
// without a ledger record contribute zeros to their slice. `k` defaults to
// the maximum candidate count observed in the ledger.
EvalReport aggregate_report(const std::vector<pipeline::AttemptRecord>& records,
                            const std::vector<Problem>& problems,
                            std::optional<int> k = std::nullopt);

nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

// Confusion counts between a cheap checker's predictions and reference
// labels. Ratios are absent when their denominator is zero.
struct CheckerAgreement {
  int true_positive = 0;
  int false_positive = 0;
  int false_negative = 0;
  int true_negative = 0;
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
};

// Throws Error(LengthMismatch) when the vectors differ in size and
// Error(InvalidCounts) when they are empty.
CheckerAgreement checker_agreement(const std::vector<bool>& predictions,
                                   const std::vector<bool>& labels);

}  // namespace mathesis::bench
