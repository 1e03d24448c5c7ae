// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mathesis/error.hpp"
#include "mathesis/gateway.hpp"
#include "mathesis/verifier.hpp"

namespace mathesis::rewards {

// Binary reward for the semantic check: 1 iff the judge found the
// formalization appropriate.
inline int semantic_reward(gateway::Judgement judgement) {
  return judgement == gateway::Judgement::Appropriate ? 1 : 0;
}

// Binary reward for the toolchain check: 1 iff the statement compiled.
inline int verification_reward(const verifier::VerificationOutcome& outcome) {
  return outcome.status == verifier::CheckStatus::Pass ? 1 : 0;
}

// Total reward in {0, 1, 2}; both inputs must be binary.
inline int composite_reward(int r_sem, int r_ver) {
  if ((r_sem != 0 && r_sem != 1) || (r_ver != 0 && r_ver != 1)) {
    throw Error(Errc::InvalidCounts, "rewards must be 0 or 1");
  }
  return r_sem + r_ver;
}

struct GroupStats {
  int group_size = 0;
  double mean = 0.0;
  double std_dev = 0.0;   // population standard deviation
  bool zero_variance = false;
};

// Population statistics over one sampling group's rewards. zero_variance is
// decided exactly (all rewards equal), not through floating-point round-off.
inline GroupStats group_reward_stats(const std::vector<int>& rewards) {
  if (rewards.empty()) {
    throw Error(Errc::EmptyGroup, "reward group is empty");
  }
  GroupStats stats;
  stats.group_size = static_cast<int>(rewards.size());
  long long sum = 0;
  long long sum_sq = 0;
  for (int r : rewards) {
    sum += r;
    sum_sq += static_cast<long long>(r) * r;
  }
  const auto n = static_cast<long long>(rewards.size());
  stats.mean = static_cast<double>(sum) / static_cast<double>(n);
  const long long var_numer = n * sum_sq - sum * sum;  // n^2 * variance
  stats.zero_variance = (var_numer == 0);
  stats.std_dev = stats.zero_variance
                      ? 0.0
                      : std::sqrt(static_cast<double>(var_numer)) /
                            static_cast<double>(n);
  return stats;
}

// Keeps the problems whose groups still carry a learning signal: every group
// where the rewards are not all identical. Order is preserved.
inline std::vector<std::string> zero_variance_filter(
    const std::vector<std::pair<std::string, GroupStats>>& groups) {
  std::vector<std::string> retained;
  for (const auto& [problem_id, stats] : groups) {
    if (!stats.zero_variance) retained.push_back(problem_id);
  }
  return retained;
}

}  // namespace mathesis::rewards
