// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mathesis/pipeline.hpp"

namespace mathesis::dpo {

// Which failed candidates are eligible as rejected completions.
enum class LoserPolicy {
  All,           // any candidate that failed validation
  CompiledOnly,  // only failed candidates whose statement still compiled
};

// One preference pair: for a problem whose run succeeded, the selected
// (winning) formalization against one candidate that failed validation.
struct PreferenceTuple {
  std::string problem_id;
  std::string informal;  // the natural-language statement
  std::string winner;
  std::string loser;
  int winner_index = 0;
  int loser_index = 0;
  double winner_score = 0.0;
  std::string loser_status;  // why the loser failed validation
  std::optional<std::string> loser_proof;  // last failed proof attempt, when any
};

// Walks the ledger and extracts preference pairs. Winners come only from
// records whose outcome is Proved; losers are that record's validation
// failures in ascending index order, at most `cap_per_problem` per problem.
// Pairs are de-duplicated on (problem_id, winner, loser) and candidates with
// empty statements (nothing was extracted) are skipped.
std::vector<PreferenceTuple> extract_preferences(
    const std::vector<pipeline::AttemptRecord>& records,
    LoserPolicy policy = LoserPolicy::All, int cap_per_problem = 1);

nlohmann::ordered_json tuple_to_json(const PreferenceTuple& tuple);

// Writes one JSON object per line, sorted by (problem_id, loser_index).
void emit_dpo_dataset(const std::vector<PreferenceTuple>& tuples,
                      const std::filesystem::path& out_path);

// Reward-group curation summary for a ledger: per-problem reward statistics
// plus which problems a zero-variance filter would retain or drop.
nlohmann::ordered_json curation_report(
    const std::vector<pipeline::AttemptRecord>& records);

}  // namespace mathesis::dpo
