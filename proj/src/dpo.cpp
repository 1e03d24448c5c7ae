// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/dpo.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>
#include <utility>

#include "mathesis/error.hpp"
#include "mathesis/prompts.hpp"
#include "mathesis/rewards.hpp"

namespace mathesis::dpo {

namespace {

std::string loser_status_for(const pipeline::CandidateRecord& candidate) {
  if (!candidate.lean_check.passed()) {
    return std::string(verifier::check_status_name(candidate.lean_check.status));
  }
  if (!candidate.lints.clean()) {
    return "lint_flagged";
  }
  if (!candidate.lean_score) {
    return "unscored";
  }
  return "score_rejected";
}

std::optional<std::string> last_failed_proof(const pipeline::AttemptRecord& record) {
  std::optional<std::string> proof;
  for (const pipeline::ProofAttempt& attempt : record.proof_attempts) {
    if (!attempt.succeeded() && !attempt.proof.empty()) {
      proof = attempt.proof;
    }
  }
  return proof;
}

}  // namespace

std::vector<PreferenceTuple> extract_preferences(
    const std::vector<pipeline::AttemptRecord>& records, LoserPolicy policy,
    int cap_per_problem) {
  if (cap_per_problem < 0) {
    throw Error(Errc::InvalidCounts, "cap_per_problem must be non-negative");
  }

  std::vector<PreferenceTuple> tuples;
  std::set<std::tuple<std::string, std::string, std::string>> seen;

  for (const pipeline::AttemptRecord& record : records) {
    if (record.outcome != pipeline::ProblemOutcome::Proved || !record.selected_index) {
      continue;
    }
    const auto sel = static_cast<std::size_t>(*record.selected_index);
    if (sel >= record.candidates.size()) {
      continue;
    }
    const pipeline::CandidateRecord& winner = record.candidates[sel];
    if (!winner.validation_passed() || winner.statement.empty()) {
      continue;
    }

    const std::optional<std::string> failed_proof = last_failed_proof(record);
    int emitted = 0;
    for (const pipeline::CandidateRecord& candidate : record.candidates) {
      if (cap_per_problem > 0 && emitted >= cap_per_problem) {
        break;
      }
      if (candidate.index == winner.index || candidate.validation_passed()) {
        continue;
      }
      if (candidate.statement.empty()) {
        continue;  // nothing was extracted; there is no rejected completion
      }
      if (policy == LoserPolicy::CompiledOnly && !candidate.lean_check.passed()) {
        continue;
      }
      if (candidate.statement == winner.statement) {
        continue;
      }
      if (!seen.insert({record.problem_id, winner.statement, candidate.statement})
               .second) {
        continue;
      }

      PreferenceTuple tuple;
      tuple.problem_id = record.problem_id;
      tuple.informal = record.problem_text;
      tuple.winner = winner.statement;
      tuple.loser = candidate.statement;
      tuple.winner_index = winner.index;
      tuple.loser_index = candidate.index;
      tuple.winner_score = winner.lean_score ? winner.lean_score->score : 0.0;
      tuple.loser_status = loser_status_for(candidate);
      tuple.loser_proof = failed_proof;
      tuples.push_back(std::move(tuple));
      ++emitted;
    }
  }
  return tuples;
}

nlohmann::ordered_json tuple_to_json(const PreferenceTuple& tuple) {
  nlohmann::ordered_json meta{
      {"problem_id", tuple.problem_id},
      {"winner_index", tuple.winner_index},
      {"loser_index", tuple.loser_index},
      {"winner_score", tuple.winner_score},
      {"loser_status", tuple.loser_status},
  };
  if (tuple.loser_proof) {
    meta["loser_proof"] = *tuple.loser_proof;
  }
  return nlohmann::ordered_json{
      {"prompt",
       gateway::render_prompt("autoformalize_generic", {{"statement", tuple.informal}})},
      {"chosen", tuple.winner},
      {"rejected", tuple.loser},
      {"meta", std::move(meta)},
  };
}

void emit_dpo_dataset(const std::vector<PreferenceTuple>& tuples,
                      const std::filesystem::path& out_path) {
  std::vector<PreferenceTuple> ordered = tuples;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const PreferenceTuple& a, const PreferenceTuple& b) {
                     if (a.problem_id != b.problem_id) {
                       return a.problem_id < b.problem_id;
                     }
                     return a.loser_index < b.loser_index;
                   });

  if (out_path.has_parent_path()) {
    std::filesystem::create_directories(out_path.parent_path());
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(Errc::IoError, "cannot open output file: " + out_path.string());
  }
  for (const PreferenceTuple& tuple : ordered) {
    out << tuple_to_json(tuple).dump() << '\n';
  }
}

nlohmann::ordered_json curation_report(
    const std::vector<pipeline::AttemptRecord>& records) {
  nlohmann::ordered_json problems = nlohmann::ordered_json::array();
  std::vector<std::pair<std::string, rewards::GroupStats>> groups;

  for (const pipeline::AttemptRecord& record : records) {
    std::vector<int> totals;
    nlohmann::ordered_json reward_list = nlohmann::ordered_json::array();
    for (const pipeline::CandidateReward& reward : record.rewards) {
      totals.push_back(reward.r_total);
      reward_list.push_back(reward.r_total);
    }

    rewards::GroupStats stats;
    if (record.reward_stats) {
      stats = *record.reward_stats;
    } else if (!totals.empty()) {
      stats = rewards::group_reward_stats(totals);
    } else {
      continue;  // nothing to curate for a record without candidates
    }
    groups.emplace_back(record.problem_id, stats);

    problems.push_back(nlohmann::ordered_json{
        {"problem_id", record.problem_id},
        {"rewards", std::move(reward_list)},
        {"group_size", static_cast<int>(stats.group_size)},
        {"mean", stats.mean},
        {"std_dev", stats.std_dev},
        {"zero_variance", stats.zero_variance},
    });
  }

  const std::vector<std::string> retained = rewards::zero_variance_filter(groups);
  std::set<std::string> retained_set(retained.begin(), retained.end());
  nlohmann::ordered_json dropped = nlohmann::ordered_json::array();
  for (const auto& [id, stats] : groups) {
    if (retained_set.find(id) == retained_set.end()) {
      dropped.push_back(id);
    }
  }

  return nlohmann::ordered_json{
      {"schema", "mathesis-curation/1"},
      {"problems", std::move(problems)},
      {"retained", retained},
      {"dropped", std::move(dropped)},
  };
}

}  // namespace mathesis::dpo
