// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mathesis/gateway.hpp"
#include "mathesis/leanscorer.hpp"
#include "mathesis/problems.hpp"
#include "mathesis/rewards.hpp"
#include "mathesis/util.hpp"
#include "mathesis/verifier.hpp"

namespace mathesis::pipeline {

// Knobs for a full formalize -> validate -> prove run.
struct PipelineConfig {
  int sample_budget = 6;    // formalization candidates requested per problem
  int prover_budget = 32;   // proof attempts allowed per problem
  double alpha = 0.6;       // semantic acceptance threshold
  int concurrency = 1;      // worker threads across problems
  long long seed = 0;       // echoed into run artifacts
  std::string autoformalize_template = "autoformalize_generic";

  void validate() const;
};

// One formalization candidate, as recorded in the ledger. `lean_score` is
// present only when the candidate compiled cleanly and carried no lint flags;
// `exchange` is absent when the backend call itself failed.
struct CandidateRecord {
  int index = 0;
  std::string statement;
  verifier::VerificationOutcome lean_check;
  verifier::LintReport lints;
  std::optional<leanscorer::LeanScore> lean_score;
  std::optional<gateway::ChatExchange> exchange;

  // True when the candidate compiled, carried no lint flags, and the
  // semantic verdict (computed against the acceptance threshold in exact
  // arithmetic at scoring time) is Accept.
  bool validation_passed() const;
};

// One proof attempt against the selected formal statement.
struct ProofAttempt {
  int index = 0;
  std::string proof;
  verifier::VerificationOutcome outcome;
  verifier::LintReport lints;
  std::optional<gateway::ChatExchange> exchange;

  bool succeeded() const { return outcome.passed() && lints.clean(); }
};

enum class ProblemOutcome {
  Proved,             // some attempt compiled with no lint flags
  ProverExhausted,    // a statement was selected but the budget ran out
  NoViableCandidate,  // no candidate survived validation
};

std::string_view problem_outcome_name(ProblemOutcome outcome);
ProblemOutcome problem_outcome_from_name(std::string_view name);

// Per-candidate reward row: r_sem (semantic acceptance), r_ver (compiled),
// and their sum.
struct CandidateReward {
  int index = 0;
  int r_sem = 0;
  int r_ver = 0;
  int r_total = 0;
};

// Everything the run knows about one problem, in processing order. This is
// the unit serialized to the ledger; downstream tools (eval, dpo-gen) work
// from a sequence of these records alone.
struct AttemptRecord {
  std::string problem_id;
  std::string problem_text;
  std::string category;
  std::string timestamp;  // RFC 3339, from the injected clock
  std::vector<CandidateRecord> candidates;
  std::optional<int> selected_index;
  std::vector<ProofAttempt> proof_attempts;
  ProblemOutcome outcome = ProblemOutcome::NoViableCandidate;
  std::vector<CandidateReward> rewards;
  std::optional<rewards::GroupStats> reward_stats;
  double wall_time_ms = 0.0;
};

// Non-owning role bindings. All four roles must be non-null for
// run_end_to_end; individual stages require only the roles they call.
struct RoleBindings {
  gateway::Backend* autoformalizer = nullptr;
  gateway::Backend* prover = nullptr;
  gateway::Backend* semantic_judge = nullptr;
  gateway::Backend* leanscorer_judge = nullptr;
};

struct ProveResult {
  std::vector<ProofAttempt> attempts;
  bool proved = false;
};

struct RunSummary {
  int total = 0;
  int proved = 0;
  int prover_exhausted = 0;
  int no_viable_candidate = 0;
  nlohmann::ordered_json to_json(const nlohmann::ordered_json& config_echo,
                                 long long seed) const;
  // Filled by run_end_to_end: category -> {proved, prover_exhausted,
  // no_viable_candidate, total}.
  std::vector<std::pair<std::string, std::array<int, 4>>> per_category;
};

class Pipeline {
 public:
  Pipeline(PipelineConfig config, RoleBindings roles, verifier::LeanVerifier& verifier,
           leanscorer::FuzzyParams fuzzy, ClockPtr clock = system_clock_ptr());

  // Samples `sample_budget` candidates for one problem. Backend transport
  // failures become ToolFailure candidates; responses without extractable
  // Lean code become CompileError candidates. Candidates that compile and
  // lint clean are scored; flagged or broken candidates are never scored.
  std::vector<CandidateRecord> formalize_candidates(const bench::Problem& problem);

  // Index of the best acceptable candidate: highest score among candidates
  // whose validation fully passed, ties resolved to the lowest index.
  static std::optional<int> select_best(const std::vector<CandidateRecord>& candidates);

  // Runs proof attempts until one compiles with no lint flags or the budget
  // is exhausted. Transport failures consume an attempt and are recorded.
  ProveResult prove_with_budget(const std::string& formal_statement,
                                const std::string& problem_id);

  // Full pass over one problem: formalize, validate, select, prove.
  AttemptRecord process_problem(const bench::Problem& problem);

  // Processes every problem with `concurrency` workers, appending ledger
  // records in input order. Returns outcome counts.
  RunSummary run_end_to_end(const std::vector<bench::Problem>& problems,
                            const std::filesystem::path& ledger_path);

  const PipelineConfig& config() const { return config_; }

 private:
  PipelineConfig config_;
  RoleBindings roles_;
  verifier::LeanVerifier& verifier_;
  leanscorer::FuzzyParams fuzzy_;
  ClockPtr clock_;
};

}  // namespace mathesis::pipeline
