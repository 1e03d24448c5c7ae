// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

#include "mathesis/error.hpp"
#include "mathesis/ledger.hpp"
#include "mathesis/prompts.hpp"

namespace mathesis::pipeline {

namespace {

verifier::Diagnostic error_diagnostic(const std::string& message) {
  verifier::Diagnostic diag;
  diag.severity = "error";
  diag.message = message;
  diag.line = 0;
  return diag;
}

gateway::Backend& require_role(gateway::Backend* backend, const char* role) {
  if (backend == nullptr) {
    throw Error(Errc::ConfigError, std::string("role not bound: ") + role);
  }
  return *backend;
}

bool template_declares(const gateway::PromptTemplate& tpl, std::string_view name) {
  return std::find(tpl.placeholders.begin(), tpl.placeholders.end(), name) !=
         tpl.placeholders.end();
}

}  // namespace

void PipelineConfig::validate() const {
  if (sample_budget < 1) {
    throw Error(Errc::ConfigError, "sample_budget must be at least 1");
  }
  if (prover_budget < 1) {
    throw Error(Errc::ConfigError, "prover_budget must be at least 1");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(Errc::ConfigError, "alpha must lie strictly between 0 and 1");
  }
  if (concurrency < 1) {
    throw Error(Errc::ConfigError, "concurrency must be at least 1");
  }
  // Fails early when the template id does not exist.
  gateway::find_template(autoformalize_template);
}

bool CandidateRecord::validation_passed() const {
  return lean_check.passed() && lints.clean() && lean_score.has_value() &&
         lean_score->verdict == leanscorer::Verdict::Accept;
}

std::string_view problem_outcome_name(ProblemOutcome outcome) {
  switch (outcome) {
    case ProblemOutcome::Proved: return "proved";
    case ProblemOutcome::ProverExhausted: return "prover_exhausted";
    case ProblemOutcome::NoViableCandidate: return "no_viable_candidate";
  }
  return "no_viable_candidate";
}

ProblemOutcome problem_outcome_from_name(std::string_view name) {
  for (ProblemOutcome outcome :
       {ProblemOutcome::Proved, ProblemOutcome::ProverExhausted,
        ProblemOutcome::NoViableCandidate}) {
    if (problem_outcome_name(outcome) == name) {
      return outcome;
    }
  }
  throw Error(Errc::LedgerSchemaError,
              "unknown problem outcome '" + std::string(name) + "'");
}

nlohmann::ordered_json RunSummary::to_json(const nlohmann::ordered_json& config_echo,
                                           long long seed) const {
  nlohmann::ordered_json categories = nlohmann::ordered_json::array();
  for (const auto& [category, counts] : per_category) {
    categories.push_back(nlohmann::ordered_json{
        {"category", category},
        {"proved", counts[0]},
        {"prover_exhausted", counts[1]},
        {"no_viable_candidate", counts[2]},
        {"total", counts[3]},
    });
  }
  return nlohmann::ordered_json{
      {"schema", "mathesis-run-summary/1"},
      {"seed", seed},
      {"total_problems", total},
      {"outcomes",
       nlohmann::ordered_json{
           {"proved", proved},
           {"prover_exhausted", prover_exhausted},
           {"no_viable_candidate", no_viable_candidate},
       }},
      {"per_category", std::move(categories)},
      {"config", config_echo},
  };
}

Pipeline::Pipeline(PipelineConfig config, RoleBindings roles,
                   verifier::LeanVerifier& verifier, leanscorer::FuzzyParams fuzzy,
                   ClockPtr clock)
    : config_(std::move(config)),
      roles_(roles),
      verifier_(verifier),
      fuzzy_(fuzzy),
      clock_(std::move(clock)) {
  config_.validate();
  fuzzy_.validate();
  fuzzy_.alpha = config_.alpha;
  if (!clock_) {
    throw Error(Errc::ConfigError, "pipeline requires a clock");
  }
}

std::vector<CandidateRecord> Pipeline::formalize_candidates(const bench::Problem& problem) {
  gateway::Backend& formalizer = require_role(roles_.autoformalizer, "autoformalizer");
  gateway::Backend& judge = require_role(roles_.leanscorer_judge, "leanscorer_judge");

  const gateway::PromptTemplate& tpl =
      gateway::find_template(config_.autoformalize_template);
  gateway::Bindings bindings{{"statement", problem.nl_en}};
  if (template_declares(tpl, "informal_comment")) {
    bindings["informal_comment"] = "/-- " + problem.nl_en + " -/";
  }
  const std::string prompt = gateway::render_prompt(tpl.id, bindings);

  std::vector<CandidateRecord> candidates;
  candidates.reserve(static_cast<std::size_t>(config_.sample_budget));
  for (int i = 0; i < config_.sample_budget; ++i) {
    CandidateRecord candidate;
    candidate.index = i;

    gateway::ChatExchange exchange;
    try {
      exchange = formalizer.complete(tpl.id, prompt);
    } catch (const Error& e) {
      candidate.lean_check.status = verifier::CheckStatus::ToolFailure;
      candidate.lean_check.diagnostics.push_back(error_diagnostic(e.what()));
      candidates.push_back(std::move(candidate));
      continue;
    }
    candidate.exchange = exchange;

    std::string statement;
    try {
      statement = gateway::extract_lean_block(exchange.response_text);
    } catch (const Error& e) {
      candidate.lean_check.status = verifier::CheckStatus::CompileError;
      candidate.lean_check.diagnostics.push_back(error_diagnostic(e.what()));
      candidates.push_back(std::move(candidate));
      continue;
    }
    candidate.statement = statement;

    const std::string check_id = problem.id + "-c" + std::to_string(i);
    candidate.lean_check = verifier_.check_statement(statement, check_id);
    if (candidate.lean_check.passed()) {
      try {
        candidate.lints = verifier::lint_statement(statement);
      } catch (const Error&) {
        // A statement the checker accepted but the splitter cannot analyze
        // is left unflagged; linting is best-effort.
      }
    }

    if (candidate.lean_check.passed() && candidate.lints.clean()) {
      try {
        candidate.lean_score =
            leanscorer::score_formalization(problem.nl_en, statement, judge, fuzzy_);
      } catch (const Error& e) {
        // Keep the candidate, but it stays unscored and therefore
        // unselectable; the failure is visible in the record.
        verifier::Diagnostic note;
        note.severity = "warning";
        note.message = std::string("semantic scoring failed: ") + e.what();
        note.line = 0;
        candidate.lean_check.diagnostics.push_back(std::move(note));
      }
    }
    candidates.push_back(std::move(candidate));
  }
  return candidates;
}

std::optional<int> Pipeline::select_best(const std::vector<CandidateRecord>& candidates) {
  std::optional<int> best;
  double best_score = 0.0;
  for (const CandidateRecord& candidate : candidates) {
    if (!candidate.validation_passed()) {
      continue;
    }
    const double score = candidate.lean_score->score;
    if (!best || score > best_score) {
      best = candidate.index;
      best_score = score;
    }
  }
  return best;
}

ProveResult Pipeline::prove_with_budget(const std::string& formal_statement,
                                        const std::string& problem_id) {
  gateway::Backend& prover = require_role(roles_.prover, "prover");
  const gateway::PromptTemplate& tpl = gateway::find_template("prover");
  const std::string prompt =
      gateway::render_prompt(tpl.id, {{"formal_statement", formal_statement}});

  ProveResult result;
  for (int i = 0; i < config_.prover_budget; ++i) {
    ProofAttempt attempt;
    attempt.index = i;

    gateway::ChatExchange exchange;
    try {
      exchange = prover.complete(tpl.id, prompt);
    } catch (const Error& e) {
      attempt.outcome.status = verifier::CheckStatus::ToolFailure;
      attempt.outcome.diagnostics.push_back(error_diagnostic(e.what()));
      result.attempts.push_back(std::move(attempt));
      continue;
    }
    attempt.exchange = exchange;

    std::string proof;
    try {
      proof = gateway::extract_lean_block(exchange.response_text);
    } catch (const Error& e) {
      attempt.outcome.status = verifier::CheckStatus::CompileError;
      attempt.outcome.diagnostics.push_back(error_diagnostic(e.what()));
      result.attempts.push_back(std::move(attempt));
      continue;
    }
    attempt.proof = proof;

    const std::string check_id = problem_id + "-p" + std::to_string(i);
    attempt.outcome = verifier_.check_proof(proof, check_id);
    if (attempt.outcome.passed()) {
      attempt.lints = verifier::lint_proof(proof);
    }

    const bool succeeded = attempt.succeeded();
    result.attempts.push_back(std::move(attempt));
    if (succeeded) {
      result.proved = true;
      break;
    }
  }
  return result;
}

AttemptRecord Pipeline::process_problem(const bench::Problem& problem) {
  const std::int64_t t0 = clock_->now_ms();

  AttemptRecord record;
  record.problem_id = problem.id;
  record.problem_text = problem.nl_en;
  record.category = problem.category;
  record.timestamp = format_rfc3339_ms(t0);

  record.candidates = formalize_candidates(problem);

  std::vector<int> totals;
  totals.reserve(record.candidates.size());
  for (const CandidateRecord& candidate : record.candidates) {
    CandidateReward reward;
    reward.index = candidate.index;
    reward.r_ver = candidate.lean_check.passed() ? 1 : 0;
    reward.r_sem = (candidate.lean_score &&
                    candidate.lean_score->verdict == leanscorer::Verdict::Accept)
                       ? 1
                       : 0;
    reward.r_total = rewards::composite_reward(reward.r_sem, reward.r_ver);
    totals.push_back(reward.r_total);
    record.rewards.push_back(reward);
  }
  if (!totals.empty()) {
    record.reward_stats = rewards::group_reward_stats(totals);
  }

  record.selected_index = select_best(record.candidates);
  if (record.selected_index) {
    const std::string& statement =
        record.candidates[static_cast<std::size_t>(*record.selected_index)].statement;
    ProveResult proofs = prove_with_budget(statement, problem.id);
    record.proof_attempts = std::move(proofs.attempts);
    record.outcome =
        proofs.proved ? ProblemOutcome::Proved : ProblemOutcome::ProverExhausted;
  } else {
    record.outcome = ProblemOutcome::NoViableCandidate;
  }

  record.wall_time_ms = static_cast<double>(clock_->now_ms() - t0);
  return record;
}

RunSummary Pipeline::run_end_to_end(const std::vector<bench::Problem>& problems,
                                    const std::filesystem::path& ledger_path) {
  require_role(roles_.autoformalizer, "autoformalizer");
  require_role(roles_.prover, "prover");
  require_role(roles_.semantic_judge, "semantic_judge");
  require_role(roles_.leanscorer_judge, "leanscorer_judge");

  ledger::OrderedLedgerWriter writer(ledger_path);
  const std::size_t n = problems.size();
  std::vector<ProblemOutcome> outcomes(n, ProblemOutcome::NoViableCandidate);

  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      {
        std::lock_guard<std::mutex> lock(error_mu);
        if (first_error) {
          return;
        }
      }
      try {
        AttemptRecord record = process_problem(problems[i]);
        outcomes[i] = record.outcome;
        writer.append(i, record);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) {
          first_error = std::current_exception();
        }
        return;
      }
    }
  };

  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(config_.concurrency), std::max<std::size_t>(n, 1));
  std::vector<std::thread> threads;
  threads.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) {
    threads.emplace_back(worker);
  }
  for (std::thread& t : threads) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }

  RunSummary summary;
  summary.total = static_cast<int>(n);
  std::map<std::string, std::array<int, 4>> by_category;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<int, 4>& counts = by_category[problems[i].category];
    switch (outcomes[i]) {
      case ProblemOutcome::Proved:
        ++summary.proved;
        ++counts[0];
        break;
      case ProblemOutcome::ProverExhausted:
        ++summary.prover_exhausted;
        ++counts[1];
        break;
      case ProblemOutcome::NoViableCandidate:
        ++summary.no_viable_candidate;
        ++counts[2];
        break;
    }
    ++counts[3];
  }
  // Canonical category order keeps summaries byte-stable across runs.
  for (std::string_view category : bench::problem_categories()) {
    auto it = by_category.find(std::string(category));
    if (it != by_category.end()) {
      summary.per_category.emplace_back(it->first, it->second);
    }
  }
  return summary;
}

}  // namespace mathesis::pipeline
