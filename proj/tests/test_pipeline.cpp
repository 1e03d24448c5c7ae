// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/pipeline.hpp"

#include <doctest.h>

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mathesis/bench.hpp"
#include "mathesis/config.hpp"
#include "mathesis/error.hpp"
#include "mathesis/ledger.hpp"
#include "test_support.hpp"

using namespace mathesis;
using pipeline::AttemptRecord;
using pipeline::CandidateRecord;
using pipeline::Pipeline;
using pipeline::PipelineConfig;
using pipeline::ProblemOutcome;

namespace {

gateway::BackendConfig fake_backend_config(std::string name) {
  gateway::BackendConfig cfg;
  cfg.name = std::move(name);
  // A non-empty replay marker plus zero retries keeps complete() from
  // sleeping through a backoff schedule when a fake throws.
  cfg.scripted_dir = "(in-process fake)";
  cfg.max_retries = 0;
  cfg.retry_backoff_s = {0.0};
  return cfg;
}

ClockPtr zero_clock() { return std::make_shared<FixedClock>(0); }

// Replays caller-supplied responses per template id and records every call.
class QueueBackend : public gateway::Backend {
 public:
  explicit QueueBackend(const std::string& name)
      : gateway::Backend(fake_backend_config(name), zero_clock()) {}

  void push(const std::string& template_id, std::string response) {
    queues_[template_id].push_back(std::move(response));
  }

  std::vector<std::string> calls;    // template ids, in call order
  std::vector<std::string> prompts;  // rendered prompts, in call order

 protected:
  RawResponse complete_raw(const std::string& template_id,
                           const std::string& prompt) override {
    calls.push_back(template_id);
    prompts.push_back(prompt);
    auto& queue = queues_[template_id];
    std::size_t& next = cursors_[template_id];
    if (next >= queue.size()) {
      throw Error(Errc::TransportError, "fake queue exhausted: " + template_id);
    }
    RawResponse out;
    out.text = queue[next++];
    return out;
  }

 private:
  std::map<std::string, std::vector<std::string>> queues_;
  std::map<std::string, std::size_t> cursors_;
};

class FailingBackend : public gateway::Backend {
 public:
  explicit FailingBackend(const std::string& name)
      : gateway::Backend(fake_backend_config(name), zero_clock()) {}

 protected:
  RawResponse complete_raw(const std::string&, const std::string&) override {
    throw Error(Errc::TransportError, "backend unreachable (fake)");
  }
};

std::string fence(const std::string& lean) {
  return "```lean4\n" + lean + "\n```\n";
}

const std::string kGoodStatement = "theorem t (n : ℕ) : n + 0 = n := by sorry";
const std::string kGoodProof = "theorem t (n : ℕ) : n + 0 = n := by\n  omega";
const std::string kBadProof =
    "theorem t (n : ℕ) : n + 0 = n := by\n  frobnicate";
const std::string kFlaggedProof =
    "theorem t (n : ℕ) : n + 0 = n := by\n  apply?";

std::string evaluation_with(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += "### Step " + std::to_string(i + 1) + ":\n";
    out += "Consistency Rating: \\box{" + labels[i] + "}\n\n";
  }
  return out;
}

bench::Problem sample_problem(const std::string& id) {
  bench::Problem problem;
  problem.id = id;
  problem.nl_en = "Show that n + 0 = n for every natural number n.";
  problem.category = "Comprehensive questions";
  return problem;
}

// A pipeline wired to the given fakes, with a fresh stub verifier rooted in
// `tmp`. Unset roles fall back to a harmless empty QueueBackend.
struct Rig {
  explicit Rig(const testing::TempDir& tmp, PipelineConfig cfg = {})
      : autoformalizer("autoformalizer"),
        prover("prover"),
        semantic_judge("semantic_judge"),
        leanscorer_judge("leanscorer_judge"),
        verifier(make_verifier_config(tmp), "unit", zero_clock()),
        config(std::move(cfg)) {}

  static verifier::VerifierConfig make_verifier_config(const testing::TempDir& tmp) {
    verifier::VerifierConfig vcfg;
    vcfg.scratch_dir = (tmp.path() / "scratch").string();
    return vcfg;
  }

  Pipeline build() {
    pipeline::RoleBindings roles;
    roles.autoformalizer = &autoformalizer;
    roles.prover = &prover;
    roles.semantic_judge = &semantic_judge;
    roles.leanscorer_judge = &leanscorer_judge;
    return Pipeline(config, roles, verifier, leanscorer::FuzzyParams{}, zero_clock());
  }

  QueueBackend autoformalizer;
  QueueBackend prover;
  QueueBackend semantic_judge;
  QueueBackend leanscorer_judge;
  verifier::LeanVerifier verifier;
  PipelineConfig config;
};

CandidateRecord scored_candidate(int index, double score,
                                 leanscorer::Verdict verdict) {
  CandidateRecord candidate;
  candidate.index = index;
  candidate.statement = kGoodStatement;
  candidate.lean_check.status = verifier::CheckStatus::Pass;
  leanscorer::LeanScore lean_score;
  lean_score.score = score;
  lean_score.verdict = verdict;
  candidate.lean_score = lean_score;
  return candidate;
}

}  // namespace

TEST_CASE("pipeline knobs are validated") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  PipelineConfig bad = cfg;
  bad.sample_budget = 0;
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = cfg;
  bad.prover_budget = 0;
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = cfg;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.alpha = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.alpha = 0.5;
  CHECK_NOTHROW(bad.validate());

  bad = cfg;
  bad.concurrency = 0;
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = cfg;
  bad.autoformalize_template = "no_such_template";
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("selection picks the best fully validated candidate") {
  using leanscorer::Verdict;

  SUBCASE("highest score wins") {
    std::vector<CandidateRecord> candidates{
        scored_candidate(0, 0.75, Verdict::Accept),
        scored_candidate(1, 1.0, Verdict::Accept),
    };
    CHECK(Pipeline::select_best(candidates) == 1);
  }

  SUBCASE("ties resolve to the lowest index") {
    std::vector<CandidateRecord> candidates{
        scored_candidate(0, 0.75, Verdict::Accept),
        scored_candidate(1, 0.75, Verdict::Accept),
    };
    CHECK(Pipeline::select_best(candidates) == 0);
  }

  SUBCASE("rejected, unscored, flagged, and broken candidates never win") {
    CandidateRecord rejected = scored_candidate(0, 0.5, Verdict::Reject);

    CandidateRecord unscored = scored_candidate(1, 1.0, Verdict::Accept);
    unscored.lean_score.reset();

    CandidateRecord flagged = scored_candidate(2, 1.0, Verdict::Accept);
    flagged.lints.flags.push_back(verifier::LintFlag::TrivialTrueGoal);

    CandidateRecord broken = scored_candidate(3, 1.0, Verdict::Accept);
    broken.lean_check.status = verifier::CheckStatus::CompileError;

    CandidateRecord winner = scored_candidate(4, 0.75, Verdict::Accept);

    std::vector<CandidateRecord> candidates{rejected, unscored, flagged, broken,
                                            winner};
    CHECK(Pipeline::select_best(candidates) == 4);

    candidates.pop_back();
    CHECK_FALSE(Pipeline::select_best(candidates).has_value());
  }

  SUBCASE("no candidates means no selection") {
    CHECK_FALSE(Pipeline::select_best({}).has_value());
  }
}

TEST_CASE("formalization scores clean candidates and records failures") {
  testing::TempDir tmp;
  PipelineConfig cfg;
  cfg.sample_budget = 3;
  Rig rig(tmp, cfg);

  rig.autoformalizer.push("autoformalize_generic", fence(kGoodStatement));
  rig.autoformalizer.push("autoformalize_generic",
                          "Sorry, I can only answer cooking questions.");
  rig.autoformalizer.push("autoformalize_generic", fence(kGoodStatement));

  rig.leanscorer_judge.push("leanscorer_decompose",
                            "1. n is a natural number.\n2. n + 0 equals n.");
  rig.leanscorer_judge.push("leanscorer_evaluate",
                            evaluation_with({"Perfectly Match", "Perfectly Match"}));
  rig.leanscorer_judge.push("leanscorer_decompose",
                            "1. n is a natural number.\n2. n + 0 equals n.");
  rig.leanscorer_judge.push("leanscorer_evaluate",
                            evaluation_with({"Perfectly Match", "Minor Inconsistency"}));

  Pipeline pipe = rig.build();
  const std::vector<CandidateRecord> candidates =
      pipe.formalize_candidates(sample_problem("fc"));

  REQUIRE(candidates.size() == 3);

  const CandidateRecord& accepted = candidates[0];
  CHECK(accepted.statement == kGoodStatement);
  CHECK(accepted.lean_check.passed());
  CHECK(accepted.lints.clean());
  REQUIRE(accepted.lean_score.has_value());
  CHECK(accepted.lean_score->score == 1.0);
  CHECK(accepted.lean_score->verdict == leanscorer::Verdict::Accept);
  CHECK(accepted.validation_passed());

  const CandidateRecord& prose = candidates[1];
  CHECK(prose.statement.empty());
  CHECK(prose.lean_check.status == verifier::CheckStatus::CompileError);
  REQUIRE(prose.exchange.has_value());  // the call itself went through
  CHECK_FALSE(prose.lean_score.has_value());

  const CandidateRecord& rejected = candidates[2];
  REQUIRE(rejected.lean_score.has_value());
  CHECK(rejected.lean_score->score == 0.5);
  CHECK(rejected.lean_score->verdict == leanscorer::Verdict::Reject);
  CHECK_FALSE(rejected.validation_passed());

  CHECK(Pipeline::select_best(candidates) == 0);
  // Stage order per scored candidate: decompose, then evaluate.
  CHECK(rig.leanscorer_judge.calls ==
        std::vector<std::string>{"leanscorer_decompose", "leanscorer_evaluate",
                                 "leanscorer_decompose", "leanscorer_evaluate"});
}

TEST_CASE("formalization transport failures become tool-failure candidates") {
  testing::TempDir tmp;
  PipelineConfig cfg;
  cfg.sample_budget = 2;
  Rig rig(tmp, cfg);

  FailingBackend dead("autoformalizer");
  pipeline::RoleBindings roles;
  roles.autoformalizer = &dead;
  roles.prover = &rig.prover;
  roles.semantic_judge = &rig.semantic_judge;
  roles.leanscorer_judge = &rig.leanscorer_judge;
  Pipeline pipe(cfg, roles, rig.verifier, leanscorer::FuzzyParams{}, zero_clock());

  const std::vector<CandidateRecord> candidates =
      pipe.formalize_candidates(sample_problem("tf"));
  REQUIRE(candidates.size() == 2);
  for (const CandidateRecord& candidate : candidates) {
    CHECK(candidate.lean_check.status == verifier::CheckStatus::ToolFailure);
    REQUIRE(candidate.lean_check.diagnostics.size() == 1);
    CHECK(candidate.lean_check.diagnostics[0].message.find("unreachable") !=
          std::string::npos);
    CHECK_FALSE(candidate.exchange.has_value());
    CHECK_FALSE(candidate.validation_passed());
  }
}

TEST_CASE("a judge that returns no ratings leaves the candidate unscored") {
  testing::TempDir tmp;
  PipelineConfig cfg;
  cfg.sample_budget = 1;
  Rig rig(tmp, cfg);

  rig.autoformalizer.push("autoformalize_generic", fence(kGoodStatement));
  rig.leanscorer_judge.push("leanscorer_decompose", "1. Some condition.");
  rig.leanscorer_judge.push("leanscorer_evaluate", "I refuse to rate this.");

  Pipeline pipe = rig.build();
  const std::vector<CandidateRecord> candidates =
      pipe.formalize_candidates(sample_problem("uj"));
  REQUIRE(candidates.size() == 1);
  const CandidateRecord& candidate = candidates[0];
  CHECK(candidate.lean_check.passed());
  CHECK_FALSE(candidate.lean_score.has_value());
  REQUIRE_FALSE(candidate.lean_check.diagnostics.empty());
  bool noted = false;
  for (const auto& diag : candidate.lean_check.diagnostics) {
    if (diag.message.find("semantic scoring failed") != std::string::npos) {
      noted = true;
    }
  }
  CHECK(noted);
  CHECK_FALSE(candidate.validation_passed());
}

TEST_CASE("the herald-style template binds a doc-comment rendering") {
  testing::TempDir tmp;
  PipelineConfig cfg;
  cfg.sample_budget = 1;
  cfg.autoformalize_template = "autoformalize_herald_style";
  Rig rig(tmp, cfg);
  rig.autoformalizer.push("autoformalize_herald_style",
                          "no lean here, candidate fails harmlessly");

  Pipeline pipe = rig.build();
  const bench::Problem problem = sample_problem("hs");
  pipe.formalize_candidates(problem);
  REQUIRE(rig.autoformalizer.prompts.size() == 1);
  CHECK(rig.autoformalizer.prompts[0].find("/-- " + problem.nl_en + " -/") !=
        std::string::npos);
}

TEST_CASE("proving stops at the first clean success") {
  testing::TempDir tmp;
  PipelineConfig cfg;
  cfg.prover_budget = 5;
  Rig rig(tmp, cfg);
  rig.prover.push("prover", fence(kBadProof));
  rig.prover.push("prover", fence(kGoodProof));
  rig.prover.push("prover", fence(kGoodProof));  // must never be consumed

  Pipeline pipe = rig.build();
  const pipeline::ProveResult result =
      pipe.prove_with_budget(kGoodStatement, "stop-early");
  CHECK(result.proved);
  REQUIRE(result.attempts.size() == 2);
  CHECK(result.attempts[0].outcome.status == verifier::CheckStatus::CompileError);
  CHECK(result.attempts[1].outcome.status == verifier::CheckStatus::Pass);
  CHECK(result.attempts[1].lints.clean());
  CHECK(rig.prover.calls.size() == 2);
}

TEST_CASE("a flagged proof consumes budget without counting as success") {
  testing::TempDir tmp;
  Rig rig(tmp);
  rig.prover.push("prover", fence(kFlaggedProof));
  rig.prover.push("prover", fence(kGoodProof));

  Pipeline pipe = rig.build();
  const pipeline::ProveResult result =
      pipe.prove_with_budget(kGoodStatement, "flagged");
  CHECK(result.proved);
  REQUIRE(result.attempts.size() == 2);
  CHECK(result.attempts[0].outcome.passed());  // it compiled...
  CHECK_FALSE(result.attempts[0].lints.clean());  // ...but tripped the lint
  CHECK(result.attempts[0].lints.details.count(
            verifier::LintFlag::ProofContainsApplyQuery) == 1);
}

TEST_CASE("the prover budget bounds failed attempts") {
  testing::TempDir tmp;
  PipelineConfig cfg;
  cfg.prover_budget = 3;
  Rig rig(tmp, cfg);
  for (int i = 0; i < 6; ++i) {
    rig.prover.push("prover", fence(kBadProof));
  }

  Pipeline pipe = rig.build();
  const pipeline::ProveResult result =
      pipe.prove_with_budget(kGoodStatement, "exhausted");
  CHECK_FALSE(result.proved);
  CHECK(result.attempts.size() == 3);

  SUBCASE("transport failures also consume attempts") {
    FailingBackend dead("prover");
    pipeline::RoleBindings roles;
    roles.autoformalizer = &rig.autoformalizer;
    roles.prover = &dead;
    roles.semantic_judge = &rig.semantic_judge;
    roles.leanscorer_judge = &rig.leanscorer_judge;
    Pipeline offline(cfg, roles, rig.verifier, leanscorer::FuzzyParams{},
                     zero_clock());
    const pipeline::ProveResult down =
        offline.prove_with_budget(kGoodStatement, "offline");
    CHECK_FALSE(down.proved);
    REQUIRE(down.attempts.size() == 3);
    for (const auto& attempt : down.attempts) {
      CHECK(attempt.outcome.status == verifier::CheckStatus::ToolFailure);
      CHECK_FALSE(attempt.exchange.has_value());
    }
  }
}

TEST_CASE("a full run over the bundled fixture is exact and repeatable") {
  const auto cfg =
      config::load_config(testing::fixture_dir() / "e2e" / "harness.json");
  const std::vector<bench::Problem> problems =
      bench::load_problems(cfg.paths.dataset);
  REQUIRE(problems.size() == 6);

  auto run_once = [&](const std::filesystem::path& out_dir) {
    const ClockPtr clock = cfg.make_clock();
    std::map<std::string, std::unique_ptr<gateway::Backend>> backends;
    for (const auto& [role, backend_cfg] : cfg.backends) {
      backends.emplace(role, gateway::make_backend(backend_cfg, clock));
    }
    pipeline::RoleBindings roles;
    roles.autoformalizer = backends.at("autoformalizer").get();
    roles.prover = backends.at("prover").get();
    roles.semantic_judge = backends.at("semantic_judge").get();
    roles.leanscorer_judge = backends.at("leanscorer_judge").get();

    verifier::VerifierConfig vcfg = cfg.verifier;
    vcfg.scratch_dir = (out_dir / "scratch").string();
    verifier::LeanVerifier lean(vcfg, "unit", clock);

    Pipeline pipe(cfg.pipeline, roles, lean, cfg.fuzzy, clock);
    return pipe.run_end_to_end(problems, out_dir / "ledger.jsonl");
  };

  testing::TempDir first;
  const pipeline::RunSummary summary = run_once(first.path());
  CHECK(summary.total == 6);
  CHECK(summary.proved == 3);
  CHECK(summary.prover_exhausted == 1);
  CHECK(summary.no_viable_candidate == 2);

  REQUIRE(summary.per_category.size() == 4);
  CHECK(summary.per_category[0].first == "Functions");
  CHECK(summary.per_category[0].second == std::array<int, 4>{1, 0, 0, 1});
  CHECK(summary.per_category[1].first == "Sequences and series");
  CHECK(summary.per_category[1].second == std::array<int, 4>{0, 1, 2, 3});
  CHECK(summary.per_category[2].first == "Inequality");
  CHECK(summary.per_category[2].second == std::array<int, 4>{1, 0, 0, 1});
  CHECK(summary.per_category[3].first == "Comprehensive questions");
  CHECK(summary.per_category[3].second == std::array<int, 4>{1, 0, 0, 1});

  const std::vector<AttemptRecord> records =
      ledger::read_ledger(first.path() / "ledger.jsonl");
  REQUIRE(records.size() == 6);

  const std::vector<std::string> expected_ids{"p001", "p002", "p003",
                                              "p004", "p005", "p006"};
  const std::vector<ProblemOutcome> expected_outcomes{
      ProblemOutcome::Proved,          ProblemOutcome::Proved,
      ProblemOutcome::NoViableCandidate, ProblemOutcome::ProverExhausted,
      ProblemOutcome::Proved,          ProblemOutcome::NoViableCandidate};
  const std::vector<std::optional<int>> expected_selection{0, 1, std::nullopt,
                                                           0, 1, std::nullopt};
  const std::vector<std::size_t> expected_attempts{1, 2, 0, 3, 2, 0};

  for (std::size_t i = 0; i < records.size(); ++i) {
    CAPTURE(i);
    CHECK(records[i].problem_id == expected_ids[i]);
    CHECK(records[i].outcome == expected_outcomes[i]);
    CHECK(records[i].selected_index == expected_selection[i]);
    CHECK(records[i].proof_attempts.size() == expected_attempts[i]);
    CHECK(records[i].candidates.size() == 2);
    CHECK(records[i].timestamp == "2026-01-01T00:00:00Z");
  }

  // p001: both candidates accepted, so the whole group earns full reward and
  // carries no learning signal.
  REQUIRE(records[0].rewards.size() == 2);
  CHECK(records[0].rewards[0].r_total == 2);
  CHECK(records[0].rewards[1].r_total == 2);
  CHECK(records[0].reward_stats->zero_variance);

  // p002: one broken candidate, one accepted — a mixed group.
  CHECK(records[1].rewards[0].r_total == 0);
  CHECK(records[1].rewards[1].r_total == 2);
  CHECK_FALSE(records[1].reward_stats->zero_variance);

  // p006: both candidates compile but trip statement lints, so neither is
  // scored and no judge exchange ever happens.
  const AttemptRecord& gated = records[5];
  REQUIRE(gated.candidates.size() == 2);
  CHECK(gated.candidates[0].lints.details.count(
            verifier::LintFlag::GoalAsAssumption) == 1);
  CHECK(gated.candidates[1].lints.details.count(
            verifier::LintFlag::TrivialTrueGoal) == 1);
  for (const CandidateRecord& candidate : gated.candidates) {
    CHECK(candidate.lean_check.passed());
    CHECK_FALSE(candidate.lints.clean());
    CHECK_FALSE(candidate.lean_score.has_value());
  }

  // Determinism: a second run from fresh backends produces the same bytes.
  testing::TempDir second;
  run_once(second.path());
  CHECK(read_text_file(first.path() / "ledger.jsonl") ==
        read_text_file(second.path() / "ledger.jsonl"));
}

TEST_CASE("a pipeline without a clock is refused") {
  testing::TempDir tmp;
  Rig rig(tmp);
  pipeline::RoleBindings roles;
  roles.autoformalizer = &rig.autoformalizer;
  roles.prover = &rig.prover;
  roles.semantic_judge = &rig.semantic_judge;
  roles.leanscorer_judge = &rig.leanscorer_judge;
  CHECK_THROWS_AS(Pipeline(PipelineConfig{}, roles, rig.verifier,
                           leanscorer::FuzzyParams{}, ClockPtr{}),
                  Error);
}

TEST_CASE("outcome names round-trip") {
  for (ProblemOutcome outcome :
       {ProblemOutcome::Proved, ProblemOutcome::ProverExhausted,
        ProblemOutcome::NoViableCandidate}) {
    CHECK(pipeline::problem_outcome_from_name(
              pipeline::problem_outcome_name(outcome)) == outcome);
  }
  CHECK_THROWS_AS(pipeline::problem_outcome_from_name("solved"), Error);
}
