// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/ledger.hpp"

#include <doctest.h>

#include <string>
#include <vector>

#include "mathesis/error.hpp"
#include "test_support.hpp"

using namespace mathesis;
using nlohmann::json;
using nlohmann::ordered_json;
using pipeline::AttemptRecord;
using pipeline::CandidateRecord;
using pipeline::ProofAttempt;

namespace {

AttemptRecord rich_record() {
  AttemptRecord record;
  record.problem_id = "p042";
  record.problem_text = "Show that 21 * 2 = 42.";
  record.category = "Comprehensive questions";
  record.timestamp = "2026-01-01T00:00:00Z";
  record.wall_time_ms = 12.5;
  record.outcome = pipeline::ProblemOutcome::Proved;
  record.selected_index = 0;

  CandidateRecord good;
  good.index = 0;
  good.statement = "theorem t : 21 * 2 = 42 := by sorry";
  good.lean_check.status = verifier::CheckStatus::Pass;
  good.lean_check.diagnostics = {
      {"warning", "declaration uses 'sorry'", 6},
  };
  good.lean_check.elapsed_ms = 1.5;
  leanscorer::LeanScore score;
  score.score = 0.75;
  score.verdict = leanscorer::Verdict::Accept;
  score.ratings = {gateway::Rating::A, gateway::Rating::A, gateway::Rating::A,
                   gateway::Rating::B};
  score.decomposition_text = "### Mathematical conditions:\n1. ...";
  score.evaluation_text = "\\box{Perfectly Match}";
  good.lean_score = score;
  gateway::ChatExchange exchange;
  exchange.backend = "autoformalizer";
  exchange.request_text = "formalize this";
  exchange.response_text = "```lean4\ntheorem t ...\n```";
  exchange.latency_ms = 3.0;
  exchange.prompt_tokens = 100;
  exchange.completion_tokens = 40;
  good.exchange = exchange;

  CandidateRecord broken;
  broken.index = 1;
  broken.statement = "theorem t : 21 * 2 = := by sorry";
  broken.lean_check.status = verifier::CheckStatus::CompileError;
  broken.lean_check.diagnostics = {{"error", "unexpected token ':='", 6}};
  broken.lints.flags = {verifier::LintFlag::TrivialTrueGoal};
  broken.lints.details[verifier::LintFlag::TrivialTrueGoal] = "goal: True";
  gateway::ChatExchange no_tokens;
  no_tokens.backend = "autoformalizer";
  no_tokens.request_text = "formalize this";
  no_tokens.response_text = "broken";
  broken.exchange = no_tokens;

  record.candidates = {good, broken};

  ProofAttempt failed;
  failed.index = 0;
  failed.proof = "theorem t : 21 * 2 = 42 := by\n  decide_hard";
  failed.outcome.status = verifier::CheckStatus::CompileError;
  failed.outcome.diagnostics = {{"error", "unknown tactic 'decide_hard'", 7}};
  ProofAttempt succeeded;
  succeeded.index = 1;
  succeeded.proof = "theorem t : 21 * 2 = 42 := by\n  norm_num";
  succeeded.outcome.status = verifier::CheckStatus::Pass;
  record.proof_attempts = {failed, succeeded};

  record.rewards = {{0, 1, 1, 2}, {1, 0, 0, 0}};
  record.reward_stats = rewards::group_reward_stats({2, 0});
  return record;
}

}  // namespace

TEST_CASE("records survive a serialization round trip") {
  const AttemptRecord original = rich_record();
  const ordered_json doc = ledger::record_to_json(original);
  CHECK(doc.at("schema") == ledger::kLedgerSchema);

  const AttemptRecord back = ledger::record_from_json(doc);
  CHECK(back.problem_id == original.problem_id);
  CHECK(back.problem_text == original.problem_text);
  CHECK(back.category == original.category);
  CHECK(back.timestamp == original.timestamp);
  CHECK(back.wall_time_ms == original.wall_time_ms);
  CHECK(back.outcome == original.outcome);
  CHECK(back.selected_index == original.selected_index);

  REQUIRE(back.candidates.size() == 2);
  const CandidateRecord& good = back.candidates[0];
  CHECK(good.index == 0);
  CHECK(good.statement == original.candidates[0].statement);
  CHECK(good.lean_check.status == verifier::CheckStatus::Pass);
  REQUIRE(good.lean_check.diagnostics.size() == 1);
  CHECK(good.lean_check.diagnostics[0].severity == "warning");
  CHECK(good.lean_check.diagnostics[0].line == 6);
  CHECK(good.lean_check.elapsed_ms == 1.5);
  REQUIRE(good.lean_score.has_value());
  CHECK(good.lean_score->score == 0.75);
  CHECK(good.lean_score->verdict == leanscorer::Verdict::Accept);
  CHECK(good.lean_score->ratings == original.candidates[0].lean_score->ratings);
  CHECK(good.lean_score->decomposition_text ==
        original.candidates[0].lean_score->decomposition_text);
  REQUIRE(good.exchange.has_value());
  CHECK(good.exchange->backend == "autoformalizer");
  CHECK(good.exchange->prompt_tokens == 100);
  CHECK(good.exchange->completion_tokens == 40);

  const CandidateRecord& broken = back.candidates[1];
  CHECK_FALSE(broken.lean_score.has_value());
  CHECK(broken.lints.flags ==
        std::vector<verifier::LintFlag>{verifier::LintFlag::TrivialTrueGoal});
  CHECK(broken.lints.details.at(verifier::LintFlag::TrivialTrueGoal) ==
        "goal: True");
  REQUIRE(broken.exchange.has_value());
  CHECK_FALSE(broken.exchange->prompt_tokens.has_value());

  REQUIRE(back.proof_attempts.size() == 2);
  CHECK(back.proof_attempts[0].outcome.status ==
        verifier::CheckStatus::CompileError);
  CHECK(back.proof_attempts[1].outcome.status == verifier::CheckStatus::Pass);
  CHECK(back.proof_attempts[1].proof == original.proof_attempts[1].proof);

  REQUIRE(back.rewards.size() == 2);
  CHECK(back.rewards[0].r_total == 2);
  CHECK(back.rewards[1].r_total == 0);
  REQUIRE(back.reward_stats.has_value());
  CHECK(back.reward_stats->group_size == 2);
  CHECK(back.reward_stats->mean == 1.0);
  CHECK_FALSE(back.reward_stats->zero_variance);
}

TEST_CASE("token counts are omitted from exchanges that lack them") {
  const ordered_json doc = ledger::record_to_json(rich_record());
  const ordered_json& with = doc.at("candidates")[0].at("exchange");
  CHECK(with.contains("prompt_tokens"));
  const ordered_json& without = doc.at("candidates")[1].at("exchange");
  CHECK_FALSE(without.contains("prompt_tokens"));
  CHECK_FALSE(without.contains("completion_tokens"));
}

TEST_CASE("an absent selection serializes as null and reads back empty") {
  AttemptRecord record = rich_record();
  record.selected_index.reset();
  record.outcome = pipeline::ProblemOutcome::NoViableCandidate;
  const ordered_json doc = ledger::record_to_json(record);
  CHECK(doc.at("selected_index").is_null());
  CHECK_FALSE(ledger::record_from_json(doc).selected_index.has_value());
}

TEST_CASE("foreign or damaged documents are refused") {
  const ordered_json good = ledger::record_to_json(rich_record());

  ordered_json wrong_schema = good;
  wrong_schema["schema"] = "somebody-else/9";
  CHECK_THROWS_AS(ledger::record_from_json(wrong_schema), Error);

  ordered_json no_schema = good;
  no_schema.erase("schema");
  CHECK_THROWS_AS(ledger::record_from_json(no_schema), Error);

  ordered_json no_outcome = good;
  no_outcome.erase("outcome");
  CHECK_THROWS_AS(ledger::record_from_json(no_outcome), Error);

  ordered_json no_id = good;
  no_id.erase("problem_id");
  try {
    ledger::record_from_json(no_id);
    FAIL("expected an exception");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::LedgerSchemaError);
  }
}

TEST_CASE("ledger files read back line by line with precise errors") {
  testing::TempDir tmp;
  const auto path = tmp.path() / "ledger.jsonl";

  const ordered_json doc = ledger::record_to_json(rich_record());
  write_text_file(path, doc.dump() + "\n" + doc.dump() + "\n");
  const std::vector<AttemptRecord> records = ledger::read_ledger(path);
  CHECK(records.size() == 2);
  CHECK(records[1].problem_id == "p042");

  write_text_file(path, doc.dump() + "\nnot json\n");
  try {
    ledger::read_ledger(path);
    FAIL("expected an exception");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::LedgerSchemaError);
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(ledger::read_ledger(tmp.path() / "absent.jsonl"), Error);
}

TEST_CASE("the ordered writer flushes slots in input order") {
  testing::TempDir tmp;
  const auto path = tmp.path() / "ordered.jsonl";

  AttemptRecord a = rich_record();
  a.problem_id = "p-first";
  AttemptRecord b = rich_record();
  b.problem_id = "p-second";
  AttemptRecord c = rich_record();
  c.problem_id = "p-third";

  ledger::OrderedLedgerWriter writer(path);
  writer.append(2, c);  // held back until slots 0 and 1 arrive
  CHECK(writer.flushed() == 0);
  writer.append(0, a);
  CHECK(writer.flushed() == 1);
  writer.append(1, b);
  CHECK(writer.flushed() == 3);

  const std::vector<AttemptRecord> records = ledger::read_ledger(path);
  REQUIRE(records.size() == 3);
  CHECK(records[0].problem_id == "p-first");
  CHECK(records[1].problem_id == "p-second");
  CHECK(records[2].problem_id == "p-third");
}
