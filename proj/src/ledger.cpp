// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/ledger.hpp"

#include <utility>

#include "mathesis/error.hpp"
#include "mathesis/util.hpp"

namespace mathesis::ledger {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using pipeline::AttemptRecord;
using pipeline::CandidateRecord;
using pipeline::CandidateReward;
using pipeline::ProofAttempt;

[[noreturn]] void ledger_error(const std::string& what) {
  throw Error(Errc::LedgerSchemaError, what);
}

}  // namespace

ordered_json outcome_to_json(const verifier::VerificationOutcome& outcome) {
  ordered_json diags = ordered_json::array();
  for (const auto& d : outcome.diagnostics) {
    diags.push_back(ordered_json{
        {"severity", d.severity},
        {"message", d.message},
        {"line", d.line},
    });
  }
  return ordered_json{
      {"status", std::string(verifier::check_status_name(outcome.status))},
      {"diagnostics", std::move(diags)},
      {"elapsed_ms", outcome.elapsed_ms},
  };
}

namespace {

verifier::VerificationOutcome outcome_from_json(const json& obj) {
  if (!obj.is_object() || !obj.contains("status")) {
    ledger_error("verification outcome must be an object with a status");
  }
  verifier::VerificationOutcome out;
  out.status = verifier::check_status_from_name(obj.at("status").get<std::string>());
  if (obj.contains("diagnostics")) {
    for (const auto& d : obj.at("diagnostics")) {
      verifier::Diagnostic diag;
      diag.severity = d.value("severity", std::string("error"));
      diag.message = d.value("message", std::string());
      diag.line = d.value("line", 0);
      out.diagnostics.push_back(std::move(diag));
    }
  }
  out.elapsed_ms = obj.value("elapsed_ms", 0.0);
  return out;
}

}  // namespace

ordered_json lints_to_json(const verifier::LintReport& report) {
  ordered_json flags = ordered_json::array();
  ordered_json details = ordered_json::object();
  for (verifier::LintFlag flag : report.flags) {
    std::string name(verifier::lint_flag_name(flag));
    flags.push_back(name);
    auto it = report.details.find(flag);
    if (it != report.details.end()) {
      details[name] = it->second;
    }
  }
  return ordered_json{{"flags", std::move(flags)}, {"details", std::move(details)}};
}

namespace {

verifier::LintReport lints_from_json(const json& obj) {
  verifier::LintReport report;
  if (!obj.is_object()) {
    ledger_error("lint report must be an object");
  }
  if (obj.contains("flags")) {
    for (const auto& f : obj.at("flags")) {
      report.flags.push_back(verifier::lint_flag_from_name(f.get<std::string>()));
    }
  }
  if (obj.contains("details") && obj.at("details").is_object()) {
    for (const auto& [key, value] : obj.at("details").items()) {
      report.details[verifier::lint_flag_from_name(key)] = value.get<std::string>();
    }
  }
  return report;
}

ordered_json exchange_to_json(const gateway::ChatExchange& exchange) {
  ordered_json obj{
      {"backend", exchange.backend},
      {"request", exchange.request_text},
      {"response", exchange.response_text},
      {"latency_ms", exchange.latency_ms},
  };
  if (exchange.prompt_tokens) {
    obj["prompt_tokens"] = *exchange.prompt_tokens;
  }
  if (exchange.completion_tokens) {
    obj["completion_tokens"] = *exchange.completion_tokens;
  }
  return obj;
}

gateway::ChatExchange exchange_from_json(const json& obj) {
  gateway::ChatExchange exchange;
  exchange.backend = obj.value("backend", std::string());
  exchange.request_text = obj.value("request", std::string());
  exchange.response_text = obj.value("response", std::string());
  exchange.latency_ms = obj.value("latency_ms", 0.0);
  if (obj.contains("prompt_tokens") && obj.at("prompt_tokens").is_number()) {
    exchange.prompt_tokens = obj.at("prompt_tokens").get<int>();
  }
  if (obj.contains("completion_tokens") && obj.at("completion_tokens").is_number()) {
    exchange.completion_tokens = obj.at("completion_tokens").get<int>();
  }
  return exchange;
}

}  // namespace

ordered_json score_to_json(const leanscorer::LeanScore& score) {
  ordered_json ratings = ordered_json::array();
  for (gateway::Rating r : score.ratings) {
    ratings.push_back(std::string(1, gateway::rating_letter(r)));
  }
  return ordered_json{
      {"score", score.score},
      {"verdict", score.verdict == leanscorer::Verdict::Accept ? "accept" : "reject"},
      {"ratings", std::move(ratings)},
      {"n", static_cast<int>(score.ratings.size())},
      {"decomposition", score.decomposition_text},
      {"evaluation", score.evaluation_text},
  };
}

namespace {

leanscorer::LeanScore score_from_json(const json& obj) {
  leanscorer::LeanScore score;
  score.score = obj.value("score", 0.0);
  std::string verdict = obj.value("verdict", std::string("reject"));
  if (verdict == "accept") {
    score.verdict = leanscorer::Verdict::Accept;
  } else if (verdict == "reject") {
    score.verdict = leanscorer::Verdict::Reject;
  } else {
    ledger_error("unknown verdict '" + verdict + "'");
  }
  if (obj.contains("ratings")) {
    for (const auto& r : obj.at("ratings")) {
      std::string letter = r.get<std::string>();
      if (letter.size() != 1) {
        ledger_error("rating labels must be single letters");
      }
      score.ratings.push_back(gateway::rating_from_letter(letter[0]));
    }
  }
  score.decomposition_text = obj.value("decomposition", std::string());
  score.evaluation_text = obj.value("evaluation", std::string());
  return score;
}

}  // namespace

ordered_json candidate_to_json(const CandidateRecord& candidate) {
  ordered_json obj{
      {"index", candidate.index},
      {"statement", candidate.statement},
      {"lean_check", outcome_to_json(candidate.lean_check)},
      {"lints", lints_to_json(candidate.lints)},
  };
  obj["lean_score"] =
      candidate.lean_score ? score_to_json(*candidate.lean_score) : ordered_json(nullptr);
  obj["exchange"] =
      candidate.exchange ? exchange_to_json(*candidate.exchange) : ordered_json(nullptr);
  return obj;
}

namespace {

CandidateRecord candidate_from_json(const json& obj) {
  CandidateRecord candidate;
  candidate.index = obj.value("index", 0);
  candidate.statement = obj.value("statement", std::string());
  if (!obj.contains("lean_check")) {
    ledger_error("candidate is missing lean_check");
  }
  candidate.lean_check = outcome_from_json(obj.at("lean_check"));
  if (obj.contains("lints")) {
    candidate.lints = lints_from_json(obj.at("lints"));
  }
  if (obj.contains("lean_score") && !obj.at("lean_score").is_null()) {
    candidate.lean_score = score_from_json(obj.at("lean_score"));
  }
  if (obj.contains("exchange") && !obj.at("exchange").is_null()) {
    candidate.exchange = exchange_from_json(obj.at("exchange"));
  }
  return candidate;
}

}  // namespace

ordered_json proof_attempt_to_json(const ProofAttempt& attempt) {
  ordered_json obj{
      {"index", attempt.index},
      {"proof", attempt.proof},
      {"outcome", outcome_to_json(attempt.outcome)},
      {"lints", lints_to_json(attempt.lints)},
  };
  obj["exchange"] =
      attempt.exchange ? exchange_to_json(*attempt.exchange) : ordered_json(nullptr);
  return obj;
}

namespace {

ProofAttempt attempt_from_json(const json& obj) {
  ProofAttempt attempt;
  attempt.index = obj.value("index", 0);
  attempt.proof = obj.value("proof", std::string());
  if (!obj.contains("outcome")) {
    ledger_error("proof attempt is missing outcome");
  }
  attempt.outcome = outcome_from_json(obj.at("outcome"));
  if (obj.contains("lints")) {
    attempt.lints = lints_from_json(obj.at("lints"));
  }
  if (obj.contains("exchange") && !obj.at("exchange").is_null()) {
    attempt.exchange = exchange_from_json(obj.at("exchange"));
  }
  return attempt;
}

}  // namespace

ordered_json record_to_json(const AttemptRecord& record) {
  ordered_json candidates = ordered_json::array();
  for (const auto& c : record.candidates) {
    candidates.push_back(candidate_to_json(c));
  }
  ordered_json attempts = ordered_json::array();
  for (const auto& a : record.proof_attempts) {
    attempts.push_back(proof_attempt_to_json(a));
  }

  ordered_json obj{
      {"schema", kLedgerSchema},
      {"problem_id", record.problem_id},
      {"problem_text", record.problem_text},
      {"category", record.category},
      {"timestamp", record.timestamp},
      {"candidates", std::move(candidates)},
  };
  obj["selected_index"] =
      record.selected_index ? ordered_json(*record.selected_index) : ordered_json(nullptr);
  obj["proof_attempts"] = std::move(attempts);
  obj["outcome"] = std::string(pipeline::problem_outcome_name(record.outcome));

  if (record.reward_stats) {
    ordered_json per_candidate = ordered_json::array();
    for (const auto& r : record.rewards) {
      per_candidate.push_back(ordered_json{
          {"index", r.index},
          {"r_sem", r.r_sem},
          {"r_ver", r.r_ver},
          {"r_total", r.r_total},
      });
    }
    obj["rewards"] = ordered_json{
        {"per_candidate", std::move(per_candidate)},
        {"group",
         ordered_json{
             {"group_size", static_cast<int>(record.reward_stats->group_size)},
             {"mean", record.reward_stats->mean},
             {"std_dev", record.reward_stats->std_dev},
             {"zero_variance", record.reward_stats->zero_variance},
         }},
    };
  } else {
    obj["rewards"] = ordered_json(nullptr);
  }
  obj["wall_time_ms"] = record.wall_time_ms;
  return obj;
}

AttemptRecord record_from_json(const json& obj) {
  if (!obj.is_object()) {
    ledger_error("ledger line is not a JSON object");
  }
  auto schema = obj.find("schema");
  if (schema == obj.end() || !schema->is_string()) {
    ledger_error("ledger line is missing its schema tag");
  }
  if (schema->get<std::string>() != kLedgerSchema) {
    ledger_error("unsupported ledger schema '" + schema->get<std::string>() + "'");
  }

  AttemptRecord record;
  record.problem_id = obj.value("problem_id", std::string());
  if (record.problem_id.empty()) {
    ledger_error("ledger record is missing problem_id");
  }
  record.problem_text = obj.value("problem_text", std::string());
  record.category = obj.value("category", std::string());
  record.timestamp = obj.value("timestamp", std::string());
  if (obj.contains("candidates")) {
    for (const auto& c : obj.at("candidates")) {
      record.candidates.push_back(candidate_from_json(c));
    }
  }
  if (obj.contains("selected_index") && !obj.at("selected_index").is_null()) {
    record.selected_index = obj.at("selected_index").get<int>();
  }
  if (obj.contains("proof_attempts")) {
    for (const auto& a : obj.at("proof_attempts")) {
      record.proof_attempts.push_back(attempt_from_json(a));
    }
  }
  if (!obj.contains("outcome")) {
    ledger_error("ledger record is missing outcome");
  }
  record.outcome = pipeline::problem_outcome_from_name(obj.at("outcome").get<std::string>());
  if (obj.contains("rewards") && !obj.at("rewards").is_null()) {
    const auto& rewards = obj.at("rewards");
    if (rewards.contains("per_candidate")) {
      for (const auto& r : rewards.at("per_candidate")) {
        CandidateReward reward;
        reward.index = r.value("index", 0);
        reward.r_sem = r.value("r_sem", 0);
        reward.r_ver = r.value("r_ver", 0);
        reward.r_total = r.value("r_total", 0);
        record.rewards.push_back(reward);
      }
    }
    if (rewards.contains("group")) {
      const auto& group = rewards.at("group");
      rewards::GroupStats stats;
      stats.group_size = group.value("group_size", 0);
      stats.mean = group.value("mean", 0.0);
      stats.std_dev = group.value("std_dev", 0.0);
      stats.zero_variance = group.value("zero_variance", false);
      record.reward_stats = stats;
    }
  }
  record.wall_time_ms = obj.value("wall_time_ms", 0.0);
  return record;
}

std::vector<AttemptRecord> read_ledger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::IoError, "cannot open ledger: " + path.string());
  }
  std::vector<AttemptRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) {
      throw Error(Errc::LedgerSchemaError,
                  "ledger line " + std::to_string(line_no) + " is not valid JSON");
    }
    try {
      records.push_back(record_from_json(obj));
    } catch (const Error& e) {
      throw Error(Errc::LedgerSchemaError,
                  "ledger line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

OrderedLedgerWriter::OrderedLedgerWriter(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) {
    throw Error(Errc::IoError, "cannot open ledger for writing: " + path.string());
  }
}

void OrderedLedgerWriter::append(std::size_t slot, const pipeline::AttemptRecord& record) {
  std::string line = record_to_json(record).dump();
  std::lock_guard<std::mutex> lock(mu_);
  pending_.emplace(slot, std::move(line));
  while (true) {
    auto it = pending_.find(next_);
    if (it == pending_.end()) {
      break;
    }
    out_ << it->second << '\n';
    pending_.erase(it);
    ++next_;
  }
  out_.flush();
}

std::size_t OrderedLedgerWriter::flushed() const {
  std::lock_guard<std::mutex> lock(mu_);
  return next_;
}

}  // namespace mathesis::ledger
