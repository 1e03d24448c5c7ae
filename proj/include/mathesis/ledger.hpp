// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "mathesis/pipeline.hpp"

namespace mathesis::ledger {

// Schema tag stamped on every ledger line.
inline constexpr const char* kLedgerSchema = "mathesis-ledger/1";

// Serializes a record to a stable key order so identical runs produce
// byte-identical ledger lines.
nlohmann::ordered_json record_to_json(const pipeline::AttemptRecord& record);

// Stable-key-order serializers for the record's parts, shared with the CLI.
nlohmann::ordered_json outcome_to_json(const verifier::VerificationOutcome& outcome);
nlohmann::ordered_json lints_to_json(const verifier::LintReport& report);
nlohmann::ordered_json score_to_json(const leanscorer::LeanScore& score);
nlohmann::ordered_json candidate_to_json(const pipeline::CandidateRecord& candidate);
nlohmann::ordered_json proof_attempt_to_json(const pipeline::ProofAttempt& attempt);

// Parses one ledger object. Throws Error(LedgerSchemaError) on a missing or
// mismatched schema tag or on structurally invalid fields.
pipeline::AttemptRecord record_from_json(const nlohmann::json& obj);

// Reads a full JSONL ledger file in line order.
std::vector<pipeline::AttemptRecord> read_ledger(const std::filesystem::path& path);

// Appends records strictly in input order regardless of the order workers
// finish, so every prefix of the file is a valid ledger and reruns are
// byte-identical. `append` may be called from multiple threads; a record for
// slot N is written once slots 0..N-1 have been written.
class OrderedLedgerWriter {
 public:
  explicit OrderedLedgerWriter(const std::filesystem::path& path);

  void append(std::size_t slot, const pipeline::AttemptRecord& record);

  // Number of records flushed to disk so far.
  std::size_t flushed() const;

 private:
  mutable std::mutex mu_;
  std::ofstream out_;
  std::map<std::size_t, std::string> pending_;
  std::size_t next_ = 0;
};

}  // namespace mathesis::ledger
