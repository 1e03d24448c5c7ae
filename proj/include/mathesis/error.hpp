// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mathesis {

// Every recoverable failure in the harness carries one of these codes so
// callers can branch on the condition instead of parsing message text.
enum class Errc {
  // prompt/gateway
  MissingBinding,
  UnknownTemplate,
  Timeout,
  TransportError,
  BackendRefused,
  NoLeanContent,
  UnparseableJudgement,
  NoRatingsFound,
  UnknownRatingLabel,
  // scoring
  InvalidCounts,
  ScoringFailed,
  // rewards
  EmptyGroup,
  // verifier
  UnsplittableStatement,
  // datasets / ledgers
  SchemaError,
  DuplicateId,
  UnknownProblemId,
  LedgerSchemaError,
  LengthMismatch,
  // configuration and I/O
  ConfigError,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mathesis
