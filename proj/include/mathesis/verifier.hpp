// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mathesis/util.hpp"

namespace mathesis::verifier {

enum class CheckStatus { Pass, CompileError, Timeout, ToolFailure };

std::string_view check_status_name(CheckStatus status) noexcept;

// Inverse of check_status_name. Throws Error(LedgerSchemaError) on an
// unknown name.
CheckStatus check_status_from_name(std::string_view name);

struct Diagnostic {
  std::string severity;  // "error" | "warning" | "info"
  std::string message;
  int line = 0;  // 1-based line in the compiled file; 0 when unknown
};

struct VerificationOutcome {
  CheckStatus status = CheckStatus::ToolFailure;
  std::vector<Diagnostic> diagnostics;
  double elapsed_ms = 0.0;

  bool passed() const { return status == CheckStatus::Pass; }
};

// Degenerate-output lints. Flag names double as their wire format.
enum class LintFlag {
  ProofContainsApplyQuery,  // "apply?" used as a tactic
  ProofContainsSorry,
  TrivialTrueGoal,          // goal normalizes to True
  GoalAsAssumption,         // some hypothesis restates the goal
};

std::string_view lint_flag_name(LintFlag flag) noexcept;

// Inverse of lint_flag_name. Throws Error(LedgerSchemaError) on an unknown
// name.
LintFlag lint_flag_from_name(std::string_view name);

struct LintReport {
  std::vector<LintFlag> flags;
  std::map<LintFlag, std::string> details;  // evidence text per flag

  bool clean() const { return flags.empty(); }
};

struct VerifierConfig {
  enum class Mode { Stub, Command };

  Mode mode = Mode::Stub;
  // External toolchain invocation; "{file}" is replaced by the scratch file.
  std::vector<std::string> command;
  std::string scratch_dir = "scratch";
  // Prepended to every compiled candidate, followed by one blank line.
  std::vector<std::string> header_lines = {
      "import Mathlib",
      "import Aesop",
      "set_option maxHeartbeats 0",
      "open BigOperators Real Nat Topology Rat",
  };
  double timeout_s = 180.0;
  int pool_size = 4;  // concurrent compilations allowed
};

// ---------------------------------------------------------------------------
// Pure helpers (no toolchain involved)
// ---------------------------------------------------------------------------

// Replaces everything from the first top-level ":=" onward with ":= by sorry";
// appends the terminator when the statement has no proof body at all.
std::string force_sorry_body(const std::string& statement);

// Removes "--" line comments, "/- -/" block comments (nested), and
// double-quoted string literals, preserving newlines so diagnostics keep
// their line numbers.
std::string strip_comments_and_strings(const std::string& source);

// Splits a theorem declaration into hypothesis texts and the goal text.
// Hypotheses are the parenthesized binder bodies before the final top-level
// ":" that precedes ":="; the goal is the text between that ":" and ":=".
// Throws Error(UnsplittableStatement) when no such split exists.
struct StatementParts {
  std::vector<std::string> hypotheses;  // binder bodies, e.g. "0 < n"
  std::string goal;
};
StatementParts split_statement(const std::string& statement);

// Flags "apply?" or "sorry" tokens appearing outside comments and strings.
LintReport lint_proof(const std::string& proof);

// Flags goals that normalize to "True" and hypotheses that restate the goal
// up to whitespace and bound-variable renaming.
// Throws Error(UnsplittableStatement) when the statement cannot be split.
LintReport lint_statement(const std::string& statement);

// ---------------------------------------------------------------------------
// LeanVerifier
// ---------------------------------------------------------------------------

// Checks candidate statements and proofs, either against an in-process
// rule-based stub or by invoking an external Lean toolchain. Every check
// writes <scratch_dir>/<run_id>/<candidate_id>.lean (header + payload, UTF-8,
// LF endings) so failures can be reproduced by hand.
class LeanVerifier {
 public:
  // Compiles one already-written scratch file. The default backends are the
  // stub and the external command runner; tests may inject their own.
  class Backend {
   public:
    virtual ~Backend() = default;
    virtual VerificationOutcome compile(const std::string& source,
                                        const std::filesystem::path& file) = 0;
  };

  LeanVerifier(VerifierConfig cfg, std::string run_id,
               ClockPtr clock = system_clock_ptr(),
               std::unique_ptr<Backend> backend = nullptr);

  const VerifierConfig& config() const { return cfg_; }
  const std::string& run_id() const { return run_id_; }
  std::filesystem::path scratch_file_path(const std::string& candidate_id) const;

  // Compiles the statement with its proof body forced to "sorry", so the
  // result reflects the statement alone. Warnings (including the sorry
  // admission) do not fail the check.
  VerificationOutcome check_statement(const std::string& statement,
                                      const std::string& candidate_id = "");

  // Compiles the full proof text as-is. Pass means zero error diagnostics;
  // degenerate-proof detection is lint_proof's job, not this one's.
  VerificationOutcome check_proof(const std::string& proof,
                                  const std::string& candidate_id = "");

 private:
  VerificationOutcome run_check(const std::string& payload,
                                const std::string& candidate_id);

  VerifierConfig cfg_;
  std::string run_id_;
  ClockPtr clock_;
  std::unique_ptr<Backend> backend_;
  Semaphore pool_;
  std::atomic<int> auto_id_{0};
};

// The rule-based stand-in for a Lean toolchain: deterministic, offline, and
// strict about a small grammar (balanced brackets, a theorem declaration with
// a goal and ":= by" proof, no adjacent infix operators, known tactic names).
// "sorry" compiles with the usual warning; "apply?" compiles like any tactic.
std::unique_ptr<LeanVerifier::Backend> make_stub_backend();

// Runs cfg.command with {file} substituted, enforcing cfg.timeout_s, and
// parses "file:line:col: severity: message" diagnostics from its output.
std::unique_ptr<LeanVerifier::Backend> make_command_backend(VerifierConfig cfg);

}  // namespace mathesis::verifier
