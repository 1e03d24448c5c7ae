// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/verifier.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <set>
#include <sstream>

#include "mathesis/error.hpp"

namespace mathesis::verifier {

std::string_view check_status_name(CheckStatus status) noexcept {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::CompileError: return "compile_error";
    case CheckStatus::Timeout: return "timeout";
    case CheckStatus::ToolFailure: return "tool_failure";
  }
  return "tool_failure";
}

std::string_view lint_flag_name(LintFlag flag) noexcept {
  switch (flag) {
    case LintFlag::ProofContainsApplyQuery: return "proof_contains_apply_query";
    case LintFlag::ProofContainsSorry: return "proof_contains_sorry";
    case LintFlag::TrivialTrueGoal: return "trivial_true_goal";
    case LintFlag::GoalAsAssumption: return "goal_as_assumption";
  }
  return "unknown";
}

CheckStatus check_status_from_name(std::string_view name) {
  for (CheckStatus status : {CheckStatus::Pass, CheckStatus::CompileError,
                             CheckStatus::Timeout, CheckStatus::ToolFailure}) {
    if (check_status_name(status) == name) {
      return status;
    }
  }
  throw Error(Errc::LedgerSchemaError,
              "unknown check status '" + std::string(name) + "'");
}

LintFlag lint_flag_from_name(std::string_view name) {
  for (LintFlag flag : {LintFlag::ProofContainsApplyQuery, LintFlag::ProofContainsSorry,
                        LintFlag::TrivialTrueGoal, LintFlag::GoalAsAssumption}) {
    if (lint_flag_name(flag) == name) {
      return flag;
    }
  }
  throw Error(Errc::LedgerSchemaError, "unknown lint flag '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Comment / string masking
// ---------------------------------------------------------------------------

std::string strip_comments_and_strings(const std::string& source) {
  std::string out = source;
  size_t i = 0;
  const size_t n = source.size();
  auto blank = [&](size_t at) {
    if (out[at] != '\n') out[at] = ' ';
  };
  while (i < n) {
    if (source[i] == '-' && i + 1 < n && source[i + 1] == '-') {
      while (i < n && source[i] != '\n') blank(i++);
    } else if (source[i] == '/' && i + 1 < n && source[i + 1] == '-') {
      int depth = 0;
      do {
        if (source[i] == '/' && i + 1 < n && source[i + 1] == '-') {
          ++depth;
          blank(i++);
          blank(i++);
        } else if (source[i] == '-' && i + 1 < n && source[i + 1] == '/') {
          --depth;
          blank(i++);
          blank(i++);
        } else {
          blank(i++);
        }
      } while (i < n && depth > 0);
    } else if (source[i] == '"') {
      blank(i++);
      while (i < n && source[i] != '"') {
        if (source[i] == '\\' && i + 1 < n) blank(i++);
        blank(i++);
      }
      if (i < n) blank(i++);  // closing quote
    } else {
      ++i;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizer
//
// Just enough Lean 4 lexing for the lints and the stub: identifiers keep
// namespace dots, primes, subscripts and a trailing ? or !; multi-character
// ASCII operators and a fixed set of Unicode symbol codepoints come out as
// single operator tokens; everything else is one codepoint per token.
// ---------------------------------------------------------------------------

namespace {

enum class TokKind { Ident, Number, Op, Open, Close, Comma, Other };

struct Token {
  std::string text;
  TokKind kind = TokKind::Other;
  int line = 1;
};

// Unicode codepoints treated as standalone operator symbols.
bool is_symbol_codepoint(uint32_t cp) {
  static const std::set<uint32_t> symbols = {
      0x00AC,  // ¬
      0x00B1,  // ±
      0x00B7,  // ·
      0x00D7,  // ×
      0x00F7,  // ÷
      0x03BB,  // λ
      0x2190,  // ←
      0x2192,  // →
      0x2194,  // ↔
      0x21A6,  // ↦
      0x2200,  // ∀
      0x2203,  // ∃
      0x2205,  // ∅
      0x2208,  // ∈
      0x2209,  // ∉
      0x220F,  // ∏
      0x2211,  // ∑
      0x2218,  // ∘
      0x2219,  // ∙
      0x221A,  // √
      0x2223,  // ∣
      0x2227,  // ∧
      0x2228,  // ∨
      0x2229,  // ∩
      0x222A,  // ∪
      0x2248,  // ≈
      0x2260,  // ≠
      0x2261,  // ≡
      0x2264,  // ≤
      0x2265,  // ≥
      0x2282,  // ⊂
      0x2286,  // ⊆
      0x2308,  // ⌈
      0x2309,  // ⌉
      0x230A,  // ⌊
      0x230B,  // ⌋
      0x27E8,  // ⟨
      0x27E9,  // ⟩
  };
  return symbols.count(cp) != 0;
}

size_t codepoint_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // invalid byte, treat as opaque
}

uint32_t decode_codepoint(const std::string& text, size_t pos, size_t len) {
  unsigned char lead = static_cast<unsigned char>(text[pos]);
  if (len == 1) return lead;
  uint32_t cp = lead & (0x7F >> len);
  for (size_t k = 1; k < len && pos + k < text.size(); ++k) {
    cp = (cp << 6) | (static_cast<unsigned char>(text[pos + k]) & 0x3F);
  }
  return cp;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' ||
         c == '\'' || c == '.';
}

std::vector<Token> tokenize(const std::string& text) {
  static const char* kMultiOps[] = {"<;>", ":=", "=>", "->", "<-",
                                    "<=",  ">=", "==", "!="};
  std::vector<Token> tokens;
  size_t i = 0;
  int line = 1;
  const size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc >= 0x80) {
      size_t len = codepoint_len(uc);
      uint32_t cp = decode_codepoint(text, i, len);
      if (is_symbol_codepoint(cp)) {
        TokKind kind = TokKind::Op;
        if (cp == 0x27E8) kind = TokKind::Open;
        if (cp == 0x27E9) kind = TokKind::Close;
        tokens.push_back({text.substr(i, len), kind, line});
        i += len;
        continue;
      }
      // Unicode letter (ℝ, ℕ, α, subscripts, ...): part of an identifier.
      std::string ident;
      while (i < n) {
        unsigned char b = static_cast<unsigned char>(text[i]);
        if (b >= 0x80) {
          size_t l2 = codepoint_len(b);
          uint32_t cp2 = decode_codepoint(text, i, l2);
          if (is_symbol_codepoint(cp2)) break;
          ident += text.substr(i, l2);
          i += l2;
        } else if (is_ident_char(text[i])) {
          ident += text[i++];
        } else {
          break;
        }
      }
      if (i < n && (text[i] == '?' || text[i] == '!')) ident += text[i++];
      tokens.push_back({ident, TokKind::Ident, line});
      continue;
    }
    bool multi = false;
    for (const char* op : kMultiOps) {
      size_t len = std::strlen(op);
      if (text.compare(i, len, op) == 0) {
        tokens.push_back({op, TokKind::Op, line});
        i += len;
        multi = true;
        break;
      }
    }
    if (multi) continue;
    if (is_ident_start(c)) {
      size_t begin = i;
      while (i < n) {
        unsigned char b = static_cast<unsigned char>(text[i]);
        if (b >= 0x80) {
          size_t l2 = codepoint_len(b);
          uint32_t cp2 = decode_codepoint(text, i, l2);
          if (is_symbol_codepoint(cp2)) break;
          i += l2;
        } else if (is_ident_char(text[i])) {
          ++i;
        } else {
          break;
        }
      }
      std::string ident = text.substr(begin, i - begin);
      if (i < n && (text[i] == '?' || text[i] == '!')) ident += text[i++];
      tokens.push_back({ident, TokKind::Ident, line});
      continue;
    }
    if (std::isdigit(uc) != 0) {
      size_t begin = i;
      while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) != 0 ||
                       text[i] == '.')) {
        ++i;
      }
      tokens.push_back({text.substr(begin, i - begin), TokKind::Number, line});
      continue;
    }
    TokKind kind = TokKind::Op;
    if (c == '(' || c == '[' || c == '{') kind = TokKind::Open;
    if (c == ')' || c == ']' || c == '}') kind = TokKind::Close;
    if (c == ',') kind = TokKind::Comma;
    tokens.push_back({std::string(1, c), kind, line});
    ++i;
  }
  return tokens;
}

bool is_binder_token(const std::string& text) {
  return text == "∀" || text == "∃" || text == "λ" || text == "fun";
}

// Rewrites bound-variable names to b0, b1, ... in binding order so that two
// texts differing only in bound names compare equal. "fun" normalizes to "λ".
std::vector<std::string> canonical_tokens(const std::string& text) {
  std::vector<Token> tokens = tokenize(strip_comments_and_strings(text));
  std::vector<std::string> out;
  std::map<std::string, std::string> rename;
  int fresh = 0;
  size_t i = 0;
  while (i < tokens.size()) {
    const Token& tok = tokens[i];
    if (is_binder_token(tok.text)) {
      out.push_back(tok.text == "fun" ? "λ" : tok.text);
      ++i;
      int depth = 0;
      bool in_type = false;
      while (i < tokens.size()) {
        const Token& b = tokens[i];
        if (b.kind == TokKind::Open) {
          ++depth;
          out.push_back(b.text);
          ++i;
          continue;
        }
        if (b.kind == TokKind::Close) {
          --depth;
          if (depth <= 0) in_type = false;
          out.push_back(b.text);
          ++i;
          continue;
        }
        if (depth == 0 && (b.kind == TokKind::Comma || b.text == "=>")) {
          break;  // binder ends; outer loop emits the terminator
        }
        if (b.text == ":") {
          in_type = true;
          out.push_back(b.text);
          ++i;
          continue;
        }
        if (b.kind == TokKind::Ident) {
          if (!in_type) {
            auto [it, inserted] =
                rename.emplace(b.text, "b" + std::to_string(fresh));
            if (inserted) ++fresh;
            out.push_back(it->second);
          } else {
            auto it = rename.find(b.text);
            out.push_back(it == rename.end() ? b.text : it->second);
          }
          ++i;
          continue;
        }
        out.push_back(b.text);
        ++i;
      }
      continue;
    }
    if (tok.kind == TokKind::Ident) {
      auto it = rename.find(tok.text);
      out.push_back(it == rename.end() ? tok.text : it->second);
    } else {
      out.push_back(tok.text);
    }
    ++i;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Statement surgery
// ---------------------------------------------------------------------------

namespace {

// Offset of the first ":=" outside every bracket pair, or npos.
size_t first_toplevel_assign(const std::string& masked) {
  int depth = 0;
  for (size_t i = 0; i + 1 < masked.size(); ++i) {
    char c = masked[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (depth == 0 && c == ':' && masked[i + 1] == '=') return i;
  }
  return std::string::npos;
}

}  // namespace

std::string force_sorry_body(const std::string& statement) {
  const std::string masked = strip_comments_and_strings(statement);
  size_t assign = first_toplevel_assign(masked);
  std::string head =
      assign == std::string::npos ? rtrim(statement) : rtrim(statement.substr(0, assign));
  return head + " := by sorry";
}

StatementParts split_statement(const std::string& statement) {
  const std::string masked = strip_comments_and_strings(statement);
  size_t assign = first_toplevel_assign(masked);
  const size_t boundary = assign == std::string::npos ? masked.size() : assign;

  // Last top-level ':' before the proof body separates binders from the goal.
  int depth = 0;
  size_t goal_colon = std::string::npos;
  for (size_t i = 0; i < boundary; ++i) {
    char c = masked[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (depth == 0 && c == ':') goal_colon = i;
  }
  if (goal_colon == std::string::npos) {
    throw Error(Errc::UnsplittableStatement,
                "no top-level ':' separating a goal");
  }

  StatementParts parts;
  parts.goal = trim(statement.substr(goal_colon + 1, boundary - goal_colon - 1));
  if (parts.goal.empty()) {
    throw Error(Errc::UnsplittableStatement, "empty goal");
  }

  // Binder groups "(name : body)" / "{...}" / "[...]" before the goal colon.
  size_t i = 0;
  while (i < goal_colon) {
    char c = masked[i];
    if (c == '(' || c == '{' || c == '[') {
      const char close = (c == '(') ? ')' : (c == '{') ? '}' : ']';
      int inner = 1;
      size_t j = i + 1;
      size_t colon = std::string::npos;
      while (j < goal_colon && inner > 0) {
        if (masked[j] == c) ++inner;
        if (masked[j] == close) --inner;
        if (inner == 1 && masked[j] == ':' && colon == std::string::npos &&
            (j + 1 >= masked.size() || masked[j + 1] != '=')) {
          colon = j;
        }
        ++j;
      }
      const size_t group_end = j > 0 ? j - 1 : j;  // index of the closer
      if (colon != std::string::npos) {
        parts.hypotheses.push_back(
            trim(statement.substr(colon + 1, group_end - colon - 1)));
      }
      i = j;
    } else {
      ++i;
    }
  }
  return parts;
}

// ---------------------------------------------------------------------------
// Lints
// ---------------------------------------------------------------------------

namespace {

std::string line_of(const std::string& text, int line) {
  std::istringstream in(text);
  std::string current;
  for (int at = 1; std::getline(in, current); ++at) {
    if (at == line) return trim(current);
  }
  return {};
}

}  // namespace

LintReport lint_proof(const std::string& proof) {
  LintReport report;
  const std::vector<Token> tokens = tokenize(strip_comments_and_strings(proof));
  for (const Token& tok : tokens) {
    if (tok.kind != TokKind::Ident) continue;
    if (tok.text == "apply?" &&
        report.details.find(LintFlag::ProofContainsApplyQuery) ==
            report.details.end()) {
      report.flags.push_back(LintFlag::ProofContainsApplyQuery);
      report.details[LintFlag::ProofContainsApplyQuery] =
          "line " + std::to_string(tok.line) + ": " + line_of(proof, tok.line);
    }
    if ((tok.text == "sorry" || tok.text == "admit") &&
        report.details.find(LintFlag::ProofContainsSorry) ==
            report.details.end()) {
      report.flags.push_back(LintFlag::ProofContainsSorry);
      report.details[LintFlag::ProofContainsSorry] =
          "line " + std::to_string(tok.line) + ": " + line_of(proof, tok.line);
    }
  }
  return report;
}

LintReport lint_statement(const std::string& statement) {
  LintReport report;
  const StatementParts parts = split_statement(statement);

  const std::vector<std::string> goal_tokens = canonical_tokens(parts.goal);
  if (collapse_ws(parts.goal) == "True" ||
      (goal_tokens.size() == 1 && goal_tokens[0] == "True")) {
    report.flags.push_back(LintFlag::TrivialTrueGoal);
    report.details[LintFlag::TrivialTrueGoal] = "goal: " + collapse_ws(parts.goal);
  }

  for (size_t idx = 0; idx < parts.hypotheses.size(); ++idx) {
    if (canonical_tokens(parts.hypotheses[idx]) == goal_tokens) {
      report.flags.push_back(LintFlag::GoalAsAssumption);
      report.details[LintFlag::GoalAsAssumption] =
          "hypothesis " + std::to_string(idx + 1) +
          " restates the goal: " + collapse_ws(parts.hypotheses[idx]);
      break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Stub backend
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& known_tactics() {
  static const std::set<std::string> tactics = {
      "abel",        "absurd",      "aesop",          "all_goals",
      "any_goals",   "apply",       "apply?",         "assumption",
      "by_cases",    "by_contra",   "calc",           "cases",
      "change",      "choose",      "congr",          "constructor",
      "contradiction", "contrapose", "contrapose!",   "decide",
      "dsimp",       "exact",       "exact?",         "exact_mod_cast",
      "exfalso",     "ext",         "field_simp",     "fin_cases",
      "first",       "funext",      "gcongr",         "have",
      "induction",   "intro",       "intros",         "interval_cases",
      "left",        "linarith",    "linear_combination", "native_decide",
      "nlinarith",   "norm_cast",   "norm_num",       "obtain",
      "omega",       "polyrith",    "positivity",     "push_cast",
      "push_neg",    "rcases",      "refine",         "refl",
      "repeat",      "rfl",         "right",          "ring",
      "ring_nf",     "rintro",      "rw",             "rwa",
      "set",         "show",        "simp",           "simp_all",
      "simpa",       "sorry",       "specialize",     "split",
      "split_ifs",   "subst",       "tauto",          "trans",
      "trivial",     "try",         "unfold",         "use",
  };
  return tactics;
}

// Infix operators that must never be adjacent ("1 + = 2" is a syntax error).
bool is_infix_op(const std::string& text) {
  static const std::set<std::string> ops = {"+", "*", "/", "%",  "=",  "<",
                                            ">", "≤", "≥", "≠",  "^",  "<=",
                                            ">=", "=="};
  return ops.count(text) != 0;
}

class StubBackend final : public LeanVerifier::Backend {
 public:
  VerificationOutcome compile(const std::string& source,
                              const std::filesystem::path& /*file*/) override {
    VerificationOutcome outcome;
    outcome.status = CheckStatus::Pass;
    auto fail = [&](int line, const std::string& message) {
      outcome.status = CheckStatus::CompileError;
      outcome.diagnostics.push_back({"error", message, line});
    };

    const std::string masked = strip_comments_and_strings(source);

    // Bracket balance across the whole file.
    {
      std::vector<std::pair<char, int>> stack;
      int line = 1;
      for (char c : masked) {
        if (c == '\n') ++line;
        if (c == '(' || c == '[' || c == '{') stack.push_back({c, line});
        if (c == ')' || c == ']' || c == '}') {
          const char open = (c == ')') ? '(' : (c == ']') ? '[' : '{';
          if (stack.empty() || stack.back().first != open) {
            fail(line, std::string("unexpected '") + c + "'");
            return outcome;
          }
          stack.pop_back();
        }
      }
      if (!stack.empty()) {
        fail(stack.back().second,
             std::string("unclosed '") + stack.back().first + "'");
        return outcome;
      }
    }

    const std::vector<Token> tokens = tokenize(masked);

    // Locate the declaration.
    size_t decl = tokens.size();
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].text == "theorem" || tokens[i].text == "lemma" ||
          tokens[i].text == "example") {
        decl = i;
        break;
      }
    }
    if (decl == tokens.size()) {
      fail(1, "no theorem declaration found");
      return outcome;
    }

    // Find the proof-body separator ":=" at bracket depth zero.
    size_t assign = tokens.size();
    {
      int depth = 0;
      for (size_t i = decl; i < tokens.size(); ++i) {
        if (tokens[i].kind == TokKind::Open) ++depth;
        if (tokens[i].kind == TokKind::Close) --depth;
        if (depth == 0 && tokens[i].text == ":=") {
          assign = i;
          break;
        }
      }
    }
    if (assign == tokens.size()) {
      fail(tokens[decl].line, "declaration has no ':=' proof body");
      return outcome;
    }

    // The statement region must contain a goal colon.
    {
      int depth = 0;
      bool has_goal_colon = false;
      for (size_t i = decl; i < assign; ++i) {
        if (tokens[i].kind == TokKind::Open) ++depth;
        if (tokens[i].kind == TokKind::Close) --depth;
        if (depth == 0 && tokens[i].text == ":") has_goal_colon = true;
      }
      if (!has_goal_colon) {
        fail(tokens[decl].line, "declaration has no goal");
        return outcome;
      }
    }

    // Adjacent infix operators are rejected everywhere in the declaration.
    for (size_t i = decl; i + 1 < tokens.size(); ++i) {
      if (is_infix_op(tokens[i].text) && is_infix_op(tokens[i + 1].text)) {
        fail(tokens[i + 1].line, "unexpected token '" + tokens[i + 1].text +
                                     "' after '" + tokens[i].text + "'");
        return outcome;
      }
    }

    // Proof body: ":= by <tactics>" with every tactic head known.
    if (assign + 1 >= tokens.size() || tokens[assign + 1].text != "by") {
      fail(tokens[assign].line, "expected 'by' after ':='");
      return outcome;
    }
    bool head_position = true;
    bool saw_tactic = false;
    int body_line = tokens[assign + 1].line;
    int depth = 0;
    for (size_t i = assign + 2; i < tokens.size(); ++i) {
      const Token& tok = tokens[i];
      if (tok.kind == TokKind::Open) ++depth;
      if (tok.kind == TokKind::Close) --depth;
      if (tok.line != body_line && depth == 0) {
        body_line = tok.line;
        head_position = true;
      }
      if (tok.text == ";" || tok.text == "<;>") {
        head_position = true;
        continue;
      }
      if (tok.text == "·" || tok.text == "∙" || tok.text == "|") {
        head_position = true;
        continue;
      }
      if (head_position && depth == 0) {
        if (tok.kind == TokKind::Ident) {
          if (known_tactics().count(tok.text) == 0 && tok.text != "at" &&
              tok.text != "with" && tok.text != "next" && tok.text != "case") {
            fail(tok.line, "unknown tactic '" + tok.text + "'");
            return outcome;
          }
          saw_tactic = true;
        }
        head_position = false;
      }
      if (tok.text == "sorry" || tok.text == "admit") {
        bool already = false;
        for (const Diagnostic& d : outcome.diagnostics) {
          if (d.severity == "warning") already = true;
        }
        if (!already) {
          outcome.diagnostics.push_back(
              {"warning", "declaration uses 'sorry'", tok.line});
        }
      }
    }
    if (!saw_tactic) {
      fail(body_line, "empty tactic block");
      return outcome;
    }
    return outcome;
  }
};

}  // namespace

std::unique_ptr<LeanVerifier::Backend> make_stub_backend() {
  return std::make_unique<StubBackend>();
}

// ---------------------------------------------------------------------------
// Command backend
// ---------------------------------------------------------------------------

namespace {

struct RunResult {
  int exit_code = -1;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_command(const std::vector<std::string>& argv, double timeout_s) {
  RunResult result;
  int fds[2];
  if (pipe(fds) != 0) {
    result.spawn_failed = true;
    return result;
  }
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    result.spawn_failed = true;
    return result;
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(fds[1]);

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_s);
  char buf[4096];
  while (true) {
    const auto remaining = deadline - std::chrono::steady_clock::now();
    const int remaining_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count());
    if (remaining_ms <= 0) {
      result.timed_out = true;
      break;
    }
    struct pollfd pfd = {fds[0], POLLIN, 0};
    int ready = poll(&pfd, 1, std::min(remaining_ms, 200));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) continue;
    ssize_t got = read(fds[0], buf, sizeof(buf));
    if (got < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (got == 0) break;  // child closed its end
    result.output.append(buf, static_cast<size_t>(got));
  }
  close(fds[0]);

  if (result.timed_out) {
    kill(pid, SIGKILL);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;
  }
  if (result.exit_code == 127 && result.output.empty()) {
    result.spawn_failed = true;
  }
  return result;
}

std::vector<Diagnostic> parse_diagnostics(const std::string& output) {
  std::vector<Diagnostic> diags;
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    for (const char* severity : {"error", "warning", "info"}) {
      const std::string needle = std::string(severity) + ":";
      size_t at = line.find(needle);
      if (at == std::string::npos) continue;
      Diagnostic diag;
      diag.severity = severity;
      diag.message = trim(line.substr(at + needle.size()));
      // "path:LINE:COL: severity: ..." puts the line number two colons back.
      int lineno = 0;
      size_t cursor = at;
      while (cursor > 0 && (line[cursor - 1] == ' ' || line[cursor - 1] == '\t')) {
        --cursor;
      }
      if (cursor > 0 && line[cursor - 1] == ':') {
        const size_t col_colon = cursor - 1;
        const size_t line_colon =
            col_colon > 0 ? line.rfind(':', col_colon - 1) : std::string::npos;
        const size_t path_colon = (line_colon != std::string::npos && line_colon > 0)
                                      ? line.rfind(':', line_colon - 1)
                                      : std::string::npos;
        if (line_colon != std::string::npos && path_colon != std::string::npos) {
          try {
            lineno = std::stoi(
                line.substr(path_colon + 1, line_colon - path_colon - 1));
          } catch (...) {
            lineno = 0;
          }
        }
      }
      diag.line = lineno;
      diags.push_back(std::move(diag));
      break;
    }
  }
  return diags;
}

class CommandBackend final : public LeanVerifier::Backend {
 public:
  explicit CommandBackend(VerifierConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.command.empty()) {
      throw Error(Errc::ConfigError, "verifier command mode needs a command");
    }
  }

  VerificationOutcome compile(const std::string& /*source*/,
                              const std::filesystem::path& file) override {
    std::vector<std::string> argv;
    argv.reserve(cfg_.command.size());
    for (const std::string& part : cfg_.command) {
      std::string expanded = part;
      size_t at = expanded.find("{file}");
      while (at != std::string::npos) {
        expanded.replace(at, 6, file.string());
        at = expanded.find("{file}", at);
      }
      argv.push_back(std::move(expanded));
    }

    RunResult run = run_command(argv, cfg_.timeout_s);
    VerificationOutcome outcome;
    outcome.diagnostics = parse_diagnostics(run.output);
    if (run.timed_out) {
      outcome.status = CheckStatus::Timeout;
      return outcome;
    }
    if (run.spawn_failed) {
      outcome.status = CheckStatus::ToolFailure;
      outcome.diagnostics.push_back(
          {"error", "could not spawn: " + argv[0], 0});
      return outcome;
    }
    bool has_error = false;
    for (const Diagnostic& d : outcome.diagnostics) {
      if (d.severity == "error") has_error = true;
    }
    if (has_error) {
      outcome.status = CheckStatus::CompileError;
    } else if (run.exit_code == 0) {
      outcome.status = CheckStatus::Pass;
    } else {
      outcome.status = CheckStatus::ToolFailure;
      std::string tail = run.output.size() > 400
                             ? run.output.substr(run.output.size() - 400)
                             : run.output;
      outcome.diagnostics.push_back(
          {"error", "toolchain exited " + std::to_string(run.exit_code) +
                        " without diagnostics: " + collapse_ws(tail),
           0});
    }
    return outcome;
  }

 private:
  VerifierConfig cfg_;
};

}  // namespace

std::unique_ptr<LeanVerifier::Backend> make_command_backend(VerifierConfig cfg) {
  return std::make_unique<CommandBackend>(std::move(cfg));
}

// ---------------------------------------------------------------------------
// LeanVerifier
// ---------------------------------------------------------------------------

namespace {

std::string sanitize_id(const std::string& id) {
  std::string out;
  for (char c : id) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' ||
                          c == '_'
                      ? c
                      : '-');
  }
  return out.empty() ? "c" : out;
}

}  // namespace

LeanVerifier::LeanVerifier(VerifierConfig cfg, std::string run_id,
                           ClockPtr clock, std::unique_ptr<Backend> backend)
    : cfg_(std::move(cfg)),
      run_id_(sanitize_id(run_id)),
      clock_(std::move(clock)),
      backend_(std::move(backend)),
      pool_(std::max(1, cfg_.pool_size)) {
  if (cfg_.header_lines.empty()) {
    throw Error(Errc::ConfigError, "verifier header must not be empty");
  }
  if (!backend_) {
    backend_ = cfg_.mode == VerifierConfig::Mode::Stub
                   ? make_stub_backend()
                   : make_command_backend(cfg_);
  }
}

std::filesystem::path LeanVerifier::scratch_file_path(
    const std::string& candidate_id) const {
  return std::filesystem::path(cfg_.scratch_dir) / run_id_ /
         (sanitize_id(candidate_id) + ".lean");
}

VerificationOutcome LeanVerifier::run_check(const std::string& payload,
                                            const std::string& candidate_id) {
  std::string cid = candidate_id.empty()
                        ? "c" + std::to_string(auto_id_.fetch_add(1))
                        : candidate_id;
  std::string source;
  for (const std::string& line : cfg_.header_lines) {
    source += line;
    source += '\n';
  }
  source += '\n';
  source += payload;
  if (source.empty() || source.back() != '\n') source += '\n';

  const std::filesystem::path file = scratch_file_path(cid);
  write_text_file(file, source);

  SemaphoreGuard guard(pool_);
  const std::int64_t t0 = clock_->now_ms();
  VerificationOutcome outcome = backend_->compile(source, file);
  outcome.elapsed_ms = static_cast<double>(clock_->now_ms() - t0);
  return outcome;
}

VerificationOutcome LeanVerifier::check_statement(const std::string& statement,
                                                  const std::string& candidate_id) {
  return run_check(force_sorry_body(statement), candidate_id);
}

VerificationOutcome LeanVerifier::check_proof(const std::string& proof,
                                              const std::string& candidate_id) {
  return run_check(proof, candidate_id);
}

}  // namespace mathesis::verifier
