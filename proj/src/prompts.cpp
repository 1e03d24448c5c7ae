// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "mathesis/error.hpp"

namespace mathesis::gateway {

namespace {

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

// Returns the placeholder name if `body[pos]` starts a `{name}` token,
// otherwise an empty string.
std::string placeholder_at(std::string_view body, size_t pos) {
  if (body[pos] != '{' || pos + 1 >= body.size()) return {};
  size_t cur = pos + 1;
  if (!is_name_start(body[cur])) return {};
  while (cur < body.size() && is_name_char(body[cur])) ++cur;
  if (cur >= body.size() || body[cur] != '}') return {};
  return std::string(body.substr(pos + 1, cur - pos - 1));
}

const char kHeraldBody[] =
    R"([Question]:
{statement}

You are an expert in formal mathematics. Your task is to convert the above [question] to lean 4 theorems by completing the following lean 4 code:

```lean4
import Mathlib
import Aesop
set_option maxHeartbeats 0
set_option pp.numericTypes true
set_option pp.coercions true
set_option pp.letVarTypes true
set_option pp.structureInstanceTypes true
set_option pp.instanceTypes true
set_option pp.mvars.withType true
set_option pp.funBinderTypes true
set_option pp.piBinderTypes true
open BigOperators Real Nat Topology Rat

{informal_comment}
)";

const char kGenericBody[] =
    R"(You are an expert in formal mathematics. Your task is to translate the given natural language mathematical statement into a formal Lean 4 theorem.

[Natural language statement]:
{statement}

Please convert this statement into a precise formal Lean 4 theorem. Follow these guidelines:

1. Start with "theorem" followed by a unique name or the provided ID if available
2. Define the types of all variables (e.g., a : ℝ for real numbers)
3. Use appropriate mathematical symbols and notation
4. End with ":= by sorry" to indicate the proof will be completed later
5. Your formalization must exactly capture the mathematical meaning of the statement

Formal Lean 4 theorem: )";

const char kProverBody[] =
    R"(Complete the following Lean 4 code:

```lean4
{formal_statement}
)";

const char kSemanticCheckBody[] =
    R"(You will receive a natural language math problem statement, along with its formal statement in LEAN 4 and, in some cases, a description of mathematical terms. Please evaluate whether the formal LEAN statement appropriately translates the natural language statement based on the following criteria. They are considered different if any of the criteria are not satisfied.

1. Key Elements: The fundamental mathematical components, including variables, constants, operations, domain, and codomain are correctly represented in LEAN code.
2. Mathematical Accuracy: The mathematical relationships and expressions should be interpreted consistently during translation.
3. Structural Fidelity: The translation aligns closely with the original problem, maintaining its structure and purpose.
4. Comprehensiveness: All conditions, constraints, and objectives stated in the natural language statement are mathematically included in the LEAN translation.

When doing evaluation, break down each problem statement into components, match the components, and evaluate their equivalence. Think step-by-step and explain all of your reasonings. Your answer should be in the following format:

Thought: [Your Answer]
Judgement: [Your Answer, one of {Appropriate, Inappropriate}]

[Natural language statement]:
{statement}

[LEAN 4 formal statement]:
{formal_statement}
)";

const char kDecomposeBody[] =
    R"(Help me list the conditions and conclusions in this problem (using specific mathematical formulas), without solving it:

Here is an example:
[Problem]: The sequence a_n satisfies a_1 = 1, a_2 = 2, a_{n + 2} = 2a_{n + 1} - a_n + 2. Let b_n = a_{n + 1} - a_n. Prove that b_n is an arithmetic sequence.

[Conditions and Conclusions]:
Conditions:
1. a_1 = 1
2. a_2 = 2
3. ∀ n ≥ 1, a_{n + 2} = 2a_{n + 1} - a_n + 2
4. ∀ n ≥ 1, b_n = a_{n + 1} - a_n

Conclusion:
- b_n is an arithmetic sequence, i.e., ∃ d ∈ ℝ, ∀ n ≥ 1, b_{n + 1} - b_n = d.

Now, please help me extract the conditions and conclusions for this problem in the same way (using specific mathematical formulas), without solving it:
[Problem]: {informal_statement}

[Conditions and Conclusions]:
)";

// The worked example embedded in the evaluation prompt. It doubles as the
// reference fixture for parse_ratings: eight boxed tags, in order
// A A A B B A C A.
const char kEvaluateOneShot[] =
    R"(Let's compare the mathematical conditions and conclusions with the Lean 4 formal statement one by one:

1. **q is a natural number greater than 1**:
   - Math: q ∈ ℕ, q > 1.
   - Lean: `(hq : 1 < q)`.
   - Match: \box{Perfectly match}.

2. **n is a natural number greater than 1**:
   - Math: n ∈ ℕ, n > 1.
   - Lean: `(hn : 1 < n)`.
   - Match: \box{Perfectly match}.

3. **Set M = {0, 1, 2, ..., q - 1}**:
   - Math: M is explicitly defined as this set.
   - Lean: `(M : Finset ℕ := Finset.range q)`.
   - Detailed interpretation: `Finset.range q` is `{0, 1, ..., q - 1}`.
   - Match: \box{Perfectly match}.

4. **Set A definition**:
   - Math: A = {x | x = ∑_{i = 1}^n x_i q^{i - 1}, x_i ∈ M}.
   - Lean: `A : Set ℕ := {x | ∃ (x_vec : ℕ → ℕ), (∀ i, x_vec i ∈ M) ∧ x = ∑ i in Finset.range n, x_vec (i + 1) * q ^ i}`.
   - Detailed interpretation: In Lean, `x_vec` is indexed from `1` to `n` (since `i + 1` ranges from `1` to `n`), but the math defines x_i for i = 1, 2, ..., n. This is actually consistent, but the Lean representation is slightly more general (allowing `x_vec` to be a function on all naturals, but only using `x_vec (i + 1)` for `i` in `Finset.range n`). The Lean definition is technically correct but slightly more abstract than the math. However, it captures the same idea.
   - Match: \box{Minor inconsistency}.

5. **s, t ∈ A with specific expansions**:
   - Math: s = ∑_{i = 1}^n a_i q^{i - 1}, t = ∑_{i = 1}^n b_i q^{i - 1}, with a_i, b_i ∈ M.
   - Lean: `s = ∑ i in Finset.range n, a (i + 1) * q ^ i`, `t = ∑ i in Finset.range n, b (i + 1) * q ^ i`, with `∀ i, a i ∈ M` and `∀ i, b i ∈ M`.
   - Detailed interpretation: The Lean version uses `a (i + 1)` and `b (i + 1)` to match the indexing in the sum, which is equivalent to the math but slightly indirect. The math directly uses a_i for i = 1, ..., n, while Lean uses `a i` for all `i` but only evaluates at `i + 1`. The Lean version is correct but not a literal translation.
   - Match: \box{Minor inconsistency}.

6. **a_n < b_n**:
   - Math: a_n < b_n.
   - Lean: `(hab : a n < b n)`.
   - Match: \box{Perfectly match}.

7. **Conclusion s < t**:
   - Math: s < t.
   - Lean: `s <= t`.
   - Match: \box{Major inconsistency}.

### Check for missing conditions / implicit conditions:
   - No missing conditions / implicit conditions
   - Match: \box{Perfectly match}.)";

std::string evaluate_body() {
  std::string body =
      "Here is a math question and a lean 4 statement. Compare the conditions "
      "and conclusions in this code with the mathematical ones, matching them "
      "one by one to see if the formal statement is an appropriate translation "
      "of the mathematical condition by assigning one of three tags (Perfectly "
      "match; Minor inconsistency; Major inconsistency). Then, audit for "
      "missing/implicit conditions. Judge with extremely strict standards—any "
      "minor inconsistency will be considered a mismatch. Special attention to "
      "triangle angle-side correspondence. If the question explicitly mentions "
      "\"opposite angles/sides\", this correspondence must be clearly stated "
      "and correct.\n"
      "**Stop immediately** after evaluating all pairs. Do **not** summarize "
      "or analyze further.\n"
      "\n"
      "Output Format:\n";
  body += kEvaluateOneShot;
  body +=
      "\n"
      "\n"
      "-----------------\n"
      "\n"
      "Question:\n"
      "{informal_statement}\n"
      "\n"
      "Mathematical conditions and conclusions:\n"
      "{math_conditions}\n"
      "\n"
      "Lean 4 formal statement:\n"
      "{formal_statement}\n"
      "\n"
      "Output:\n";
  return body;
}

std::vector<PromptTemplate> build_registry() {
  std::vector<PromptTemplate> reg;
  reg.push_back({"autoformalize_herald_style",
                 {"statement", "informal_comment"},
                 kHeraldBody});
  reg.push_back({"autoformalize_generic", {"statement"}, kGenericBody});
  reg.push_back({"prover", {"formal_statement"}, kProverBody});
  reg.push_back({"semantic_check",
                 {"statement", "formal_statement"},
                 kSemanticCheckBody});
  reg.push_back({"leanscorer_decompose", {"informal_statement"}, kDecomposeBody});
  reg.push_back({"leanscorer_evaluate",
                 {"informal_statement", "math_conditions", "formal_statement"},
                 evaluate_body()});
  return reg;
}

}  // namespace

const std::vector<PromptTemplate>& prompt_templates() {
  static const std::vector<PromptTemplate> registry = build_registry();
  return registry;
}

const PromptTemplate& find_template(std::string_view id) {
  for (const PromptTemplate& tpl : prompt_templates()) {
    if (tpl.id == id) return tpl;
  }
  throw Error(Errc::UnknownTemplate, std::string(id));
}

std::string substitute_placeholders(std::string_view body,
                                    const Bindings& bindings) {
  std::string out;
  out.reserve(body.size());
  size_t pos = 0;
  while (pos < body.size()) {
    if (body[pos] == '{') {
      std::string name = placeholder_at(body, pos);
      if (!name.empty()) {
        auto it = bindings.find(name);
        if (it != bindings.end()) {
          out += it->second;
          pos += name.size() + 2;
          continue;
        }
      }
    }
    out.push_back(body[pos]);
    ++pos;
  }
  return out;
}

std::vector<std::string> scan_placeholders(std::string_view body) {
  std::vector<std::string> names;
  for (size_t pos = 0; pos < body.size(); ++pos) {
    if (body[pos] != '{') continue;
    std::string name = placeholder_at(body, pos);
    if (!name.empty() && std::find(names.begin(), names.end(), name) == names.end()) {
      names.push_back(name);
    }
  }
  return names;
}

std::string render_prompt(std::string_view template_id, const Bindings& bindings) {
  const PromptTemplate& tpl = find_template(template_id);
  // Only declared placeholders participate; stray bindings never touch the body.
  Bindings declared;
  for (const std::string& name : tpl.placeholders) {
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw Error(Errc::MissingBinding,
                  tpl.id + " requires placeholder '" + name + "'");
    }
    declared.emplace(name, it->second);
  }
  return substitute_placeholders(tpl.body, declared);
}

}  // namespace mathesis::gateway
