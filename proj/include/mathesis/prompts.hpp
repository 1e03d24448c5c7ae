// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mathesis::gateway {

// A chat prompt template. `body` contains `{name}` placeholders; every
// placeholder that appears in the body is listed in `placeholders`.
struct PromptTemplate {
  std::string id;
  std::vector<std::string> placeholders;
  std::string body;
};

using Bindings = std::map<std::string, std::string>;

// The fixed template registry. Ids:
//   autoformalize_herald_style  {statement, informal_comment}
//   autoformalize_generic       {statement}
//   prover                      {formal_statement}
//   semantic_check              {statement, formal_statement}
//   leanscorer_decompose        {informal_statement}
//   leanscorer_evaluate         {informal_statement, math_conditions, formal_statement}
const std::vector<PromptTemplate>& prompt_templates();

// Throws Error(UnknownTemplate).
const PromptTemplate& find_template(std::string_view id);

// Substitutes every declared placeholder in a single left-to-right pass.
// Substituted values are inserted verbatim and never re-scanned, so braces
// inside values survive untouched. Throws Error(MissingBinding) when a
// declared placeholder has no binding, Error(UnknownTemplate) for bad ids.
std::string render_prompt(std::string_view template_id, const Bindings& bindings);

// Raw single-pass substitution used by render_prompt: replaces `{name}` only
// for names present in `bindings`; all other text is left as-is.
std::string substitute_placeholders(std::string_view body, const Bindings& bindings);

// All `{name}` tokens found in a body (used to validate the registry).
std::vector<std::string> scan_placeholders(std::string_view body);

}  // namespace mathesis::gateway
