// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mathesis::bench {

// One benchmark problem. `nl_en` is the statement the harness formalizes;
// the optional fields are provenance carried through to reports.
struct Problem {
  std::string id;
  std::string nl_en;
  std::optional<std::string> nl_zh;
  std::optional<std::string> formal_reference;
  std::string category;
  std::optional<std::string> source;
};

// The closed list of problem categories accepted by dataset loading.
const std::array<std::string_view, 7>& problem_categories();
bool is_known_category(std::string_view category);

// Loads a JSONL problem file. Every line must carry id, nl_en, and a known
// category. Violations raise Error(SchemaError) naming the offending line
// number; repeated ids raise Error(DuplicateId).
std::vector<Problem> load_problems(const std::filesystem::path& path);

}  // namespace mathesis::bench
