// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/problems.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mathesis/error.hpp"
#include "mathesis/util.hpp"

namespace mathesis::bench {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(std::size_t line_no, const std::string& what) {
  std::ostringstream os;
  os << "line " << line_no << ": " << what;
  throw Error(Errc::SchemaError, os.str());
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    schema_error(line_no, std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return std::nullopt;
  }
  if (!it->is_string()) {
    schema_error(line_no, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

const std::array<std::string_view, 7>& problem_categories() {
  static const std::array<std::string_view, 7> kCategories = {
      "Functions",
      "Sequences and series",
      "Inequality",
      "Trigonometry",
      "Analytic geometry",
      "Probability and combinatorics",
      "Comprehensive questions",
  };
  return kCategories;
}

bool is_known_category(std::string_view category) {
  for (std::string_view known : problem_categories()) {
    if (known == category) {
      return true;
    }
  }
  return false;
}

std::vector<Problem> load_problems(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::IoError, "cannot open problem file: " + path.string());
  }

  std::vector<Problem> problems;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      schema_error(line_no, "not a JSON object");
    }

    Problem p;
    p.id = require_string(obj, "id", line_no);
    if (trim(p.id).empty()) {
      schema_error(line_no, "field 'id' must be non-empty");
    }
    p.nl_en = require_string(obj, "nl_en", line_no);
    if (trim(p.nl_en).empty()) {
      schema_error(line_no, "field 'nl_en' must be non-empty");
    }
    p.category = require_string(obj, "category", line_no);
    if (!is_known_category(p.category)) {
      schema_error(line_no, "unknown category '" + p.category + "'");
    }
    p.nl_zh = optional_string(obj, "nl_zh", line_no);
    p.formal_reference = optional_string(obj, "formal_reference", line_no);
    p.source = optional_string(obj, "source", line_no);

    if (!seen_ids.insert(p.id).second) {
      throw Error(Errc::DuplicateId,
                  "duplicate problem id '" + p.id + "' at line " + std::to_string(line_no));
    }
    problems.push_back(std::move(p));
  }
  return problems;
}

}  // namespace mathesis::bench
