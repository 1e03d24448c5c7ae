// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/config.hpp"

#include <cctype>
#include <cstdlib>
#include <utility>

#include "mathesis/error.hpp"

namespace mathesis::config {

namespace {

using nlohmann::ordered_json;

// Replaces every ${NAME} with the value of the environment variable NAME.
std::string interpolate_env(const std::string& value) {
  std::string out;
  out.reserve(value.size());
  std::size_t i = 0;
  while (i < value.size()) {
    if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
      const std::size_t name_begin = i + 2;
      std::size_t j = name_begin;
      while (j < value.size() && (std::isalnum(static_cast<unsigned char>(value[j])) ||
                                  value[j] == '_')) {
        ++j;
      }
      if (j > name_begin && j < value.size() && value[j] == '}') {
        const std::string name = value.substr(name_begin, j - name_begin);
        const char* env = std::getenv(name.c_str());
        if (env == nullptr) {
          throw Error(Errc::ConfigError,
                      "environment variable '" + name + "' is not set");
        }
        out += env;
        i = j + 1;
        continue;
      }
    }
    out += value[i];
    ++i;
  }
  return out;
}

void interpolate_tree(ordered_json& node) {
  if (node.is_string()) {
    node = interpolate_env(node.get<std::string>());
  } else if (node.is_object() || node.is_array()) {
    for (auto& child : node) {
      interpolate_tree(child);
    }
  }
}

std::filesystem::path resolve_path(const std::filesystem::path& base,
                                   const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) {
    return p;
  }
  return base / p;
}

gateway::BackendConfig parse_backend(const std::string& role, const ordered_json& obj,
                                     const std::filesystem::path& base) {
  if (!obj.is_object()) {
    throw Error(Errc::ConfigError, "backend '" + role + "' must be an object");
  }
  gateway::BackendConfig cfg;
  cfg.name = obj.value("name", role);
  cfg.endpoint_url = obj.value("endpoint_url", std::string());
  cfg.model_id = obj.value("model_id", std::string());
  cfg.auth_token_env = obj.value("auth_token_env", std::string());
  cfg.max_tokens = obj.value("max_tokens", cfg.max_tokens);
  cfg.temperature = obj.value("temperature", cfg.temperature);
  cfg.timeout_s = obj.value("timeout_s", cfg.timeout_s);
  cfg.max_in_flight = obj.value("max_in_flight", cfg.max_in_flight);
  cfg.max_retries = obj.value("max_retries", cfg.max_retries);
  if (obj.contains("retry_backoff_s")) {
    cfg.retry_backoff_s = obj.at("retry_backoff_s").get<std::vector<double>>();
  }
  std::string scripted = obj.value("scripted_dir", std::string());
  if (!scripted.empty()) {
    cfg.scripted_dir = resolve_path(base, scripted).string();
  }
  if (cfg.scripted_dir.empty() && cfg.endpoint_url.empty()) {
    throw Error(Errc::ConfigError,
                "backend '" + role + "' needs either scripted_dir or endpoint_url");
  }
  return cfg;
}

verifier::VerifierConfig parse_verifier(const ordered_json& obj,
                                        const std::filesystem::path& base) {
  verifier::VerifierConfig cfg;
  if (obj.is_null()) {
    return cfg;
  }
  if (!obj.is_object()) {
    throw Error(Errc::ConfigError, "verifier section must be an object");
  }
  const std::string mode = obj.value("mode", std::string("stub"));
  if (mode == "stub") {
    cfg.mode = verifier::VerifierConfig::Mode::Stub;
  } else if (mode == "command") {
    cfg.mode = verifier::VerifierConfig::Mode::Command;
  } else {
    throw Error(Errc::ConfigError, "unknown verifier mode '" + mode + "'");
  }
  if (obj.contains("command")) {
    cfg.command = obj.at("command").get<std::vector<std::string>>();
  }
  if (cfg.mode == verifier::VerifierConfig::Mode::Command && cfg.command.empty()) {
    throw Error(Errc::ConfigError, "verifier mode 'command' requires a command");
  }
  if (obj.contains("scratch_dir")) {
    cfg.scratch_dir = resolve_path(base, obj.at("scratch_dir").get<std::string>()).string();
  }
  if (obj.contains("header_lines")) {
    cfg.header_lines = obj.at("header_lines").get<std::vector<std::string>>();
  }
  cfg.timeout_s = obj.value("timeout_s", cfg.timeout_s);
  cfg.pool_size = obj.value("pool_size", cfg.pool_size);
  return cfg;
}

pipeline::PipelineConfig parse_pipeline(const ordered_json& obj) {
  pipeline::PipelineConfig cfg;
  if (obj.is_null()) {
    return cfg;
  }
  if (!obj.is_object()) {
    throw Error(Errc::ConfigError, "pipeline section must be an object");
  }
  cfg.sample_budget = obj.value("sample_budget", cfg.sample_budget);
  cfg.prover_budget = obj.value("prover_budget", cfg.prover_budget);
  cfg.alpha = obj.value("alpha", cfg.alpha);
  cfg.concurrency = obj.value("concurrency", cfg.concurrency);
  cfg.seed = obj.value("seed", cfg.seed);
  cfg.autoformalize_template =
      obj.value("autoformalize_template", cfg.autoformalize_template);
  return cfg;
}

leanscorer::FuzzyParams parse_fuzzy(const ordered_json& obj) {
  leanscorer::FuzzyParams params;
  if (obj.is_null()) {
    return params;
  }
  if (!obj.is_object()) {
    throw Error(Errc::ConfigError, "fuzzy section must be an object");
  }
  params.f_a = obj.value("f_a", params.f_a);
  params.f_b = obj.value("f_b", params.f_b);
  params.f_c = obj.value("f_c", params.f_c);
  params.minor_penalty_single = obj.value("minor_penalty_single", params.minor_penalty_single);
  params.minor_penalty_multi = obj.value("minor_penalty_multi", params.minor_penalty_multi);
  params.alpha = obj.value("alpha", params.alpha);
  return params;
}

}  // namespace

ClockPtr HarnessConfig::make_clock() const {
  if (clock.mode == "system") {
    return system_clock_ptr();
  }
  if (clock.mode == "fixed") {
    return std::make_shared<FixedClock>(parse_rfc3339_ms(clock.epoch));
  }
  throw Error(Errc::ConfigError, "unknown clock mode '" + clock.mode + "'");
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    throw Error(Errc::ConfigError, "cannot read config file: " + path.string());
  }
  ordered_json doc = ordered_json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(Errc::ConfigError, "config file is not a JSON object: " + path.string());
  }
  interpolate_tree(doc);

  HarnessConfig cfg;
  cfg.base_dir = std::filesystem::absolute(path).parent_path();
  cfg.echo = doc;

  if (doc.contains("backends")) {
    const auto& backends = doc.at("backends");
    if (!backends.is_object()) {
      throw Error(Errc::ConfigError, "backends section must be an object");
    }
    for (const auto& [role, spec] : backends.items()) {
      cfg.backends.emplace(role, parse_backend(role, spec, cfg.base_dir));
    }
  }
  cfg.verifier = parse_verifier(doc.value("verifier", ordered_json(nullptr)), cfg.base_dir);
  cfg.pipeline = parse_pipeline(doc.value("pipeline", ordered_json(nullptr)));
  cfg.fuzzy = parse_fuzzy(doc.value("fuzzy", ordered_json(nullptr)));
  cfg.pipeline.validate();
  cfg.fuzzy.validate();

  if (doc.contains("paths")) {
    const auto& paths = doc.at("paths");
    if (!paths.is_object()) {
      throw Error(Errc::ConfigError, "paths section must be an object");
    }
    cfg.paths.dataset =
        resolve_path(cfg.base_dir, paths.value("dataset", std::string()));
    cfg.paths.out_dir =
        resolve_path(cfg.base_dir, paths.value("out_dir", std::string("out")));
  }

  if (doc.contains("clock")) {
    const auto& clock = doc.at("clock");
    if (!clock.is_object()) {
      throw Error(Errc::ConfigError, "clock section must be an object");
    }
    cfg.clock.mode = clock.value("mode", cfg.clock.mode);
    cfg.clock.epoch = clock.value("epoch", cfg.clock.epoch);
    if (cfg.clock.mode != "system" && cfg.clock.mode != "fixed") {
      throw Error(Errc::ConfigError, "unknown clock mode '" + cfg.clock.mode + "'");
    }
  }
  return cfg;
}

HarnessConfig default_config() {
  HarnessConfig cfg;
  cfg.base_dir = std::filesystem::current_path();
  cfg.echo = ordered_json::object();
  return cfg;
}

}  // namespace mathesis::config
