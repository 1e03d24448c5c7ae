// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "mathesis/gateway.hpp"
#include "mathesis/leanscorer.hpp"
#include "mathesis/pipeline.hpp"
#include "mathesis/util.hpp"
#include "mathesis/verifier.hpp"

namespace mathesis::config {

struct PathsConfig {
  std::filesystem::path dataset;       // JSONL problem file
  std::filesystem::path out_dir = "out";  // run artifacts land here
};

struct ClockSpec {
  std::string mode = "system";  // "system" or "fixed"
  std::string epoch = "1970-01-01T00:00:00.000Z";  // used when mode == "fixed"
};

// Fully resolved harness configuration. Backends are keyed by role name
// (autoformalizer, prover, semantic_judge, leanscorer_judge).
struct HarnessConfig {
  std::map<std::string, gateway::BackendConfig> backends;
  verifier::VerifierConfig verifier;
  pipeline::PipelineConfig pipeline;
  leanscorer::FuzzyParams fuzzy;
  PathsConfig paths;
  ClockSpec clock;
  std::filesystem::path base_dir;       // directory of the config file
  nlohmann::ordered_json echo;          // the parsed document, for summaries

  // Builds the clock described by `clock`. Throws Error(ConfigError) on an
  // unknown mode or unparseable epoch.
  ClockPtr make_clock() const;
};

// Loads a JSON config file. String values may reference environment
// variables as ${NAME}; unset variables raise Error(ConfigError). Relative
// paths (dataset, out_dir, scripted_dir, scratch_dir) are resolved against
// the config file's directory.
HarnessConfig load_config(const std::filesystem::path& path);

// A config with library defaults everywhere and no backends bound.
HarnessConfig default_config();

}  // namespace mathesis::config
