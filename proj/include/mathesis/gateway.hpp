// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mathesis/prompts.hpp"
#include "mathesis/util.hpp"

namespace mathesis::gateway {

struct BackendConfig {
  std::string name;                // role label, also the scripted subdirectory
  std::string endpoint_url;        // chat-completion endpoint (live mode)
  std::string model_id;
  std::string auth_token_env;      // env var holding the bearer token; may be empty
  int max_tokens = 2048;
  double temperature = 0.0;
  double timeout_s = 60.0;
  int max_in_flight = 4;           // concurrent requests allowed on this backend
  int max_retries = 2;             // extra attempts after a transport failure
  std::vector<double> retry_backoff_s = {1.0, 4.0};
  std::string scripted_dir;        // non-empty selects the scripted (replay) mode
};

// One request/response round trip, recorded verbatim in run ledgers.
struct ChatExchange {
  std::string backend;
  std::string request_text;
  std::string response_text;
  double latency_ms = 0.0;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
};

enum class Judgement { Appropriate, Inappropriate };

// Per-subtask consistency rating produced by the two-stage judge:
// A = perfect match, B = minor inconsistency, C = major inconsistency.
enum class Rating : char { A = 'A', B = 'B', C = 'C' };

using RatingVector = std::vector<Rating>;

char rating_letter(Rating r) noexcept;
Rating rating_from_letter(char letter);  // throws Error(UnknownRatingLabel)

// ---------------------------------------------------------------------------
// Response parsers
// ---------------------------------------------------------------------------

// Pulls Lean source out of a chat response. Preference order: the first
// fenced code block labeled lean/lean4, then the first fenced block that
// contains "theorem " or "import ", then (when the text has no fence at all)
// the region from the first "theorem " or "import " to the end of the text.
// The result has trailing whitespace removed.
// Throws Error(NoLeanContent) when no Lean material can be located.
std::string extract_lean_block(const std::string& response);

// Reads the verdict from a checker response formatted as
//   "Judgement: Appropriate" / "Judgement: Inappropriate".
// The last line matching "Judgement:" (case-insensitive) wins.
// Throws Error(UnparseableJudgement).
Judgement parse_judgement(const std::string& response);

// Collects every boxed match tag, e.g. "\box{Perfectly match}", in order of
// appearance. Label matching is case-insensitive and whitespace-tolerant.
// Throws Error(NoRatingsFound) when the response has no tags and
// Error(UnknownRatingLabel) when a tag's label is not one of the three.
RatingVector parse_ratings(const std::string& response);

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

// A chat-completion transport. `complete` bounds concurrency with the
// configured in-flight limit, retries transient transport failures with the
// configured backoff schedule, and never retries parse or auth failures.
class Backend {
 public:
  explicit Backend(BackendConfig cfg, ClockPtr clock);
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  const BackendConfig& config() const { return cfg_; }

  // template_id routes scripted replay queues; live transports ignore it.
  ChatExchange complete(const std::string& template_id, const std::string& prompt);

 protected:
  struct RawResponse {
    std::string text;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
  };

  virtual RawResponse complete_raw(const std::string& template_id,
                                   const std::string& prompt) = 0;

  BackendConfig cfg_;
  ClockPtr clock_;

 private:
  Semaphore in_flight_;
};

// Replays canned responses from <root>/<backend>/<template_id>/<seq>.txt in
// ascending numeric order. Each response is consumed exactly once per run;
// exhausting a queue raises Error(TransportError, "script exhausted ...").
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend(BackendConfig cfg, ClockPtr clock);

 protected:
  RawResponse complete_raw(const std::string& template_id,
                           const std::string& prompt) override;

 private:
  struct Queue {
    std::vector<std::filesystem::path> files;
    size_t next = 0;
  };
  Queue& queue_for(const std::string& template_id);

  std::mutex mu_;
  std::map<std::string, Queue> queues_;
};

// Live HTTP chat-completion transport (single JSON shape, bearer auth from
// the configured environment variable).
class HttpBackend : public Backend {
 public:
  HttpBackend(BackendConfig cfg, ClockPtr clock);

 protected:
  RawResponse complete_raw(const std::string& template_id,
                           const std::string& prompt) override;
};

// Picks ScriptedBackend when cfg.scripted_dir is set, HttpBackend otherwise.
std::unique_ptr<Backend> make_backend(BackendConfig cfg, ClockPtr clock);

}  // namespace mathesis::gateway
