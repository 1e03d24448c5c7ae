// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <climits>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mathesis/error.hpp"

namespace mathesis::gateway {

using nlohmann::json;

char rating_letter(Rating r) noexcept { return static_cast<char>(r); }

Rating rating_from_letter(char letter) {
  switch (letter) {
    case 'A': return Rating::A;
    case 'B': return Rating::B;
    case 'C': return Rating::C;
    default:
      throw Error(Errc::UnknownRatingLabel, std::string(1, letter));
  }
}

// ---------------------------------------------------------------------------
// extract_lean_block
// ---------------------------------------------------------------------------

namespace {

struct FencedBlock {
  std::string label;    // lowercased text after the opening backticks
  std::string content;  // text between the fence lines, verbatim
};

std::vector<FencedBlock> parse_fences(const std::string& text) {
  std::vector<FencedBlock> blocks;
  size_t pos = 0;
  while (true) {
    size_t open = text.find("```", pos);
    if (open == std::string::npos) break;
    size_t label_end = text.find('\n', open + 3);
    if (label_end == std::string::npos) break;  // fence with no body
    std::string label = to_lower(trim(text.substr(open + 3, label_end - open - 3)));
    size_t body_begin = label_end + 1;
    size_t close = text.find("```", body_begin);
    size_t body_end = (close == std::string::npos) ? text.size() : close;
    blocks.push_back({label, text.substr(body_begin, body_end - body_begin)});
    if (close == std::string::npos) break;
    pos = close + 3;
  }
  return blocks;
}

size_t first_lean_marker(const std::string& text) {
  size_t at_theorem = text.find("theorem ");
  size_t at_import = text.find("import ");
  return std::min(at_theorem, at_import);
}

}  // namespace

std::string extract_lean_block(const std::string& response) {
  const std::vector<FencedBlock> blocks = parse_fences(response);
  for (const FencedBlock& block : blocks) {
    if (block.label == "lean4" || block.label == "lean") {
      return rtrim(block.content);
    }
  }
  for (const FencedBlock& block : blocks) {
    size_t marker = first_lean_marker(block.content);
    if (marker != std::string::npos) {
      return rtrim(block.content.substr(marker));
    }
  }
  if (blocks.empty()) {
    size_t marker = first_lean_marker(response);
    if (marker != std::string::npos) {
      return rtrim(response.substr(marker));
    }
  }
  throw Error(Errc::NoLeanContent, "no Lean code found in response");
}

// ---------------------------------------------------------------------------
// parse_judgement
// ---------------------------------------------------------------------------

Judgement parse_judgement(const std::string& response) {
  std::optional<std::string> verdict_line;
  size_t start = 0;
  while (start <= response.size()) {
    size_t end = response.find('\n', start);
    if (end == std::string::npos) end = response.size();
    std::string line = response.substr(start, end - start);
    if (to_lower(line).find("judgement:") != std::string::npos) {
      verdict_line = line;
    }
    if (end == response.size()) break;
    start = end + 1;
  }
  if (verdict_line) {
    std::string lower = to_lower(*verdict_line);
    size_t colon = lower.find("judgement:") + std::string("judgement:").size();
    // Skip spacing and decoration like "[", "*", quotes.
    while (colon < lower.size() &&
           !std::isalpha(static_cast<unsigned char>(lower[colon]))) {
      ++colon;
    }
    size_t word_end = colon;
    while (word_end < lower.size() &&
           std::isalpha(static_cast<unsigned char>(lower[word_end]))) {
      ++word_end;
    }
    std::string word = lower.substr(colon, word_end - colon);
    if (word == "appropriate") return Judgement::Appropriate;
    if (word == "inappropriate") return Judgement::Inappropriate;
  }
  throw Error(Errc::UnparseableJudgement,
              "no usable 'Judgement:' line in response");
}

// ---------------------------------------------------------------------------
// parse_ratings
// ---------------------------------------------------------------------------

RatingVector parse_ratings(const std::string& response) {
  RatingVector ratings;
  size_t pos = 0;
  while (true) {
    size_t tag = response.find("\\box", pos);
    if (tag == std::string::npos) break;
    size_t cur = tag + 4;
    if (response.compare(cur, 2, "ed") == 0) cur += 2;  // accept \boxed{...}
    while (cur < response.size() &&
           std::isspace(static_cast<unsigned char>(response[cur]))) {
      ++cur;
    }
    if (cur >= response.size() || response[cur] != '{') {
      pos = tag + 4;
      continue;
    }
    size_t close = response.find('}', cur + 1);
    if (close == std::string::npos) break;
    std::string label =
        to_lower(collapse_ws(response.substr(cur + 1, close - cur - 1)));
    if (label == "perfectly match") {
      ratings.push_back(Rating::A);
    } else if (label == "minor inconsistency") {
      ratings.push_back(Rating::B);
    } else if (label == "major inconsistency") {
      ratings.push_back(Rating::C);
    } else {
      throw Error(Errc::UnknownRatingLabel, label);
    }
    pos = close + 1;
  }
  if (ratings.empty()) {
    throw Error(Errc::NoRatingsFound, "response contains no boxed match tags");
  }
  return ratings;
}

// ---------------------------------------------------------------------------
// Backend base: in-flight bound, retry schedule, timing
// ---------------------------------------------------------------------------

Backend::Backend(BackendConfig cfg, ClockPtr clock)
    : cfg_(std::move(cfg)),
      clock_(std::move(clock)),
      in_flight_(std::max(1, cfg_.max_in_flight)) {}

ChatExchange Backend::complete(const std::string& template_id,
                               const std::string& prompt) {
  SemaphoreGuard guard(in_flight_);
  const bool retryable = cfg_.scripted_dir.empty();  // replay never heals
  int attempt = 0;
  while (true) {
    std::int64_t t0 = clock_->now_ms();
    try {
      RawResponse response = complete_raw(template_id, prompt);
      ChatExchange exchange;
      exchange.backend = cfg_.name;
      exchange.request_text = prompt;
      exchange.response_text = std::move(response.text);
      exchange.latency_ms = static_cast<double>(clock_->now_ms() - t0);
      exchange.prompt_tokens = response.prompt_tokens;
      exchange.completion_tokens = response.completion_tokens;
      return exchange;
    } catch (const Error& err) {
      if (!retryable || err.code() != Errc::TransportError ||
          attempt >= cfg_.max_retries) {
        throw;
      }
      double backoff = 0.0;
      if (!cfg_.retry_backoff_s.empty()) {
        size_t slot = std::min<size_t>(attempt, cfg_.retry_backoff_s.size() - 1);
        backoff = cfg_.retry_backoff_s[slot];
      }
      if (backoff > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      }
      ++attempt;
    }
  }
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(BackendConfig cfg, ClockPtr clock)
    : Backend(std::move(cfg), std::move(clock)) {
  if (!std::filesystem::is_directory(cfg_.scripted_dir)) {
    throw Error(Errc::ConfigError,
                "scripted response root not found: " + cfg_.scripted_dir);
  }
}

ScriptedBackend::Queue& ScriptedBackend::queue_for(const std::string& template_id) {
  auto it = queues_.find(template_id);
  if (it != queues_.end()) return it->second;

  Queue queue;
  std::filesystem::path dir =
      std::filesystem::path(cfg_.scripted_dir) / cfg_.name / template_id;
  if (std::filesystem::is_directory(dir)) {
    std::vector<std::pair<long, std::filesystem::path>> entries;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
      const std::string stem = entry.path().stem().string();
      bool numeric = !stem.empty() &&
                     std::all_of(stem.begin(), stem.end(), [](char c) {
                       return std::isdigit(static_cast<unsigned char>(c)) != 0;
                     });
      entries.emplace_back(numeric ? std::stol(stem) : LONG_MAX, entry.path());
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                return a.second.filename() < b.second.filename();
              });
    for (auto& [seq, path] : entries) queue.files.push_back(std::move(path));
  }
  return queues_.emplace(template_id, std::move(queue)).first->second;
}

Backend::RawResponse ScriptedBackend::complete_raw(
    const std::string& template_id, const std::string& /*prompt*/) {
  std::filesystem::path next;
  {
    std::lock_guard lock(mu_);
    Queue& queue = queue_for(template_id);
    if (queue.next >= queue.files.size()) {
      throw Error(Errc::TransportError,
                  "script exhausted for " + cfg_.name + "/" + template_id);
    }
    next = queue.files[queue.next++];
  }
  return {read_text_file(next), std::nullopt, std::nullopt};
}

// ---------------------------------------------------------------------------
// HttpBackend
// ---------------------------------------------------------------------------

namespace {

// Splits "http://host:port/some/path" into client base and request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw Error(Errc::ConfigError, "endpoint_url missing scheme: " + url);
  }
  size_t path_at = url.find('/', scheme + 3);
  if (path_at == std::string::npos) return {url, "/"};
  return {url.substr(0, path_at), url.substr(path_at)};
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig cfg, ClockPtr clock)
    : Backend(std::move(cfg), std::move(clock)) {
  if (cfg_.endpoint_url.empty()) {
    throw Error(Errc::ConfigError,
                "backend '" + cfg_.name + "' has no endpoint_url");
  }
}

Backend::RawResponse HttpBackend::complete_raw(
    const std::string& /*template_id*/, const std::string& prompt) {
  auto [base, path] = split_url(cfg_.endpoint_url);
  httplib::Client client(base);
  const auto timeout_us =
      static_cast<time_t>(cfg_.timeout_s * 1'000'000.0);
  client.set_connection_timeout(timeout_us / 1'000'000, timeout_us % 1'000'000);
  client.set_read_timeout(timeout_us / 1'000'000, timeout_us % 1'000'000);
  client.set_write_timeout(timeout_us / 1'000'000, timeout_us % 1'000'000);

  httplib::Headers headers;
  if (!cfg_.auth_token_env.empty()) {
    const char* token = std::getenv(cfg_.auth_token_env.c_str());
    if (token != nullptr && token[0] != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  json body = {
      {"model", cfg_.model_id},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"max_tokens", cfg_.max_tokens},
      {"temperature", cfg_.temperature},
  };

  auto started = std::chrono::steady_clock::now();
  httplib::Result res = client.Post(path, headers, body.dump(), "application/json");
  double elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  if (!res) {
    switch (res.error()) {
      case httplib::Error::ConnectionTimeout:
        throw Error(Errc::Timeout, "connect timed out: " + cfg_.endpoint_url);
      case httplib::Error::Read:
      case httplib::Error::Write:
        if (elapsed_s >= cfg_.timeout_s * 0.9) {
          throw Error(Errc::Timeout, "request timed out after " +
                                         std::to_string(elapsed_s) + "s");
        }
        throw Error(Errc::TransportError, "connection dropped mid-request");
      default:
        throw Error(Errc::TransportError,
                    "transport failure: " + httplib::to_string(res.error()));
    }
  }
  if (res->status == 401 || res->status == 403 || res->status == 429) {
    throw Error(Errc::BackendRefused,
                "http status " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(Errc::TransportError,
                "http status " + std::to_string(res->status));
  }

  json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.contains("choices") ||
      !parsed["choices"].is_array() || parsed["choices"].empty() ||
      !parsed["choices"][0].contains("message") ||
      !parsed["choices"][0]["message"].contains("content") ||
      !parsed["choices"][0]["message"]["content"].is_string()) {
    throw Error(Errc::TransportError, "malformed chat completion response");
  }
  RawResponse raw;
  raw.text = parsed["choices"][0]["message"]["content"].get<std::string>();
  if (parsed.contains("usage") && parsed["usage"].is_object()) {
    const json& usage = parsed["usage"];
    if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number_integer()) {
      raw.prompt_tokens = usage["prompt_tokens"].get<int>();
    }
    if (usage.contains("completion_tokens") &&
        usage["completion_tokens"].is_number_integer()) {
      raw.completion_tokens = usage["completion_tokens"].get<int>();
    }
  }
  return raw;
}

std::unique_ptr<Backend> make_backend(BackendConfig cfg, ClockPtr clock) {
  if (!cfg.scripted_dir.empty()) {
    return std::make_unique<ScriptedBackend>(std::move(cfg), std::move(clock));
  }
  return std::make_unique<HttpBackend>(std::move(cfg), std::move(clock));
}

}  // namespace mathesis::gateway
