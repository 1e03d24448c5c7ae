// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

namespace mathesis {

// ---------------------------------------------------------------------------
// Clock
//
// All timestamps and durations that end up in run artifacts go through this
// interface. Tests and reproducible runs inject a FixedClock so that two runs
// over the same inputs produce byte-identical output files.
// ---------------------------------------------------------------------------

class Clock {
 public:
  virtual ~Clock() = default;
  // Milliseconds since the Unix epoch, UTC.
  virtual std::int64_t now_ms() const = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() const override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch())
        .count();
  }
};

// Always reports the same instant; durations computed against it are zero.
class FixedClock final : public Clock {
 public:
  explicit FixedClock(std::int64_t epoch_ms) : epoch_ms_(epoch_ms) {}
  std::int64_t now_ms() const override { return epoch_ms_; }

 private:
  std::int64_t epoch_ms_;
};

using ClockPtr = std::shared_ptr<const Clock>;

ClockPtr system_clock_ptr();

// "2026-01-01T00:00:00Z" (second precision, UTC). Inverse of parse_rfc3339_ms.
std::string format_rfc3339_ms(std::int64_t epoch_ms);
std::int64_t parse_rfc3339_ms(const std::string& text);  // throws Error(ConfigError)

// ---------------------------------------------------------------------------
// Semaphore
//
// Counting semaphore with a runtime-chosen limit; used to bound in-flight
// backend requests and concurrent compiler invocations.
// ---------------------------------------------------------------------------

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int count_;
};

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(Semaphore& sem) : sem_(sem) { sem_.acquire(); }
  ~SemaphoreGuard() { sem_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  Semaphore& sem_;
};

// ---------------------------------------------------------------------------
// Small string / file helpers
// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);  // throws Error(IoError)
void write_text_file(const std::filesystem::path& path, const std::string& body);

std::string trim(std::string_view text);
std::string rtrim(std::string_view text);
std::string to_lower(std::string_view text);
// Collapses runs of whitespace (including newlines) to single spaces and trims.
std::string collapse_ws(std::string_view text);

}  // namespace mathesis
