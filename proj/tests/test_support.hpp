// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#ifndef MATHESIS_FIXTURE_DIR
#define MATHESIS_FIXTURE_DIR ""
#endif

namespace mathesis::testing {

inline std::filesystem::path fixture_dir() {
  return std::filesystem::path(MATHESIS_FIXTURE_DIR);
}

// Creates a fresh directory under the system temp root and removes it (and
// everything in it) when the guard leaves scope.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "mathesis-test") {
    static std::atomic<unsigned> counter{0};
    const unsigned id = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(id));
    std::filesystem::create_directories(path_);
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace mathesis::testing
