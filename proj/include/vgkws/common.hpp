// vgkws/common.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VGKWS_COMMON_HPP_
#define VGKWS_COMMON_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vgkws {

// Malformed or inconsistent input data (files, configs).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract (bad argument, dimension mismatch).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Split { kTrain, kDev, kTest };

Split parse_split(std::string_view s);
std::string to_string(Split s);

// FNV-1a, used for vocabulary fingerprints in checkpoints.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull);

// Writes `content` to `path` atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Whitespace/punctuation tokenisation with ASCII case folding; bytes above
// 0x7f are kept verbatim so diacritised words survive untouched.
std::vector<std::string> tokenize_caption(std::string_view caption);

}  // namespace vgkws

#endif  // VGKWS_COMMON_HPP_
