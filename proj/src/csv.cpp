// vgkws/csv.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "vgkws/common.hpp"

namespace vgkws {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<CsvRow> read_csv(const std::filesystem::path& path,
                             const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());

  std::vector<CsvRow> rows;
  std::string line;
  int line_number = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != expected_header) {
        throw DataError(path.string() + ":1: expected header '" + expected_header +
                        "', got '" + line + "'");
      }
      saw_header = true;
      continue;
    }
    rows.push_back(CsvRow{split_fields(line), line_number});
  }
  if (!saw_header) throw DataError(path.string() + ": empty file, missing header");
  return rows;
}

double parse_double_field(const std::string& field, const std::filesystem::path& path,
                          int line_number, const char* what) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw DataError(path.string() + ":" + std::to_string(line_number) + ": bad " +
                    what + " value '" + field + "'");
  }
  return value;
}

long parse_int_field(const std::string& field, const std::filesystem::path& path,
                     int line_number, const char* what) {
  long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw DataError(path.string() + ":" + std::to_string(line_number) + ": bad " +
                    what + " value '" + field + "'");
  }
  return value;
}

}  // namespace vgkws
