// vgkws/csv.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Minimal CSV reading for the corpus file formats. Fields never contain
// commas or quotes in these formats, so no quoting rules are implemented.

#ifndef VGKWS_CSV_HPP_
#define VGKWS_CSV_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace vgkws {

struct CsvRow {
  std::vector<std::string> fields;
  int line_number = 0;  // 1-based, including the header line
};

// Reads a CSV file, checks the header matches `expected_header` exactly,
// and returns the data rows. Blank lines are skipped.
std::vector<CsvRow> read_csv(const std::filesystem::path& path,
                             const std::string& expected_header);

// Parses a floating point field, rejecting NaN/Inf and trailing garbage.
double parse_double_field(const std::string& field, const std::filesystem::path& path,
                          int line_number, const char* what);

long parse_int_field(const std::string& field, const std::filesystem::path& path,
                     int line_number, const char* what);

}  // namespace vgkws

#endif  // VGKWS_CSV_HPP_
