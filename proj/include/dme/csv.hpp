// Copyright 2026 The dmecho Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// CSV files with '#key=value' metadata lines, a header row and %.12g values.

#include <map>
#include <string>
#include <vector>

namespace dme {

struct Table {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_csv(const Table& table);
Table parse_csv_text(const std::string& text);

/// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);
void emit_csv(const Table& table, const std::string& path);
Table parse_csv(const std::string& path);

}  // namespace dme
