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

#include "dme/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dme/error.hpp"

namespace dme {

std::string format_csv(const Table& table) {
  std::string out;
  for (const auto& [k, v] : table.meta) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw InvalidArgument("metadata key/value not representable: " + k);
    out += "#" + k + "=" + v + "\n";
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  char buf[40];
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw InvalidArgument("row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!std::isfinite(row[c])) throw InvalidArgument("non-finite value in table");
      std::snprintf(buf, sizeof buf, "%.12g", row[c]);
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Table parse_csv_text(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!header && !line.empty() && line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("metadata line without '='", lineno, 1);
      t.meta[line.substr(1, eq - 1)] = line.substr(eq + 1);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!header) {
      t.columns = std::move(cells);
      header = true;
      continue;
    }
    if (line.empty()) continue;
    if (cells.size() != t.columns.size()) throw ParseError("row width does not match header", lineno, 1);
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') throw ParseError("malformed number '" + c + "'", lineno, 1);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "': " + std::strerror(errno));
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename into '" + path + "': " + ec.message());
  }
}

void emit_csv(const Table& table, const std::string& path) {
  write_file_atomic(path, format_csv(table));
}

Table parse_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv_text(ss.str());
}

}  // namespace dme
