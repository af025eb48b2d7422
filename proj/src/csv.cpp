// Copyright 2026 The TDPM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tdpm/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tdpm/errors.hpp"

namespace tdpm {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, const fs::path& path, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw IoError(path.string() + " line " + std::to_string(line_no) + ": malformed number '" + cell + "'");
  }
  return v;
}

}  // namespace

void write_points_csv(const fs::path& path, const Dataset2D& data) {
  auto out = open_out(path);
  const bool labeled = data.labels.has_value();
  out << (labeled ? "x,y,label\n" : "x,y\n");
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    out << format_double(data.points[i][0]) << ',' << format_double(data.points[i][1]);
    if (labeled) out << ',' << (*data.labels)[i];
    out << '\n';
  }
  finish(out, path);
}

void write_points_csv(const fs::path& path, std::span<const double> xy) {
  auto out = open_out(path);
  out << "x,y\n";
  for (std::size_t i = 0; i + 1 < xy.size(); i += 2) {
    out << format_double(xy[i]) << ',' << format_double(xy[i + 1]) << '\n';
  }
  finish(out, path);
}

Dataset2D read_points_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t columns = 0;
  if (line == "x,y") {
    columns = 2;
  } else if (line == "x,y,label") {
    columns = 3;
  } else {
    throw IoError(path.string() + " line 1: expected header 'x,y' or 'x,y,label'");
  }
  Dataset2D d{path.stem().string(), 0, {}, std::nullopt};
  if (columns == 3) d.labels = std::vector<int>{};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns) {
      throw IoError(path.string() + " line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                    " columns, found " + std::to_string(cells.size()));
    }
    d.points.push_back({parse_number(cells[0], path, line_no), parse_number(cells[1], path, line_no)});
    if (columns == 3) d.labels->push_back(static_cast<int>(parse_number(cells[2], path, line_no)));
  }
  return d;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace tdpm
