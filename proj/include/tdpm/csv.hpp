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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tdpm/datasets.hpp"

namespace tdpm {

// Point files: header "x,y" or "x,y,label", one row per point, values
// printed with 17 significant digits so that they re-parse bit-exactly.
void write_points_csv(const std::filesystem::path& path, const Dataset2D& data);
void write_points_csv(const std::filesystem::path& path, std::span<const double> xy);

// Parses a point file. Any malformed row throws IoError citing its 1-based
// line number. Returned dataset has name = file stem and seed 0.
Dataset2D read_points_csv(const std::filesystem::path& path);

std::string format_double(double v);

// Writes text to a temporary sibling and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace tdpm
