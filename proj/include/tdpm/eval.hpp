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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tdpm/schedule.hpp"

namespace tdpm {

// 20 x 20 histogram over [-10, 10]^2. Bin (i, j) covers
// [lo + i w, lo + (i + 1) w) x [lo + j w, lo + (j + 1) w), stored at i * bins + j.
struct GridHistogram {
  static constexpr double kLo = -10.0;
  static constexpr double kHi = 10.0;
  static constexpr std::size_t kBins = 20;
  static constexpr double kDefaultEps = 1e-10;

  double lo = kLo;
  double hi = kHi;
  std::size_t bins = kBins;
  double eps = kDefaultEps;
  std::vector<std::uint64_t> counts;
  std::vector<double> probs;  // (count + eps) / (in_range + bins^2 eps)
  std::uint64_t in_range = 0;
  std::uint64_t overflow = 0;  // samples outside the grid, excluded from counts

  std::uint64_t total() const { return in_range + overflow; }
  double overflow_fraction() const;
  bool same_geometry(const GridHistogram& other) const;
};

// xy is a flat [n, 2] buffer.
GridHistogram histogram(std::span<const double> xy, double eps = GridHistogram::kDefaultEps);

// sum_b q_b log(q_b / p_b), clamped at 0 against rounding.
double forward_kl(const GridHistogram& q, const GridHistogram& p);

struct SnrRow {
  int t;
  double snr;
};
std::vector<SnrRow> snr_report(const NoiseSchedule& schedule, std::span<const int> ts);

struct KlRecord {
  std::string dataset;
  std::string method;
  int T = 0;
  int T_trunc = 0;
  std::uint64_t seed = 0;
  double kl_nats = 0.0;
  double overflow_frac = 0.0;
};
std::string kl_csv_header();
std::string kl_csv_row(const KlRecord& r);

}  // namespace tdpm
