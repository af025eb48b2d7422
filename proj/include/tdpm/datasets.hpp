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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdpm/rng.hpp"

namespace tdpm {

using Point2 = std::array<double, 2>;

// Fixed empirical sample of a 2-D distribution.
struct Dataset2D {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<Point2> points;
  std::optional<std::vector<int>> labels;

  std::size_t size() const { return points.size(); }
};

// Layout constants. Every generator keeps points inside [-kDataBound, kDataBound]^2
// by redrawing the additive noise of any point that would leave it.
struct DatasetConstants {
  static constexpr double kDataBound = 10.0;
  static constexpr double kSwissRollMaxRadius = 9.0;
  static constexpr double kMoonsScale = 5.0;
  static constexpr double kRing8Radius = 8.0;
  static constexpr double kGrid25Spacing = 4.0;
  static constexpr std::size_t kDefaultSize = 2000;
  static constexpr double kDefaultSwissRollNoise = 0.25;
  static constexpr double kDefaultMoonsNoise = 0.5;
  static constexpr double kDefaultMixtureSigma = 0.5;
};

Dataset2D swiss_roll(std::size_t n, double noise, std::uint64_t seed);
Dataset2D double_moons(std::size_t n, double noise, std::uint64_t seed);
Dataset2D gaussian_mixture_8(std::size_t n, double sigma, std::uint64_t seed);
Dataset2D gaussian_mixture_25(std::size_t n, double sigma, std::uint64_t seed);

std::vector<Point2> mixture8_means();
std::vector<Point2> mixture25_means();

const std::vector<std::string>& dataset_names();
// Dispatches on name with that dataset's default noise/sigma when noise < 0.
Dataset2D make_dataset(const std::string& name, std::size_t n, double noise, std::uint64_t seed);

// Uniform-with-replacement draw of `batch` rows, returned row-major (batch x 2).
std::vector<double> minibatch(const Dataset2D& data, std::size_t batch, Rng& rng);

// Random permutation of [0, n) determined by seed alone.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

// Selected rows of data as a flat [idx.size(), 2] buffer.
std::vector<double> gather_points(const Dataset2D& data, std::span<const std::size_t> idx);

}  // namespace tdpm
