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

#include "tdpm/datasets.hpp"

#include <cmath>
#include <numbers>

#include "tdpm/errors.hpp"

namespace tdpm {

namespace {

using C = DatasetConstants;

bool inside(const Point2& p, double max_radius) {
  return std::abs(p[0]) <= C::kDataBound && std::abs(p[1]) <= C::kDataBound &&
         std::hypot(p[0], p[1]) <= max_radius;
}

// center + isotropic noise, redrawn until the point lies in the data box
// (and within max_radius of the origin).
Point2 jitter(const Point2& center, double sd, Rng& rng, double max_radius = HUGE_VAL) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Point2 p{center[0] + sd * rng.normal(), center[1] + sd * rng.normal()};
    if (inside(p, max_radius)) return p;
  }
  throw ContractError("dataset noise too large for the data box");
}

void check_args(const char* name, std::size_t n, double noise) {
  if (n < 1) throw ContractError(std::string(name) + ": n must be >= 1");
  if (!(noise >= 0.0)) throw ContractError(std::string(name) + ": noise must be >= 0");
}

}  // namespace

Dataset2D swiss_roll(std::size_t n, double noise, std::uint64_t seed) {
  check_args("swiss_roll", n, noise);
  constexpr double kLo = 1.5 * std::numbers::pi;
  constexpr double kHi = 4.5 * std::numbers::pi;
  const double scale = C::kSwissRollMaxRadius / kHi;
  Rng rng(seed);
  Dataset2D d{"swiss_roll", seed, {}, std::nullopt};
  d.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.uniform(kLo, kHi);
    d.points.push_back(jitter({scale * r * std::cos(r), scale * r * std::sin(r)}, noise, rng, C::kDataBound));
  }
  return d;
}

Dataset2D double_moons(std::size_t n, double noise, std::uint64_t seed) {
  check_args("double_moons", n, noise);
  Rng rng(seed);
  Dataset2D d{"double_moons", seed, {}, std::vector<int>{}};
  d.points.reserve(n);
  d.labels->reserve(n);
  const std::size_t upper = (n + 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const bool is_upper = i < upper;
    // Unit moons span x in [-1, 2], y in [-0.5, 1]; recenter on the origin.
    const double ux = is_upper ? std::cos(theta) : 1.0 - std::cos(theta);
    const double uy = is_upper ? std::sin(theta) : 0.5 - std::sin(theta);
    d.points.push_back(jitter({C::kMoonsScale * (ux - 0.5), C::kMoonsScale * (uy - 0.25)}, noise, rng));
    d.labels->push_back(is_upper ? 0 : 1);
  }
  return d;
}

std::vector<Point2> mixture8_means() {
  std::vector<Point2> means;
  for (int k = 0; k < 8; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 8.0;
    means.push_back({C::kRing8Radius * std::cos(a), C::kRing8Radius * std::sin(a)});
  }
  return means;
}

std::vector<Point2> mixture25_means() {
  std::vector<Point2> means;
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j) means.push_back({C::kGrid25Spacing * i, C::kGrid25Spacing * j});
  }
  return means;
}

namespace {

Dataset2D mixture(const char* name, const std::vector<Point2>& means, std::size_t n, double sigma,
                  std::uint64_t seed) {
  if (n < 1) throw ContractError(std::string(name) + ": n must be >= 1");
  if (!(sigma > 0.0)) throw ContractError(std::string(name) + ": sigma must be positive");
  Rng rng(seed);
  Dataset2D d{name, seed, {}, std::vector<int>{}};
  d.points.reserve(n);
  d.labels->reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(rng.index(means.size()));
    d.points.push_back(jitter(means[k], sigma, rng));
    d.labels->push_back(static_cast<int>(k));
  }
  return d;
}

}  // namespace

Dataset2D gaussian_mixture_8(std::size_t n, double sigma, std::uint64_t seed) {
  return mixture("gmm8", mixture8_means(), n, sigma, seed);
}

Dataset2D gaussian_mixture_25(std::size_t n, double sigma, std::uint64_t seed) {
  return mixture("gmm25", mixture25_means(), n, sigma, seed);
}

const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names{"swiss_roll", "double_moons", "gmm8", "gmm25"};
  return names;
}

Dataset2D make_dataset(const std::string& name, std::size_t n, double noise, std::uint64_t seed) {
  if (name == "swiss_roll") return swiss_roll(n, noise < 0 ? C::kDefaultSwissRollNoise : noise, seed);
  if (name == "double_moons") return double_moons(n, noise < 0 ? C::kDefaultMoonsNoise : noise, seed);
  if (name == "gmm8") return gaussian_mixture_8(n, noise < 0 ? C::kDefaultMixtureSigma : noise, seed);
  if (name == "gmm25") return gaussian_mixture_25(n, noise < 0 ? C::kDefaultMixtureSigma : noise, seed);
  std::string valid;
  for (const auto& v : dataset_names()) valid += (valid.empty() ? "" : ", ") + v;
  throw ConfigError("unknown dataset '" + name + "' (valid: " + valid + ")");
}

std::vector<double> minibatch(const Dataset2D& data, std::size_t batch, Rng& rng) {
  if (batch < 1) throw ContractError("minibatch: batch must be >= 1");
  if (data.points.empty()) throw ContractError("minibatch: empty dataset");
  std::vector<double> out(batch * 2);
  for (std::size_t i = 0; i < batch; ++i) {
    const auto& p = data.points[static_cast<std::size_t>(rng.index(data.points.size()))];
    out[2 * i] = p[0];
    out[2 * i + 1] = p[1];
  }
  return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.index(i))]);
  return idx;
}

std::vector<double> gather_points(const Dataset2D& data, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size() * 2);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= data.points.size()) throw ContractError("gather_points: index out of range");
    out[2 * i] = data.points[idx[i]][0];
    out[2 * i + 1] = data.points[idx[i]][1];
  }
  return out;
}

}  // namespace tdpm
