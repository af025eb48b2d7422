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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "tdpm/csv.hpp"
#include "tdpm/datasets.hpp"
#include "tdpm/errors.hpp"

using namespace tdpm;

namespace {

bool inside_grid(const Dataset2D& d) {
  return std::all_of(d.points.begin(), d.points.end(), [](const Point2& p) {
    return std::abs(p[0]) <= 10.0 && std::abs(p[1]) <= 10.0;
  });
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tdpm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Datasets, AllFitTheGridAndDefaultSize) {
  for (const auto& name : dataset_names()) {
    for (std::uint64_t seed : {0u, 1u, 7u}) {
      const Dataset2D d = make_dataset(name, DatasetConstants::kDefaultSize, -1.0, seed);
      EXPECT_EQ(d.size(), 2000u) << name;
      EXPECT_TRUE(inside_grid(d)) << name;
    }
  }
  // Noise large enough that raw draws would leave the box.
  EXPECT_TRUE(inside_grid(swiss_roll(5000, 2.0, 3)));
  EXPECT_TRUE(inside_grid(gaussian_mixture_8(5000, 1.5, 3)));
}

TEST(Datasets, BitReproducibleUnderSeed) {
  for (const auto& name : dataset_names()) {
    const Dataset2D a = make_dataset(name, 500, -1.0, 11), b = make_dataset(name, 500, -1.0, 11);
    const Dataset2D c = make_dataset(name, 500, -1.0, 12);
    EXPECT_EQ(a.points, b.points) << name;
    EXPECT_NE(a.points, c.points) << name;
  }
}

TEST(Datasets, UnknownNameListsValidNames) {
  try {
    make_dataset("spiral", 10, -1.0, 0);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& n : dataset_names()) EXPECT_NE(msg.find(n), std::string::npos);
  }
}

TEST(Datasets, SwissRollRadiusRange) {
  const Dataset2D d = swiss_roll(3000, 0.0, 5);
  double rmin = 1e9, rmax = 0;
  for (const auto& p : d.points) {
    const double r = std::hypot(p[0], p[1]);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  EXPECT_LE(rmax, DatasetConstants::kSwissRollMaxRadius + 1e-12);
  EXPECT_NEAR(rmin, DatasetConstants::kSwissRollMaxRadius / 3.0, 0.05);
}

TEST(Datasets, MoonsBalancedAndOrdered) {
  for (std::size_t n : {2000u, 2001u, 7u}) {
    const Dataset2D d = double_moons(n, DatasetConstants::kDefaultMoonsNoise, 2);
    ASSERT_TRUE(d.labels.has_value());
    const auto ones = static_cast<std::size_t>(std::count(d.labels->begin(), d.labels->end(), 1));
    const std::size_t zeros = n - ones;
    EXPECT_LE(std::max(ones, zeros) - std::min(ones, zeros), 1u);
  }
  const Dataset2D d = double_moons(2000, DatasetConstants::kDefaultMoonsNoise, 2);
  double up = 0, low = 0;
  std::size_t nu = 0, nl = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    ((*d.labels)[i] == 0 ? up : low) += d.points[i][1];
    ++((*d.labels)[i] == 0 ? nu : nl);
  }
  EXPECT_GT(up / nu, low / nl);
}

TEST(Datasets, Mixture8ComponentBalanceAndMean) {
  const std::size_t n = 100000;
  const Dataset2D d = gaussian_mixture_8(n, 0.5, 9);
  std::map<int, std::size_t> counts;
  for (int l : *d.labels) ++counts[l];
  ASSERT_EQ(counts.size(), 8u);
  for (const auto& [k, c] : counts) {
    EXPECT_NEAR(static_cast<double>(c), n / 8.0, 4.0 * std::sqrt(static_cast<double>(n))) << k;
  }
  double mx = 0, my = 0;
  for (const auto& p : d.points) {
    mx += p[0];
    my += p[1];
  }
  mx /= n;
  my /= n;
  // Per-coordinate spread of the mixture: ring radius 8 gives variance 32 + sigma^2.
  const double sd = std::sqrt(32.0 + 0.25);
  EXPECT_LT(std::abs(mx), 5.0 * sd / std::sqrt(static_cast<double>(n)));
  EXPECT_LT(std::abs(my), 5.0 * sd / std::sqrt(static_cast<double>(n)));
  for (const auto& m : mixture8_means()) EXPECT_NEAR(std::hypot(m[0], m[1]), 8.0, 1e-12);
}

TEST(Datasets, Mixture25NearestMeanRecoversComponent) {
  const Dataset2D d = gaussian_mixture_25(20000, 0.5, 4);
  const auto means = mixture25_means();
  ASSERT_EQ(means.size(), 25u);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t k = 0; k < means.size(); ++k) {
      const double dd = std::hypot(d.points[i][0] - means[k][0], d.points[i][1] - means[k][1]);
      if (dd < bd) {
        bd = dd;
        best = k;
      }
    }
    hits += static_cast<int>(best) == (*d.labels)[i];
  }
  EXPECT_GE(static_cast<double>(hits) / d.size(), 0.99);
}

TEST(Minibatch, DegenerateDatasetRepeatsPoint) {
  Dataset2D d{"one", 0, {{1.5, -2.0}}, std::nullopt};
  Rng rng(3);
  const auto b = minibatch(d, 16, rng);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(b[2 * i], 1.5);
    EXPECT_EQ(b[2 * i + 1], -2.0);
  }
  EXPECT_THROW(minibatch(d, 0, rng), ContractError);
}

TEST(Minibatch, IdenticalStreamsIdenticalDraws) {
  const Dataset2D d = swiss_roll(100, 0.25, 1);
  Rng a(5), b(5);
  EXPECT_EQ(minibatch(d, 64, a), minibatch(d, 64, b));
}

TEST(Minibatch, CellFrequenciesMatchDataset) {
  // Four distinct points with multiplicities 1, 2, 3, 4.
  Dataset2D d{"cells", 0, {}, std::nullopt};
  for (int k = 0; k < 4; ++k) {
    for (int r = 0; r <= k; ++r) d.points.push_back({static_cast<double>(k), 0.0});
  }
  Rng rng(77);
  const std::size_t draws = 1000000;
  const auto b = minibatch(d, draws, rng);
  std::array<double, 4> counts{};
  for (std::size_t i = 0; i < draws; ++i) counts[static_cast<std::size_t>(b[2 * i])] += 1;
  for (int k = 0; k < 4; ++k) {
    const double p = (k + 1) / 10.0;
    EXPECT_NEAR(counts[k], draws * p, 3.0 * std::sqrt(draws * p * (1 - p))) << k;
  }
}

TEST(Minibatch, ShuffledIndicesArePermutations) {
  const auto a = shuffled_indices(2000, 42);
  EXPECT_EQ(a, shuffled_indices(2000, 42));
  EXPECT_NE(a, shuffled_indices(2000, 43));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 2000u);
  EXPECT_EQ(*std::max_element(a.begin(), a.end()), 1999u);
  const Dataset2D d = swiss_roll(10, 0.25, 0);
  const std::vector<std::size_t> idx{3, 0};
  const auto g = gather_points(d, idx);
  EXPECT_EQ(g[0], d.points[3][0]);
  EXPECT_EQ(g[3], d.points[0][1]);
  const std::vector<std::size_t> bad{10};
  EXPECT_THROW(gather_points(d, bad), ContractError);
}

TEST(Csv, RoundTripIsBitExact) {
  const auto dir = temp_dir("csv");
  const Dataset2D d = gaussian_mixture_8(300, 0.5, 1);
  write_points_csv(dir / "d.csv", d);
  const Dataset2D r = read_points_csv(dir / "d.csv");
  EXPECT_EQ(r.points, d.points);
  ASSERT_TRUE(r.labels.has_value());
  EXPECT_EQ(*r.labels, *d.labels);
}

TEST(Csv, MalformedRowCitesLine) {
  const auto dir = temp_dir("csv_bad");
  {
    std::ofstream f(dir / "bad.csv");
    f << "x,y\n1,2\n3,4\n5\n";
  }
  try {
    read_points_csv(dir / "bad.csv");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_points_csv(dir / "missing.csv"), IoError);
}

TEST(Csv, FormatDoubleReparsesExactly) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-20, 20));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Rng, StateRestoreAndDeriveSeed) {
  Rng a(99);
  a.normal();
  const std::string s = a.state();
  const double next = a.normal();
  Rng b(0);
  b.restore(s);
  EXPECT_EQ(b.normal(), next);
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  EXPECT_EQ(derive_seed(5, 6), derive_seed(5, 6));
}

TEST(Rng, NormalMomentsAndIndexRange) {
  Rng rng(1);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.index(7), 7u);
}
