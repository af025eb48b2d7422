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

#include <cmath>
#include <memory>

#include "tdpm/errors.hpp"
#include "tdpm/schedule.hpp"

using namespace tdpm;

namespace {

double product_alpha_bar(const NoiseSchedule& s, int t) {
  double p = 1.0;
  for (int i = 1; i <= t; ++i) p *= 1.0 - s.betas()[i - 1];
  return p;
}

}  // namespace

TEST(Schedule, LinearEndpointsAndSpacing) {
  const auto s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  EXPECT_EQ(s.T(), 1000);
  EXPECT_DOUBLE_EQ(s.beta(1), 1e-4);
  EXPECT_NEAR(s.beta(1000), 0.02, 1e-15);
  EXPECT_NEAR(s.beta(500), 1e-4 + (0.02 - 1e-4) * 499.0 / 999.0, 1e-15);
}

TEST(Schedule, AlphaBarIsExactRunningProduct) {
  for (const auto& s : {NoiseSchedule::linear(1000, 1e-4, 0.02), NoiseSchedule::cosine(200),
                        NoiseSchedule::linear(5, 0.05, 0.5)}) {
    EXPECT_EQ(s.alpha_bar(0), 1.0);
    for (int t = 1; t <= s.T(); ++t) {
      EXPECT_EQ(s.alpha_bar(t), s.alpha_bar(t - 1) * s.alpha(t));
      EXPECT_EQ(s.alpha(t), 1.0 - s.beta(t));
      EXPECT_GT(s.beta(t), 0.0);
      EXPECT_LT(s.beta(t), 1.0);
      EXPECT_GT(s.alpha_bar(t), 0.0);
      EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
      EXPECT_NEAR(s.alpha_bar(t), product_alpha_bar(s, t), 1e-12);
    }
  }
}

TEST(Schedule, CosineClipsBetas) {
  const auto s = NoiseSchedule::cosine(1000);
  for (double b : s.betas()) EXPECT_LE(b, 0.999);
  EXPECT_EQ(s.family(), ScheduleFamily::kCosine);
  EXPECT_DOUBLE_EQ(s.param_a(), 0.008);
}

TEST(Schedule, InvalidConstructionThrows) {
  EXPECT_THROW(NoiseSchedule::linear(0, 0.1, 0.2), ContractError);
  EXPECT_THROW(NoiseSchedule::linear(5, 0.3, 0.2), ContractError);
  EXPECT_THROW(NoiseSchedule::linear(5, 0.0, 0.2), ContractError);
  EXPECT_THROW(NoiseSchedule::linear(5, 0.1, 1.0), ContractError);
  EXPECT_THROW(NoiseSchedule::cosine(0), ContractError);
  const auto s = NoiseSchedule::linear(5, 0.05, 0.5);
  EXPECT_THROW(s.beta(0), ContractError);
  EXPECT_THROW(s.beta(6), ContractError);
  EXPECT_THROW(s.alpha_bar(-1), ContractError);
  EXPECT_THROW(parse_schedule_family("quadratic"), ConfigError);
}

TEST(Truncation, PrefixIsBitIdentical) {
  auto parent = std::make_shared<const NoiseSchedule>(NoiseSchedule::linear(1000, 1e-4, 0.02));
  for (int tt : {0, 1, 49, 99, 999}) {
    const TruncatedSchedule tr = truncate(parent, tt);
    ASSERT_EQ(tr.betas().size(), static_cast<std::size_t>(tt));
    for (int t = 1; t <= tt; ++t) {
      EXPECT_EQ(tr.beta(t), parent->beta(t));
      EXPECT_EQ(tr.alpha_bar(t), parent->alpha_bar(t));
      EXPECT_EQ(&tr.betas()[t - 1], &parent->betas()[t - 1]);
    }
  }
}

TEST(Truncation, ZeroIsEmptyAndBoundsChecked) {
  auto parent = std::make_shared<const NoiseSchedule>(NoiseSchedule::linear(5, 0.05, 0.5));
  const TruncatedSchedule tr = truncate(parent, 0);
  EXPECT_TRUE(tr.betas().empty());
  EXPECT_EQ(tr.alpha_bar(0), 1.0);
  EXPECT_THROW(tr.beta(1), ContractError);
  EXPECT_THROW(truncate(parent, 5), ContractError);
  EXPECT_THROW(truncate(parent, -1), ContractError);
  EXPECT_THROW(truncate(std::shared_ptr<const NoiseSchedule>{}, 0), ContractError);
}

TEST(Snr, KnownValues) {
  const auto s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  EXPECT_NEAR(snr(s, 1), std::sqrt(0.9999 / 0.0001), 1e-9);
  EXPECT_NEAR(snr(s, 1), 99.995, 1e-3);
  const double ab100 = product_alpha_bar(s, 100);
  EXPECT_NEAR(snr(s, 100), std::sqrt(ab100 / (1 - ab100)), 1e-12);
  EXPECT_LT(snr(s, 100) / snr(s, 1), 0.05);
  EXPECT_THROW(snr(s, 0), ContractError);
}

TEST(Snr, StrictlyDecreasingBothFamilies) {
  for (const auto& s : {NoiseSchedule::linear(1000, 1e-4, 0.02), NoiseSchedule::cosine(1000)}) {
    for (int t = 2; t <= s.T(); ++t) EXPECT_LT(snr(s, t), snr(s, t - 1)) << t;
  }
}

TEST(Snr, UnitAtHalfAlphaBar) {
  // A single step with beta = 0.5 gives alpha_bar = 0.5.
  const auto s = NoiseSchedule::linear(1, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(snr(s, 1), 1.0);
}

TEST(Posterior, MatchesDirectFormula) {
  const auto s = NoiseSchedule::linear(20, 0.01, 0.3);
  for (int t = 2; t <= 20; ++t) {
    const auto c = posterior_coeffs(s, t);
    const double ab = s.alpha_bar(t), ab_prev = s.alpha_bar(t - 1), b = s.beta(t), a = s.alpha(t);
    EXPECT_NEAR(c.coef_x0, std::sqrt(ab_prev) * b / (1 - ab), 1e-14);
    EXPECT_NEAR(c.coef_xt, std::sqrt(a) * (1 - ab_prev) / (1 - ab), 1e-14);
    EXPECT_NEAR(c.variance, b * (1 - ab_prev) / (1 - ab), 1e-14);
    EXPECT_LT(c.variance, b);
  }
  EXPECT_THROW(posterior_coeffs(s, 1), ContractError);
  EXPECT_THROW(posterior_coeffs(s, 21), ContractError);
}

TEST(Posterior, TwoStepHandComputed) {
  const auto s = NoiseSchedule::linear(2, 0.1, 0.2);
  // alpha_bar_1 = 0.9, alpha_bar_2 = 0.72.
  const auto c = posterior_coeffs(s, 2);
  EXPECT_NEAR(c.coef_x0, std::sqrt(0.9) * 0.2 / 0.28, 1e-14);
  EXPECT_NEAR(c.coef_xt, std::sqrt(0.8) * 0.1 / 0.28, 1e-14);
  EXPECT_NEAR(c.variance, 0.2 * 0.1 / 0.28, 1e-14);
}

TEST(Posterior, SumOfCoefficientsNearOneAtLowNoise) {
  // For x_0 = x_t = v the mean is (coef_x0 + coef_xt) v; both coefficients
  // together stay within a beta-scale distance of 1.
  const auto s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  for (int t : {2, 10, 100}) {
    const auto c = posterior_coeffs(s, t);
    EXPECT_NEAR(c.coef_x0 + c.coef_xt, 1.0, s.beta(t));
  }
}
