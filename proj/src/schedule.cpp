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

#include "tdpm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tdpm/errors.hpp"

namespace tdpm {

std::string to_string(ScheduleFamily family) {
  return family == ScheduleFamily::kLinear ? "linear" : "cosine";
}

ScheduleFamily parse_schedule_family(const std::string& name) {
  if (name == "linear") return ScheduleFamily::kLinear;
  if (name == "cosine") return ScheduleFamily::kCosine;
  throw ConfigError("unknown schedule family '" + name + "' (expected linear or cosine)");
}

NoiseSchedule::NoiseSchedule(ScheduleFamily family, double a, double b, std::vector<double> betas)
    : family_(family), param_a_(a), param_b_(b), betas_(std::move(betas)) {
  alphas_.reserve(betas_.size());
  alpha_bars_.reserve(betas_.size());
  double running = 1.0;
  for (double beta : betas_) {
    if (!(beta > 0.0 && beta < 1.0)) throw ContractError("NoiseSchedule: beta outside (0, 1)");
    const double alpha = 1.0 - beta;
    running *= alpha;
    alphas_.push_back(alpha);
    alpha_bars_.push_back(running);
  }
}

NoiseSchedule NoiseSchedule::linear(int T, double beta1, double betaT) {
  if (T < 1) throw ContractError("linear_schedule: T must be >= 1");
  if (!(beta1 > 0.0 && beta1 <= betaT && betaT < 1.0)) {
    throw ContractError("linear_schedule: require 0 < beta1 <= betaT < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(T));
  if (T == 1) {
    betas[0] = beta1;
  } else {
    for (int i = 0; i < T; ++i) {
      betas[static_cast<std::size_t>(i)] = beta1 + (betaT - beta1) * static_cast<double>(i) / (T - 1);
    }
    betas.back() = betaT;
  }
  return NoiseSchedule(ScheduleFamily::kLinear, beta1, betaT, std::move(betas));
}

NoiseSchedule NoiseSchedule::cosine(int T, double s) {
  if (T < 1) throw ContractError("cosine_schedule: T must be >= 1");
  if (!(s > 0.0)) throw ContractError("cosine_schedule: offset s must be positive");
  constexpr double kMaxBeta = 0.999;
  auto f = [&](int t) {
    const double c = std::cos((static_cast<double>(t) / T + s) / (1.0 + s) * std::numbers::pi / 2.0);
    return c * c;
  };
  const double f0 = f(0);
  std::vector<double> betas(static_cast<std::size_t>(T));
  double prev = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double ab = f(t) / f0;
    betas[static_cast<std::size_t>(t - 1)] = std::min(1.0 - ab / prev, kMaxBeta);
    prev = ab;
  }
  return NoiseSchedule(ScheduleFamily::kCosine, s, 0.0, std::move(betas));
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > T()) throw ContractError("beta: t=" + std::to_string(t) + " outside [1, " + std::to_string(T()) + "]");
  return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha(int t) const {
  if (t < 1 || t > T()) throw ContractError("alpha: t=" + std::to_string(t) + " outside [1, " + std::to_string(T()) + "]");
  return alphas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > T()) {
    throw ContractError("alpha_bar: t=" + std::to_string(t) + " outside [0, " + std::to_string(T()) + "]");
  }
  return t == 0 ? 1.0 : alpha_bars_[static_cast<std::size_t>(t - 1)];
}

TruncatedSchedule::TruncatedSchedule(std::shared_ptr<const NoiseSchedule> parent, int t_trunc)
    : parent_(std::move(parent)), t_trunc_(t_trunc) {
  if (!parent_) throw ContractError("truncate: null schedule");
  if (t_trunc < 0 || t_trunc >= parent_->T()) {
    throw ContractError("truncate: T_trunc=" + std::to_string(t_trunc) + " outside [0, " +
                        std::to_string(parent_->T() - 1) + "]");
  }
}

double TruncatedSchedule::beta(int t) const {
  if (t < 1 || t > t_trunc_) throw ContractError("beta: t=" + std::to_string(t) + " beyond truncation point");
  return parent_->beta(t);
}

double TruncatedSchedule::alpha(int t) const {
  if (t < 1 || t > t_trunc_) throw ContractError("alpha: t=" + std::to_string(t) + " beyond truncation point");
  return parent_->alpha(t);
}

double TruncatedSchedule::alpha_bar(int t) const {
  if (t < 0 || t > t_trunc_) throw ContractError("alpha_bar: t=" + std::to_string(t) + " beyond truncation point");
  return parent_->alpha_bar(t);
}

TruncatedSchedule truncate(std::shared_ptr<const NoiseSchedule> schedule, int t_trunc) {
  return TruncatedSchedule(std::move(schedule), t_trunc);
}

double snr(const NoiseSchedule& schedule, int t) {
  if (t < 1 || t > schedule.T()) throw ContractError("snr: t=" + std::to_string(t) + " out of range");
  const double ab = schedule.alpha_bar(t);
  return std::sqrt(ab) / std::sqrt(1.0 - ab);
}

PosteriorCoeffs posterior_coeffs(const NoiseSchedule& schedule, int t) {
  if (t < 2 || t > schedule.T()) {
    throw ContractError("posterior_coeffs: t=" + std::to_string(t) + " outside [2, " +
                        std::to_string(schedule.T()) + "]");
  }
  const double beta = schedule.beta(t);
  const double ab = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t - 1);
  return {beta * std::sqrt(ab_prev) / (1.0 - ab), std::sqrt(schedule.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab),
          beta * (1.0 - ab_prev) / (1.0 - ab)};
}

}  // namespace tdpm
