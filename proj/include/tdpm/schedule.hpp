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

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tdpm {

enum class ScheduleFamily { kLinear, kCosine };

std::string to_string(ScheduleFamily family);
ScheduleFamily parse_schedule_family(const std::string& name);

// Forward-process variance schedule beta_1..beta_T with derived alpha_t and
// cumulative alpha_bar_t. Time indices are 1-based; alpha_bar(0) == 1.
class NoiseSchedule {
 public:
  static NoiseSchedule linear(int T, double beta1, double betaT);
  static NoiseSchedule cosine(int T, double s = 0.008);

  ScheduleFamily family() const { return family_; }
  int T() const { return static_cast<int>(betas_.size()); }
  // Construction parameters: (beta1, betaT) for linear, (s, unused) for cosine.
  double param_a() const { return param_a_; }
  double param_b() const { return param_b_; }

  std::span<const double> betas() const { return betas_; }
  std::span<const double> alphas() const { return alphas_; }
  std::span<const double> alpha_bars() const { return alpha_bars_; }

  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;  // t in [0, T]

 private:
  NoiseSchedule(ScheduleFamily family, double a, double b, std::vector<double> betas);

  ScheduleFamily family_;
  double param_a_;
  double param_b_;
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
};

// The first T_trunc steps of a parent schedule. Values are read straight from
// the parent, so the prefix is bit-identical by construction.
class TruncatedSchedule {
 public:
  TruncatedSchedule(std::shared_ptr<const NoiseSchedule> parent, int t_trunc);

  const NoiseSchedule& parent() const { return *parent_; }
  const std::shared_ptr<const NoiseSchedule>& parent_ptr() const { return parent_; }
  int t_trunc() const { return t_trunc_; }

  std::span<const double> betas() const { return parent_->betas().first(static_cast<std::size_t>(t_trunc_)); }
  std::span<const double> alpha_bars() const {
    return parent_->alpha_bars().first(static_cast<std::size_t>(t_trunc_));
  }
  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;  // t in [0, T_trunc]

 private:
  std::shared_ptr<const NoiseSchedule> parent_;
  int t_trunc_;
};

TruncatedSchedule truncate(std::shared_ptr<const NoiseSchedule> schedule, int t_trunc);

// sqrt(alpha_bar_t) / sqrt(1 - alpha_bar_t), t in [1, T].
double snr(const NoiseSchedule& schedule, int t);

// q(x_{t-1} | x_t, x_0) = N(coef_x0 * x_0 + coef_xt * x_t, variance * I), t in [2, T].
struct PosteriorCoeffs {
  double coef_x0;
  double coef_xt;
  double variance;
};
PosteriorCoeffs posterior_coeffs(const NoiseSchedule& schedule, int t);

}  // namespace tdpm
