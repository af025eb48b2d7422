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
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "tdpm/rng.hpp"
#include "tdpm/sampler_options.hpp"
#include "tdpm/schedule.hpp"
#include "tdpm/tensor.hpp"
#include "tdpm/trainer.hpp"

namespace tdpm {

// Source of the Gaussian draws consumed by a reverse chain. Stream 0 is the
// starting latent; stream t is the noise added by the step leaving x_t.
class NoiseProvider {
 public:
  virtual ~NoiseProvider() = default;
  virtual ad::Tensor draw(std::uint64_t stream, std::size_t rows) = 0;
};

// Each stream is an independent Rng seeded from (seed, stream), so a chain
// can be resumed from any intermediate step with the seed alone.
class SeededNoise : public NoiseProvider {
 public:
  explicit SeededNoise(std::uint64_t seed) : seed_(seed) {}
  ad::Tensor draw(std::uint64_t stream, std::size_t rows) override;

 private:
  std::uint64_t seed_;
};

using PriorFn = std::function<ad::Tensor(const ad::Tensor& z)>;
using StepFn = std::function<ad::Tensor(const ad::Tensor& x, int t)>;

// Wraps a network call and counts batched invocations.
class CountingStep {
 public:
  explicit CountingStep(StepFn fn) : fn_(std::move(fn)) {}
  ad::Tensor operator()(const ad::Tensor& x, int t) {
    ++calls_;
    return fn_(x, t);
  }
  std::int64_t calls() const { return calls_; }

 private:
  StepFn fn_;
  std::int64_t calls_ = 0;
};

struct SampleRun {
  std::vector<double> samples;  // [n, 2] row-major
  std::map<int, std::vector<double>, std::greater<>> trajectory;  // t -> [n, 2], decreasing t
  std::int64_t nfe = 0;  // network evaluations per sample
  std::uint64_t seed = 0;
  std::size_t n = 0;
};

// Standard deviation of the noise added when stepping from x_t (t >= 2).
double reverse_noise_std(const NoiseSchedule& schedule, int t, NoiseScale scale);

// Runs x_{t-1} = (x_t - beta_t / sqrt(1 - ab_t) eps(x_t, t)) / sqrt(alpha_t) + sigma_t z_t
// from t = t_from down to t_to, with z_1 = 0. Snapshots the batch after
// each step whose result index is in record.
ad::Tensor reverse_steps(const ad::Tensor& x, const NoiseSchedule& schedule, int t_from, int t_to,
                         const StepFn& eps, NoiseProvider& noise, NoiseScale scale,
                         const std::set<int>& record = {},
                         std::map<int, std::vector<double>, std::greater<>>* snapshots = nullptr);

// Implicit prior draw followed by T_trunc refinement steps.
SampleRun sample_tdpm(const PriorFn& prior, const StepFn& eps, const TruncatedSchedule& schedule, std::size_t n,
                      std::uint64_t seed, const std::set<int>& record = {},
                      NoiseScale scale = NoiseScale::kPosterior, NoiseProvider* noise = nullptr);

// Trained networks; the truncation stored with them must match schedule.
SampleRun sample_tdpm(const SamplingModels& models, const TruncatedSchedule& schedule, std::size_t n,
                      std::uint64_t seed, const std::set<int>& record = {},
                      NoiseScale scale = NoiseScale::kPosterior, NoiseProvider* noise = nullptr);

// x_T ~ N(0, I), then all T reverse steps.
SampleRun sample_ddpm_baseline(const StepFn& eps, const NoiseSchedule& schedule, std::size_t n, std::uint64_t seed,
                               const std::set<int>& record = {}, NoiseScale scale = NoiseScale::kPosterior,
                               NoiseProvider* noise = nullptr);
SampleRun sample_ddpm_baseline(const SamplingModels& models, const NoiseSchedule& schedule, std::size_t n,
                               std::uint64_t seed, const std::set<int>& record = {},
                               NoiseScale scale = NoiseScale::kPosterior, NoiseProvider* noise = nullptr);

// Snapshots of a TDPM run at the requested t in {T_trunc, ..., 0}.
std::map<int, std::vector<double>, std::greater<>> record_trajectory(const SamplingModels& models,
                                                                     const TruncatedSchedule& schedule,
                                                                     std::size_t n, std::uint64_t seed,
                                                                     const std::set<int>& record,
                                                                     NoiseScale scale = NoiseScale::kPosterior);

// Throws ContractError unless every t lies in [0, t_top].
void check_record_set(const std::set<int>& record, int t_top);

}  // namespace tdpm
