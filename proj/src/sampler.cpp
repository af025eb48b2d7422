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

#include "tdpm/sampler.hpp"

#include <cmath>

#include "tdpm/errors.hpp"

namespace tdpm {

ad::Tensor SeededNoise::draw(std::uint64_t stream, std::size_t rows) {
  Rng rng(derive_seed(seed_, stream));
  std::vector<double> v(rows * 2);
  for (double& e : v) e = rng.normal();
  return ad::Tensor::from({rows, 2}, std::move(v));
}

double reverse_noise_std(const NoiseSchedule& schedule, int t, NoiseScale scale) {
  switch (scale) {
    case NoiseScale::kPosterior:
      return std::sqrt(schedule.beta(t) * (1.0 - schedule.alpha_bar(t - 1)) / (1.0 - schedule.alpha_bar(t)));
    case NoiseScale::kBetaSqrt:
      return std::sqrt(schedule.beta(t));
    case NoiseScale::kBetaLiteral:
      return schedule.beta(t);
  }
  return 0.0;
}

void check_record_set(const std::set<int>& record, int t_top) {
  for (int t : record) {
    if (t < 0 || t > t_top) {
      throw ContractError("record: t=" + std::to_string(t) + " outside [0, " + std::to_string(t_top) + "]");
    }
  }
}

namespace {

void snapshot(const ad::Tensor& x, int t, const std::set<int>& record,
              std::map<int, std::vector<double>, std::greater<>>* out) {
  if (out && record.count(t)) out->insert_or_assign(t, std::vector<double>(x.data().begin(), x.data().end()));
}

}  // namespace

ad::Tensor reverse_steps(const ad::Tensor& x_start, const NoiseSchedule& schedule, int t_from, int t_to,
                         const StepFn& eps, NoiseProvider& noise, NoiseScale scale, const std::set<int>& record,
                         std::map<int, std::vector<double>, std::greater<>>* snapshots) {
  if (t_from > schedule.T() || t_to < 0 || t_to > t_from) {
    throw ContractError("reverse_steps: invalid range " + std::to_string(t_from) + " -> " + std::to_string(t_to));
  }
  ad::NoGradGuard no_grad;
  const std::size_t n = x_start.size(0);
  std::vector<double> x(x_start.data().begin(), x_start.data().end());
  for (int t = t_from; t > t_to; --t) {
    const ad::Tensor xt = ad::Tensor::from({n, 2}, x);
    const ad::Tensor e = eps(xt, t);
    if (e.shape() != xt.shape()) throw ShapeError("reverse_steps: eps output shape " + ad::to_string(e.shape()));
    const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
    const double coef = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
    const auto ev = e.data();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = inv_sqrt_alpha * (x[i] - coef * ev[i]);
    if (t > 1) {
      const double sigma = reverse_noise_std(schedule, t, scale);
      const ad::Tensor z = noise.draw(static_cast<std::uint64_t>(t), n);
      const auto zv = z.data();
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += sigma * zv[i];
    }
    for (double v : x) {
      if (!std::isfinite(v)) throw NumericError("reverse_steps: non-finite sample at t=" + std::to_string(t - 1));
    }
    snapshot(ad::Tensor::from({n, 2}, x), t - 1, record, snapshots);
  }
  return ad::Tensor::from({n, 2}, std::move(x));
}

SampleRun sample_tdpm(const PriorFn& prior, const StepFn& eps, const TruncatedSchedule& schedule, std::size_t n,
                      std::uint64_t seed, const std::set<int>& record, NoiseScale scale, NoiseProvider* noise) {
  const int tt = schedule.t_trunc();
  check_record_set(record, tt);
  SeededNoise fallback(seed);
  NoiseProvider& src = noise ? *noise : fallback;
  std::int64_t prior_calls = 0;
  CountingStep counted(eps);
  const StepFn step = [&counted](const ad::Tensor& x, int t) { return counted(x, t); };

  SampleRun run;
  run.seed = seed;
  run.n = n;
  ad::Tensor x;
  {
    ad::NoGradGuard no_grad;
    ++prior_calls;
    x = prior(src.draw(0, n));
  }
  if (x.shape() != ad::Shape{n, 2}) throw ShapeError("sample_tdpm: prior output shape " + ad::to_string(x.shape()));
  snapshot(x, tt, record, &run.trajectory);
  x = reverse_steps(x, schedule.parent(), tt, 0, step, src, scale, record, &run.trajectory);
  run.samples.assign(x.data().begin(), x.data().end());
  run.nfe = prior_calls + counted.calls();
  return run;
}

SampleRun sample_tdpm(const SamplingModels& m, const TruncatedSchedule& schedule, std::size_t n, std::uint64_t seed,
                      const std::set<int>& record, NoiseScale scale, NoiseProvider* noise) {
  if (m.method != Method::kTdpm) throw ContractError("sample_tdpm: networks were trained as a DDPM baseline");
  if (m.t_trunc != schedule.t_trunc()) {
    throw ContractError("sample_tdpm: networks trained for T_trunc=" + std::to_string(m.t_trunc) +
                        ", schedule truncated at " + std::to_string(schedule.t_trunc()));
  }
  const TimeEmbedMlp& model = m.model;
  PriorFn prior;
  if (m.generator) {
    prior = [&m](const ad::Tensor& z) { return generate_prior_separate(*m.generator, z); };
  } else {
    prior = [&model, tt = m.t_trunc](const ad::Tensor& z) { return generate_prior_shared(model, z, tt); };
  }
  const StepFn eps = [&model](const ad::Tensor& x, int t) { return denoise_eps(model, x, t); };
  return sample_tdpm(prior, eps, schedule, n, seed, record, scale, noise);
}

SampleRun sample_ddpm_baseline(const StepFn& eps, const NoiseSchedule& schedule, std::size_t n, std::uint64_t seed,
                               const std::set<int>& record, NoiseScale scale, NoiseProvider* noise) {
  const int T = schedule.T();
  check_record_set(record, T);
  SeededNoise fallback(seed);
  NoiseProvider& src = noise ? *noise : fallback;
  CountingStep counted(eps);
  const StepFn step = [&counted](const ad::Tensor& x, int t) { return counted(x, t); };

  SampleRun run;
  run.seed = seed;
  run.n = n;
  const ad::Tensor x_T = src.draw(0, n);
  snapshot(x_T, T, record, &run.trajectory);
  const ad::Tensor x = reverse_steps(x_T, schedule, T, 0, step, src, scale, record, &run.trajectory);
  run.samples.assign(x.data().begin(), x.data().end());
  run.nfe = counted.calls();
  return run;
}

SampleRun sample_ddpm_baseline(const SamplingModels& m, const NoiseSchedule& schedule, std::size_t n,
                               std::uint64_t seed, const std::set<int>& record, NoiseScale scale,
                               NoiseProvider* noise) {
  if (m.method != Method::kDdpm) throw ContractError("sample_ddpm_baseline: networks were trained as TDPM");
  if (m.model.max_t() != schedule.T()) {
    throw ContractError("sample_ddpm_baseline: network accepts t <= " + std::to_string(m.model.max_t()) +
                        ", schedule has T=" + std::to_string(schedule.T()));
  }
  const TimeEmbedMlp& model = m.model;
  const StepFn eps = [&model](const ad::Tensor& x, int t) { return denoise_eps(model, x, t); };
  return sample_ddpm_baseline(eps, schedule, n, seed, record, scale, noise);
}

std::map<int, std::vector<double>, std::greater<>> record_trajectory(const SamplingModels& models,
                                                                     const TruncatedSchedule& schedule,
                                                                     std::size_t n, std::uint64_t seed,
                                                                     const std::set<int>& record, NoiseScale scale) {
  return sample_tdpm(models, schedule, n, seed, record, scale).trajectory;
}

}  // namespace tdpm
