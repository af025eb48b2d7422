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
#include <string>
#include <vector>

#include "tdpm/config.hpp"
#include "tdpm/eval.hpp"
#include "tdpm/sampler.hpp"
#include "tdpm/trainer.hpp"

namespace tdpm {

inline constexpr std::size_t kEvalSamples = 10000;

// Seed used to sample from a run trained with the given config seed.
std::uint64_t sampling_seed(std::uint64_t train_seed);

// Samples n points from the EMA networks of a trained state, dispatching on
// its method.
SampleRun sample_trained(const TrainState& state, std::size_t n, std::uint64_t seed,
                         const std::set<int>& record = {});

// Grid KL of samples against the state's training set.
KlRecord evaluate_kl(const TrainState& state, std::span<const double> samples);

struct ToyRun {
  TrainState state;
  std::vector<double> samples;
  KlRecord kl;
  double train_seconds = 0.0;
};

// Trains from config, draws n samples with sampling_seed(config.seed), scores them.
ToyRun run_toy(const TrainConfig& config, std::size_t n = kEvalSamples);

// Runs independent jobs on up to `threads` workers; results keep job order.
// threads = 0 resolves through worker_threads().
void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& body);

// TDPM_THREADS if set and positive, otherwise hardware concurrency.
std::size_t worker_threads();

struct ToyComparison {
  std::string dataset;
  int T = 0;
  int T_trunc = 0;
  PriorMode mode = PriorMode::kGan;
  std::vector<std::uint64_t> seeds;
  std::vector<double> tdpm_kl;
  std::vector<double> ddpm_kl;
  std::vector<double> tdpm_overflow;
  std::vector<double> ddpm_overflow;

  double tdpm_median() const;
  double ddpm_median() const;
  // Seeds on which TDPM scored strictly lower KL than the baseline.
  std::size_t tdpm_wins() const;
};

double median(std::vector<double> values);

// For each (T, T_trunc) pair: TDPM in base.mode and the DDPM baseline at the
// same T, over seeds base.seed .. base.seed + k - 1.
std::vector<ToyComparison> reproduce_toy(const TrainConfig& base, const std::vector<std::pair<int, int>>& chains,
                                         std::size_t k, std::size_t n_samples = kEvalSamples,
                                         std::size_t threads = 0);

std::string comparison_csv_header();
std::string comparison_csv_row(const ToyComparison& c);

}  // namespace tdpm
