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
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tdpm/config.hpp"
#include "tdpm/datasets.hpp"
#include "tdpm/losses.hpp"
#include "tdpm/models.hpp"
#include "tdpm/optim.hpp"
#include "tdpm/rng.hpp"
#include "tdpm/schedule.hpp"

namespace tdpm {

std::shared_ptr<const NoiseSchedule> make_schedule(const TrainConfig& config);

// Everything a run needs to continue: networks, optimizer moments, EMA
// shadows and the noise stream cursor. The dataset is regenerated from the
// config, and minibatch order is a pure function of (seed, iteration).
struct TrainState {
  TrainConfig config;
  std::shared_ptr<const NoiseSchedule> schedule;
  Dataset2D data;
  std::int64_t iteration = 0;

  TimeEmbedMlp model;                      // theta: eps_theta, and the generator when shared
  std::optional<TimeEmbedMlp> generator;   // psi when separate
  Critic critic;                           // phi: discriminator (gan) or critic (ct)
  std::optional<Navigator> navigator;      // eta, ct mode only

  AdamState adam_model;
  std::optional<AdamState> adam_generator;
  AdamState adam_critic;
  std::optional<AdamState> adam_navigator;

  EmaState ema_model;
  std::optional<EmaState> ema_generator;

  Rng noise_rng;

  bool adversarial() const { return config.method == Method::kTdpm; }
  bool shared() const { return !generator.has_value(); }
  // psi: the separate generator or, when shared, the denoiser itself.
  const ParamSet& generator_params() const { return generator ? generator->params() : model.params(); }
};

// Fresh state; networks are initialized from derived seeds of config.seed.
TrainState init_state(const TrainConfig& config);

// One alternating update: discriminator (or critic) step, then a joint
// generator + denoiser step, then EMA. DDPM runs only the denoiser step.
// Throws NumericError naming the first non-finite loss term.
LossReport train_step(TrainState& state);

struct TrainHooks {
  // Called after every logged step (iteration, report).
  std::function<void(std::int64_t, const LossReport&)> on_log;
};

// Runs the remaining iteration budget. With out_dir set, writes
// train_log.csv and checkpoints (ckpt_{iter}.bin and final.bin).
void train(TrainState& state, const TrainHooks& hooks = {});
TrainState train(const TrainConfig& config, const TrainHooks& hooks = {});

// Denoiser-only training over the full chain, t ~ U{1..T}.
TrainState train_ddpm_baseline(TrainConfig config, const TrainHooks& hooks = {});

// Networks used for sampling: copies holding the EMA weights.
struct SamplingModels {
  TimeEmbedMlp model;
  std::optional<TimeEmbedMlp> generator;
  int t_trunc = 0;  // truncation the networks were trained for; T for DDPM
  Method method = Method::kTdpm;
};
SamplingModels ema_models(const TrainState& state);
SamplingModels live_models(const TrainState& state);

// Checkpoint container: "TDPMCKPT", u64 header length, JSON header, then
// little-endian float64 blocks in header order.
inline constexpr int kCheckpointVersion = 1;

std::string serialize_checkpoint(const TrainState& state);
TrainState deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace tdpm
