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
#include <map>
#include <string>
#include <vector>

#include "tdpm/losses.hpp"
#include "tdpm/sampler_options.hpp"
#include "tdpm/schedule.hpp"

namespace tdpm {

enum class PriorMode { kGan, kCt };
enum class GeneratorConfig { kShared, kSeparate };
enum class Method { kTdpm, kDdpm };

std::string to_string(PriorMode mode);
std::string to_string(GeneratorConfig config);
std::string to_string(Method method);

// Every knob of a training run. Serialized as flat "key = value" text; the
// key set is fixed and unknown keys are rejected.
struct TrainConfig {
  // data
  std::string dataset = "swiss_roll";
  std::uint64_t data_seed = 0;
  std::size_t data_size = 2000;
  double data_noise = -1.0;  // < 0: dataset default

  // diffusion chain
  Method method = Method::kTdpm;
  ScheduleFamily schedule = ScheduleFamily::kLinear;
  int T = 5;
  double beta1 = 0.05;
  double betaT = 0.5;
  double cosine_s = 0.008;
  int T_trunc = 4;

  // prior matching
  PriorMode mode = PriorMode::kGan;
  GeneratorConfig generator = GeneratorConfig::kShared;
  GeneratorLoss gen_loss = GeneratorLoss::kNonSaturating;
  double lambda = 1.0;
  bool ct_normalize = true;

  // networks
  std::size_t width = 128;
  std::size_t nav_width = 128;

  // optimization
  std::uint64_t seed = 0;
  std::size_t batch_size = 128;
  std::int64_t iterations = 1000;
  std::int64_t epochs = 0;  // > 0 overrides iterations with epochs * ceil(data_size / batch_size)
  double lr_gen = 1e-5;
  double lr_disc = 1e-4;
  double lr_nav = 1e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.9;
  double adam_eps = 1e-8;
  double ema_decay = 0.9999;
  int d_steps = 1;
  double grad_clip = 0.0;  // 0 disables

  // sampling
  NoiseScale noise_scale = NoiseScale::kPosterior;

  // bookkeeping
  std::int64_t log_every = 100;
  std::int64_t checkpoint_every = 0;  // 0: final checkpoint only
  std::string out_dir;

  // Total number of train steps this configuration asks for.
  std::int64_t total_iterations() const;
  // Time indices the denoiser must accept (T_trunc + 1 for TDPM, T for DDPM).
  int model_max_t() const;

  // Throws ConfigError on any inconsistency (e.g. T_trunc >= T).
  void validate() const;

  // Applies one key/value pair. Throws ConfigError naming unknown keys.
  void set(const std::string& key, const std::string& value);

  std::map<std::string, std::string> to_map() const;
  std::string to_text() const;
  static TrainConfig from_map(const std::map<std::string, std::string>& kv);
  static TrainConfig parse(const std::string& text);
  static TrainConfig load(const std::filesystem::path& path);

  static const std::vector<std::string>& keys();
};

}  // namespace tdpm
