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

#include "tdpm/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tdpm/errors.hpp"

namespace tdpm {

namespace {

enum Stream : std::uint64_t {
  kModelStream = 1,
  kGeneratorStream = 2,
  kCriticStream = 3,
  kNavigatorStream = 4,
  kNoiseStream = 5,
  kEpochStream = 6,
};

AdamConfig adam_config(const TrainConfig& c, double lr) { return {lr, c.adam_beta1, c.adam_beta2, c.adam_eps}; }

ad::Tensor normal_batch(std::size_t rows, Rng& rng) {
  std::vector<double> v(rows * 2);
  for (double& e : v) e = rng.normal();
  return ad::Tensor::from({rows, 2}, std::move(v));
}

// Evaluates one loss term, attributing any numeric failure to it by name.
template <typename F>
ad::Tensor term(const char* name, F&& f) {
  ad::Tensor out;
  try {
    out = f();
  } catch (const NumericError& e) {
    throw NumericError(std::string("non-finite ") + name + ": " + e.what());
  }
  if (!std::isfinite(out.item())) throw NumericError(std::string("non-finite ") + name);
  return out;
}

void backward_checked(const ad::Tensor& loss, const ParamSet& params, const char* name) {
  try {
    loss.backward();
  } catch (const NumericError& e) {
    throw NumericError(std::string("non-finite gradient of ") + name + ": " + e.what());
  }
  for (const auto& [pname, p] : params) {
    for (double g : p.grad()) {
      if (!std::isfinite(g)) throw NumericError(std::string("non-finite gradient of ") + name + " at " + pname);
    }
  }
}

// Batch for the current iteration: epoch-wise shuffled, consecutive slices,
// with a shorter final slice when the data size is not a batch multiple.
ad::Tensor batch_for(const TrainState& s) {
  const std::size_t n = s.data.size();
  const std::size_t b = std::min(s.config.batch_size, n);
  const std::size_t per_epoch = (n + b - 1) / b;
  const auto it = static_cast<std::size_t>(s.iteration);
  const std::size_t epoch = it / per_epoch;
  const std::size_t slot = it % per_epoch;
  const auto order = shuffled_indices(n, derive_seed(derive_seed(s.config.seed, kEpochStream), epoch));
  const std::size_t first = slot * b;
  const std::size_t count = std::min(b, n - first);
  const std::span<const std::size_t> idx(order.data() + first, count);
  return ad::Tensor::from({count, 2}, gather_points(s.data, idx));
}

ad::Tensor prior_sample(const TrainState& s, const ad::Tensor& z) {
  if (s.generator) return generate_prior_separate(*s.generator, z);
  return generate_prior_shared(s.model, z, s.config.T_trunc);
}

void update(ParamSet& params, AdamState& adam, double clip, double direction = 1.0) {
  if (clip > 0.0) clip_grad_norm(params, clip);
  adam_step(params, adam, direction);
}

// Discriminator / critic update. Returns its loss value.
double critic_step(TrainState& s, const ad::Tensor& real) {
  const TrainConfig& c = s.config;
  auto make_fake = [&] {
    ad::NoGradGuard no_grad;
    return prior_sample(s, normal_batch(real.size(0), s.noise_rng));
  };
  s.critic.params().zero_grad();
  if (c.mode == PriorMode::kGan) {
    const ad::Tensor loss = term("loss_prior_d", [&] {
      const ad::Tensor fake = make_fake();
      return gan_discriminator_loss(s.critic.logits(real), s.critic.logits(fake));
    });
    backward_checked(loss, s.critic.params(), "loss_prior_d");
    update(s.critic.params(), s.adam_critic, c.grad_clip);
    return loss.item();
  }
  s.navigator->params().set_requires_grad(false);
  const ad::Tensor loss = term("loss_prior_d", [&] {
    const ad::Tensor fake = make_fake();
    return loss_ct(s.critic, *s.navigator, real, fake, c.ct_normalize).transport;
  });
  backward_checked(loss, s.critic.params(), "loss_prior_d");
  s.navigator->params().set_requires_grad(true);
  // The critic maximizes the transport cost.
  update(s.critic.params(), s.adam_critic, c.grad_clip, -1.0);
  return loss.item();
}

}  // namespace

std::shared_ptr<const NoiseSchedule> make_schedule(const TrainConfig& c) {
  if (c.schedule == ScheduleFamily::kLinear) {
    return std::make_shared<const NoiseSchedule>(NoiseSchedule::linear(c.T, c.beta1, c.betaT));
  }
  return std::make_shared<const NoiseSchedule>(NoiseSchedule::cosine(c.T, c.cosine_s));
}

TrainState init_state(const TrainConfig& config) {
  config.validate();
  TrainState s;
  s.config = config;
  s.schedule = make_schedule(config);
  s.data = make_dataset(config.dataset, config.data_size, config.data_noise, config.data_seed);
  const std::uint64_t seed = config.seed;
  s.model = TimeEmbedMlp("eps", config.model_max_t(), derive_seed(seed, kModelStream), config.width);
  s.adam_model = AdamState::init(s.model.params(), adam_config(config, config.lr_gen));
  s.ema_model = EmaState::init(s.model.params(), config.ema_decay);
  if (s.adversarial()) {
    if (config.generator == GeneratorConfig::kSeparate) {
      s.generator = TimeEmbedMlp("gen", 0, derive_seed(seed, kGeneratorStream), config.width);
      s.adam_generator = AdamState::init(s.generator->params(), adam_config(config, config.lr_gen));
      s.ema_generator = EmaState::init(s.generator->params(), config.ema_decay);
    }
    s.critic = Critic(config.mode == PriorMode::kGan ? "disc" : "critic", derive_seed(seed, kCriticStream), 2,
                      config.width);
    s.adam_critic = AdamState::init(s.critic.params(), adam_config(config, config.lr_disc));
    if (config.mode == PriorMode::kCt) {
      s.navigator = Navigator("nav", derive_seed(seed, kNavigatorStream), config.nav_width);
      s.adam_navigator = AdamState::init(s.navigator->params(), adam_config(config, config.lr_nav));
    }
  }
  s.noise_rng = Rng(derive_seed(seed, kNoiseStream));
  return s;
}

LossReport train_step(TrainState& s) {
  const TrainConfig& c = s.config;
  const ad::Tensor x0 = batch_for(s);
  const std::size_t b = x0.size(0);
  const EpsPredictor eps = as_predictor(s.model);
  const int t_max = s.adversarial() ? c.T_trunc : c.T;

  std::optional<double> prior_d;
  ad::Tensor real;
  if (s.adversarial()) {
    real = diffuse(x0, *s.schedule, c.T_trunc, s.noise_rng);
    for (int k = 0; k < c.d_steps; ++k) prior_d = critic_step(s, real);
  }

  // Generator + denoiser step. phi is frozen so the generator loss only
  // reaches theta / psi.
  s.model.params().zero_grad();
  if (s.generator) s.generator->params().zero_grad();
  s.critic.params().set_requires_grad(false);

  ad::Tensor total;
  std::optional<double> simple;
  if (t_max >= 1) {
    const ad::Tensor l = term("loss_simple", [&] { return loss_simple_trunc(eps, x0, *s.schedule, t_max, s.noise_rng); });
    simple = l.item();
    total = l;
  }
  double prior_g = 0.0;
  if (s.adversarial()) {
    if (s.navigator) s.navigator->params().zero_grad();
    const ad::Tensor z = normal_batch(b, s.noise_rng);
    const ad::Tensor g = term("loss_prior_g", [&] {
      const ad::Tensor fake = prior_sample(s, z);
      if (c.mode == PriorMode::kGan) return gan_generator_loss(s.critic.logits(fake), c.gen_loss);
      return loss_ct(s.critic, *s.navigator, real, fake, c.ct_normalize).transport;
    });
    prior_g = g.item();
    const ad::Tensor weighted = ad::scale(g, c.lambda);
    total = total.node() ? total + weighted : weighted;
  }
  const ad::Tensor checked_total = term("loss_total", [&] { return total; });
  ParamSet touched = s.model.params();
  if (s.generator) touched.append(s.generator->params());
  if (s.navigator) touched.append(s.navigator->params());
  backward_checked(checked_total, touched, "loss_total");
  s.critic.params().set_requires_grad(true);

  update(s.model.params(), s.adam_model, c.grad_clip);
  if (s.generator) update(s.generator->params(), *s.adam_generator, c.grad_clip);
  if (s.navigator) update(s.navigator->params(), *s.adam_navigator, c.grad_clip);

  ema_update(s.ema_model, s.model.params());
  if (s.generator) ema_update(*s.ema_generator, s.generator->params());
  ++s.iteration;
  return combined_tdpm_loss(simple, prior_g, prior_d.value_or(0.0), s.adversarial() ? c.lambda : 0.0);
}

namespace {

std::filesystem::path log_path(const TrainState& s) { return std::filesystem::path(s.config.out_dir) / "train_log.csv"; }

// Opens the log for appending, dropping rows past the current iteration so a
// resumed run continues the file it was checkpointed from.
std::ofstream open_log(const TrainState& s) {
  const auto path = log_path(s);
  std::filesystem::create_directories(path.parent_path());
  std::string kept = loss_log_header() + "\n";
  if (s.iteration > 0) {
    std::ifstream in(path);
    std::string line;
    bool header = true;
    while (in && std::getline(in, line)) {
      if (header) {
        header = false;
        continue;
      }
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      if (std::stoll(line.substr(0, comma)) <= s.iteration) kept += line + "\n";
    }
  }
  {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write training log '" + path.string() + "'");
    out << kept;
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write training log '" + path.string() + "'");
  return out;
}

}  // namespace

void train(TrainState& s, const TrainHooks& hooks) {
  const TrainConfig& c = s.config;
  const bool to_disk = !c.out_dir.empty();
  std::ofstream log;
  if (to_disk) log = open_log(s);
  const std::filesystem::path dir(c.out_dir);
  const std::int64_t budget = c.total_iterations();
  while (s.iteration < budget) {
    const LossReport r = train_step(s);
    const bool last = s.iteration == budget;
    if (c.log_every > 0 && (s.iteration % c.log_every == 0 || last)) {
      if (to_disk) {
        log << loss_log_row(s.iteration, r) << '\n';
        if (!log) throw IoError("write failed for '" + log_path(s).string() + "'");
      }
      if (hooks.on_log) hooks.on_log(s.iteration, r);
    }
    if (to_disk && c.checkpoint_every > 0 && s.iteration % c.checkpoint_every == 0) {
      save_checkpoint(s, dir / ("ckpt_" + std::to_string(s.iteration) + ".bin"));
    }
  }
  if (to_disk) {
    log.flush();
    save_checkpoint(s, dir / "final.bin");
  }
}

TrainState train(const TrainConfig& config, const TrainHooks& hooks) {
  TrainState s = init_state(config);
  train(s, hooks);
  return s;
}

TrainState train_ddpm_baseline(TrainConfig config, const TrainHooks& hooks) {
  config.method = Method::kDdpm;
  return train(config, hooks);
}

namespace {

TimeEmbedMlp clone_with(const TimeEmbedMlp& net, const std::vector<std::vector<double>>& values) {
  TimeEmbedMlp copy(net.name(), net.max_t(), 0, net.width());
  copy.params().load(values);
  return copy;
}

}  // namespace

SamplingModels ema_models(const TrainState& s) {
  SamplingModels m{clone_with(s.model, s.ema_model.shadow), std::nullopt,
                   s.adversarial() ? s.config.T_trunc : s.config.T, s.config.method};
  if (s.generator) m.generator = clone_with(*s.generator, s.ema_generator->shadow);
  return m;
}

SamplingModels live_models(const TrainState& s) {
  SamplingModels m{clone_with(s.model, s.model.params().snapshot()), std::nullopt,
                   s.adversarial() ? s.config.T_trunc : s.config.T, s.config.method};
  if (s.generator) m.generator = clone_with(*s.generator, s.generator->params().snapshot());
  return m;
}

}  // namespace tdpm
