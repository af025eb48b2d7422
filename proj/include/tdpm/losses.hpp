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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdpm/models.hpp"
#include "tdpm/rng.hpp"
#include "tdpm/schedule.hpp"
#include "tdpm/tensor.hpp"

namespace tdpm {

// eps_theta(x_t, t) with one time index per row.
using EpsPredictor = std::function<ad::Tensor(const ad::Tensor& x, std::span<const int> t)>;

EpsPredictor as_predictor(const TimeEmbedMlp& model);

// ---- denoising ----------------------------------------------------------

// Mean over rows of ||eps - eps_theta(sqrt(ab_t) x0 + sqrt(1 - ab_t) eps, t)||^2
// for explicitly supplied t and eps. x0 and eps are [B, 2].
ad::Tensor denoising_loss(const EpsPredictor& predictor, const ad::Tensor& x0, std::span<const int> t,
                          const ad::Tensor& eps, const NoiseSchedule& schedule);

// Monte-Carlo estimate with t ~ U{1..t_max} and eps ~ N(0, I) drawn from rng.
// t_max = T_trunc for the truncated loss, T for the full-chain baseline.
ad::Tensor loss_simple_trunc(const EpsPredictor& predictor, const ad::Tensor& x0, const NoiseSchedule& schedule,
                             int t_max, Rng& rng);

// Forward marginal sample sqrt(ab_t) x0 + sqrt(1 - ab_t) eps; t = 0 returns x0.
ad::Tensor diffuse(const ad::Tensor& x0, const NoiseSchedule& schedule, int t, Rng& rng);

// ---- GAN prior matching -------------------------------------------------

enum class GeneratorLoss { kNonSaturating, kMinimax };

std::string to_string(GeneratorLoss kind);
GeneratorLoss parse_generator_loss(const std::string& name);

// -[log sigmoid(real) + log(1 - sigmoid(fake))], averaged, via softplus.
ad::Tensor gan_discriminator_loss(const ad::Tensor& real_logits, const ad::Tensor& fake_logits);

// Non-saturating: mean -log sigmoid(fake). Minimax: mean log(1 - sigmoid(fake)).
ad::Tensor gan_generator_loss(const ad::Tensor& fake_logits, GeneratorLoss kind);

struct GanLosses {
  ad::Tensor generator;
  ad::Tensor discriminator;
};

// Both sides of the adversarial objective. The discriminator loss sees a
// detached fake batch, so it back-propagates into the critic only. The
// generator loss reaches the critic's parameters only if they are tracked.
GanLosses loss_gan(const Critic& disc, const ad::Tensor& real, const ad::Tensor& fake, GeneratorLoss kind);

// ---- conditional transport ----------------------------------------------

// Transport objective from a cost matrix C [m, k] and navigator scores S
// [m, k]: mean_i sum_j softmax_j(S)_ij C_ij + mean_j sum_i softmax_i(S)_ij C_ij.
ad::Tensor ct_transport(const ad::Tensor& cost, const ad::Tensor& scores);

struct CtLoss {
  ad::Tensor transport;  // minimized by generator and navigator, maximized by critic
  ad::Tensor cost;       // [m, k] critic-feature cost matrix
};

CtLoss loss_ct(const Critic& critic, const Navigator& nav, const ad::Tensor& real, const ad::Tensor& fake,
               bool normalize_features = true);

// ---- combined objective -------------------------------------------------

struct LossReport {
  std::optional<double> simple;  // absent when T_trunc = 0
  double prior_g = 0.0;
  double prior_d = 0.0;
  double lambda = 1.0;
  double total = 0.0;  // simple + lambda * prior_g
};

LossReport combined_tdpm_loss(std::optional<double> simple, double prior_g, double prior_d, double lambda = 1.0);

std::string loss_log_header();
std::string loss_log_row(std::int64_t iteration, const LossReport& report);

// ---- ELBO diagnostics ---------------------------------------------------

struct ElboTerms {
  double l0 = 0.0;
  std::vector<double> l_prev;  // L_{t-1} for t = 2..T_end, index t - 2
  double lT = 0.0;
};

// KL(q(x_T | x0) || N(0, I)) averaged over rows of x0 [B, 2].
double prior_kl(const ad::Tensor& x0, const NoiseSchedule& schedule, int t_end);

// Per-term negative ELBO of a chain of length t_end with reverse variance
// sigma_t^2 = posterior variance (t >= 2) and beta_1 for the decoder term.
// Expectations over x_t use one forward-marginal draw per row.
ElboTerms elbo_diagnostics(const EpsPredictor& predictor, const ad::Tensor& x0, const NoiseSchedule& schedule,
                           int t_end, Rng& rng);

}  // namespace tdpm
