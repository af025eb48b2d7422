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

#include "tdpm/losses.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tdpm/csv.hpp"
#include "tdpm/errors.hpp"

namespace tdpm {

EpsPredictor as_predictor(const TimeEmbedMlp& model) {
  return [&model](const ad::Tensor& x, std::span<const int> t) { return model.forward(x, t); };
}

namespace {

void require_batch2(const char* op, const ad::Tensor& x) {
  if (x.dim() != 2 || x.size(1) != 2) {
    throw ShapeError(std::string(op) + ": expected [B, 2], got " + ad::to_string(x.shape()));
  }
}

ad::Tensor normal_like(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> v(rows * cols);
  for (double& e : v) e = rng.normal();
  return ad::Tensor::from({rows, cols}, std::move(v));
}

// sqrt(ab_t) x0 + sqrt(1 - ab_t) eps, row by row.
ad::Tensor marginal(const ad::Tensor& x0, std::span<const int> t, const ad::Tensor& eps,
                    const NoiseSchedule& schedule) {
  const std::size_t b = x0.size(0), d = x0.size(1);
  std::vector<double> xt(b * d);
  const auto xv = x0.data();
  const auto ev = eps.data();
  for (std::size_t i = 0; i < b; ++i) {
    const double ab = schedule.alpha_bar(t[i]);
    const double a = std::sqrt(ab), s = std::sqrt(1.0 - ab);
    for (std::size_t j = 0; j < d; ++j) xt[i * d + j] = a * xv[i * d + j] + s * ev[i * d + j];
  }
  return ad::Tensor::from({b, d}, std::move(xt));
}

}  // namespace

ad::Tensor denoising_loss(const EpsPredictor& predictor, const ad::Tensor& x0, std::span<const int> t,
                          const ad::Tensor& eps, const NoiseSchedule& schedule) {
  require_batch2("denoising_loss", x0);
  if (eps.shape() != x0.shape()) throw ShapeError("denoising_loss: eps shape differs from x0");
  if (t.size() != x0.size(0)) throw ShapeError("denoising_loss: one time index per row required");
  const ad::Tensor xt = marginal(x0.detach(), t, eps, schedule);
  const ad::Tensor pred = predictor(xt, t);
  return ad::mean(ad::sum_rows(ad::square(eps - pred)));
}

ad::Tensor loss_simple_trunc(const EpsPredictor& predictor, const ad::Tensor& x0, const NoiseSchedule& schedule,
                             int t_max, Rng& rng) {
  if (t_max < 1) {
    throw ContractError("loss_simple_trunc: T_trunc = 0 has no denoising steps; skip the denoising term");
  }
  if (t_max > schedule.T()) throw ContractError("loss_simple_trunc: t_max exceeds schedule length");
  require_batch2("loss_simple_trunc", x0);
  const std::size_t b = x0.size(0);
  std::vector<int> t(b);
  for (int& ti : t) ti = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(t_max)));
  const ad::Tensor eps = normal_like(b, 2, rng);
  return denoising_loss(predictor, x0, t, eps, schedule);
}

ad::Tensor diffuse(const ad::Tensor& x0, const NoiseSchedule& schedule, int t, Rng& rng) {
  require_batch2("diffuse", x0);
  if (t == 0) return x0.detach();
  const ad::Tensor eps = normal_like(x0.size(0), 2, rng);
  const std::vector<int> ts(x0.size(0), t);
  return marginal(x0, ts, eps, schedule);
}

// ---- GAN ----------------------------------------------------------------

std::string to_string(GeneratorLoss kind) {
  return kind == GeneratorLoss::kNonSaturating ? "non_saturating" : "minimax";
}

GeneratorLoss parse_generator_loss(const std::string& name) {
  if (name == "non_saturating") return GeneratorLoss::kNonSaturating;
  if (name == "minimax") return GeneratorLoss::kMinimax;
  throw ConfigError("unknown generator loss '" + name + "' (expected non_saturating or minimax)");
}

ad::Tensor gan_discriminator_loss(const ad::Tensor& real_logits, const ad::Tensor& fake_logits) {
  // -log sigmoid(x) = softplus(-x); -log(1 - sigmoid(x)) = softplus(x)
  return ad::mean(ad::softplus(-real_logits)) + ad::mean(ad::softplus(fake_logits));
}

ad::Tensor gan_generator_loss(const ad::Tensor& fake_logits, GeneratorLoss kind) {
  if (kind == GeneratorLoss::kNonSaturating) return ad::mean(ad::softplus(-fake_logits));
  return -ad::mean(ad::softplus(fake_logits));
}

GanLosses loss_gan(const Critic& disc, const ad::Tensor& real, const ad::Tensor& fake, GeneratorLoss kind) {
  const ad::Tensor d_loss = gan_discriminator_loss(disc.logits(real.detach()), disc.logits(fake.detach()));
  const ad::Tensor g_loss = gan_generator_loss(disc.logits(fake), kind);
  return {g_loss, d_loss};
}

// ---- CT -----------------------------------------------------------------

ad::Tensor ct_transport(const ad::Tensor& cost, const ad::Tensor& scores) {
  if (cost.shape() != scores.shape() || cost.dim() != 2) {
    throw ShapeError("ct_transport: cost " + ad::to_string(cost.shape()) + " and scores " +
                     ad::to_string(scores.shape()) + " must be equal-shape matrices");
  }
  const double m = static_cast<double>(cost.size(0));
  const double k = static_cast<double>(cost.size(1));
  const ad::Tensor forward = ad::scale(ad::sum(ad::softmax_rows(scores) * cost), 1.0 / m);
  const ad::Tensor backward = ad::scale(ad::sum(ad::softmax_cols(scores) * cost), 1.0 / k);
  return forward + backward;
}

CtLoss loss_ct(const Critic& critic, const Navigator& nav, const ad::Tensor& real, const ad::Tensor& fake,
               bool normalize_features) {
  if (real.size(0) == 0 || fake.size(0) == 0) throw ContractError("loss_ct: empty batch");
  const ad::Tensor cost = critic_cost(critic, real, fake, normalize_features);
  return {ct_transport(cost, nav.scores(cost)), cost};
}

// ---- combined -----------------------------------------------------------

LossReport combined_tdpm_loss(std::optional<double> simple, double prior_g, double prior_d, double lambda) {
  LossReport r;
  r.simple = simple;
  r.prior_g = prior_g;
  r.prior_d = prior_d;
  r.lambda = lambda;
  r.total = simple.value_or(0.0) + lambda * prior_g;
  return r;
}

std::string loss_log_header() { return "iter,loss_simple,loss_prior_g,loss_prior_d,loss_total"; }

std::string loss_log_row(std::int64_t iteration, const LossReport& r) {
  std::ostringstream os;
  os << iteration << ',' << (r.simple ? format_double(*r.simple) : std::string()) << ','
     << format_double(r.prior_g) << ',' << format_double(r.prior_d) << ',' << format_double(r.total);
  return os.str();
}

// ---- ELBO ---------------------------------------------------------------

double prior_kl(const ad::Tensor& x0, const NoiseSchedule& schedule, int t_end) {
  require_batch2("prior_kl", x0);
  const double ab = schedule.alpha_bar(t_end);
  const double var = 1.0 - ab;
  double total = 0.0;
  for (double v : x0.data()) total += 0.5 * (var + ab * v * v - 1.0 - std::log(var));
  return total / static_cast<double>(x0.size(0));
}

ElboTerms elbo_diagnostics(const EpsPredictor& predictor, const ad::Tensor& x0, const NoiseSchedule& schedule,
                           int t_end, Rng& rng) {
  require_batch2("elbo_diagnostics", x0);
  if (t_end < 1 || t_end > schedule.T()) throw ContractError("elbo_diagnostics: chain length out of range");
  ad::NoGradGuard no_grad;
  const std::size_t b = x0.size(0);
  const auto xv = x0.data();
  ElboTerms out;
  out.lT = prior_kl(x0, schedule, t_end);

  auto model_mean = [&](const ad::Tensor& xt, int t) {
    const std::vector<int> ts(b, t);
    const ad::Tensor eps_hat = predictor(xt, ts);
    const double coef = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
    const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
    std::vector<double> mu(b * 2);
    for (std::size_t i = 0; i < b * 2; ++i) mu[i] = inv_sqrt_alpha * (xt[i] - coef * eps_hat[i]);
    return mu;
  };

  for (int t = 2; t <= t_end; ++t) {
    const ad::Tensor xt = diffuse(x0, schedule, t, rng);
    const auto pc = posterior_coeffs(schedule, t);
    const auto mu = model_mean(xt, t);
    double total = 0.0;
    for (std::size_t i = 0; i < b * 2; ++i) {
      const double diff = pc.coef_x0 * xv[i] + pc.coef_xt * xt[i] - mu[i];
      total += diff * diff / (2.0 * pc.variance);
    }
    out.l_prev.push_back(total / static_cast<double>(b));
  }

  const ad::Tensor x1 = diffuse(x0, schedule, 1, rng);
  const auto mu = model_mean(x1, 1);
  const double var = schedule.beta(1);
  double nll = 0.0;
  for (std::size_t i = 0; i < b * 2; ++i) {
    const double diff = xv[i] - mu[i];
    nll += 0.5 * std::log(2.0 * std::numbers::pi * var) + diff * diff / (2.0 * var);
  }
  out.l0 = nll / static_cast<double>(b);
  return out;
}

}  // namespace tdpm
