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
#include <span>
#include <string>
#include <vector>

#include "tdpm/optim.hpp"
#include "tdpm/rng.hpp"
#include "tdpm/tensor.hpp"

namespace tdpm {

// Fully connected layer y = x W + b with W stored [in, out].
struct Linear {
  ad::Tensor weight;
  ad::Tensor bias;

  static Linear init(std::size_t in, std::size_t out, Rng& rng);
  ad::Tensor operator()(const ad::Tensor& x) const;
  // act(x W + b + addend) as one fused node.
  ad::Tensor apply(const ad::Tensor& x, ad::Activation act, const ad::Tensor* addend = nullptr) const;
  void register_params(ParamSet& params, const std::string& prefix) const;
};

// Sinusoidal encoding of integer time indices, one row per entry.
std::vector<double> sinusoidal_embedding(std::span<const int> t, std::size_t dim);

// Four linear layers (in -> width -> width -> width -> out) with softplus on
// the three hidden layers. With time embedding enabled, each hidden
// pre-activation also receives Linear_l(sinusoid(t)).
//
// Used for the denoiser eps_theta, the shared implicit generator (same
// network at t = T_trunc + 1) and, without time embedding, the separate
// generator G_psi.
class TimeEmbedMlp {
 public:
  static constexpr std::size_t kLayers = 4;

  TimeEmbedMlp() = default;
  // max_t bounds the accepted time indices; 0 means the network has no
  // time embedding at all.
  TimeEmbedMlp(std::string name, int max_t, std::uint64_t seed, std::size_t width = 128,
               std::size_t io_dim = 2);

  const std::string& name() const { return name_; }
  int max_t() const { return max_t_; }
  bool has_time() const { return max_t_ > 0; }
  std::size_t width() const { return width_; }

  // x: [B, io_dim]; t: one index per row in [1, max_t].
  ad::Tensor forward(const ad::Tensor& x, std::span<const int> t) const;
  // Same index for every row.
  ad::Tensor forward(const ad::Tensor& x, int t) const;
  // Time-free forward (separate generator only).
  ad::Tensor forward(const ad::Tensor& x) const;

  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

 private:
  std::string name_;
  int max_t_ = 0;
  std::size_t width_ = 0;
  std::vector<Linear> layers_;
  std::vector<Linear> time_layers_;
  ParamSet params_;
};

// Four linear layers with leaky-ReLU(0.2) hidden activations and a scalar
// head. Used for the discriminator and the CT critic.
class Critic {
 public:
  Critic() = default;
  Critic(std::string name, std::uint64_t seed, std::size_t in_dim = 2, std::size_t width = 128);

  struct Output {
    ad::Tensor logits;    // [B]
    ad::Tensor features;  // [B, width], penultimate activation
  };
  Output forward(const ad::Tensor& x) const;
  ad::Tensor logits(const ad::Tensor& x) const { return forward(x).logits; }
  ad::Tensor features(const ad::Tensor& x) const { return forward(x).features; }

  std::size_t width() const { return width_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

 private:
  std::size_t width_ = 0;
  std::vector<Linear> layers_;
  ParamSet params_;
};

// Critic-shaped network applied elementwise to a matrix of pairwise feature
// distances: [m, k] -> [m, k] scores.
class Navigator {
 public:
  Navigator() = default;
  Navigator(std::string name, std::uint64_t seed, std::size_t width = 128);

  ad::Tensor scores(const ad::Tensor& distances) const;

  const Critic& net() const { return net_; }
  Critic& net() { return net_; }
  const ParamSet& params() const { return net_.params(); }
  ParamSet& params() { return net_.params(); }

 private:
  Critic net_;
};

// Noise prediction eps_theta(x, t) for a single shared time index.
ad::Tensor denoise_eps(const TimeEmbedMlp& model, const ad::Tensor& x, int t);

// Implicit prior, shared configuration: the denoiser evaluated at the
// reserved index T_trunc + 1.
ad::Tensor generate_prior_shared(const TimeEmbedMlp& model, const ad::Tensor& z, int t_trunc);

// Implicit prior, separate configuration: a time-free network.
ad::Tensor generate_prior_separate(const TimeEmbedMlp& generator, const ad::Tensor& z);

// Logits of the discriminator, one per row.
ad::Tensor discriminate(const Critic& critic, const ad::Tensor& x);

// Row-stochastic assignment softmax_j(nav(||f(src_i) - f(dst_j)||^2)).
ad::Tensor navigator_assign(const Navigator& nav, const Critic& critic, const ad::Tensor& src,
                            const ad::Tensor& dst, bool normalize_features = true);

// Squared distances between critic features. With normalize, features are
// first scaled to unit length, which bounds the cost to [0, 4].
ad::Tensor critic_cost(const Critic& critic, const ad::Tensor& a, const ad::Tensor& b, bool normalize);

}  // namespace tdpm
