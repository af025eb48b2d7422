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

#include "tdpm/models.hpp"

#include <algorithm>
#include <cmath>

#include "tdpm/errors.hpp"

namespace tdpm {

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng) {
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for both weight and bias.
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::vector<double> w(in * out);
  std::vector<double> b(out);
  for (double& v : w) v = rng.uniform(-bound, bound);
  for (double& v : b) v = rng.uniform(-bound, bound);
  return {ad::Tensor::from({in, out}, std::move(w), true), ad::Tensor::from({out}, std::move(b), true)};
}

ad::Tensor Linear::operator()(const ad::Tensor& x) const { return ad::matmul(x, weight) + bias; }

ad::Tensor Linear::apply(const ad::Tensor& x, ad::Activation act, const ad::Tensor* addend) const {
  return ad::dense(x, weight, bias, act, 0.2, addend);
}

void Linear::register_params(ParamSet& params, const std::string& prefix) const {
  params.add(prefix + ".weight", weight);
  params.add(prefix + ".bias", bias);
}

std::vector<double> sinusoidal_embedding(std::span<const int> t, std::size_t dim) {
  const std::size_t half = dim / 2;
  std::vector<double> out(t.size() * dim, 0.0);
  const double scale = half > 1 ? std::log(10000.0) / static_cast<double>(half - 1) : 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < half; ++j) {
      const double arg = static_cast<double>(t[i]) * std::exp(-scale * static_cast<double>(j));
      out[i * dim + j] = std::sin(arg);
      out[i * dim + half + j] = std::cos(arg);
    }
  }
  return out;
}

// ---- TimeEmbedMlp -------------------------------------------------------

TimeEmbedMlp::TimeEmbedMlp(std::string name, int max_t, std::uint64_t seed, std::size_t width,
                           std::size_t io_dim)
    : name_(std::move(name)), max_t_(max_t), width_(width) {
  if (max_t < 0) throw ContractError("TimeEmbedMlp: max_t must be >= 0");
  Rng rng(seed);
  const std::size_t dims[kLayers + 1] = {io_dim, width, width, width, io_dim};
  for (std::size_t l = 0; l < kLayers; ++l) {
    layers_.push_back(Linear::init(dims[l], dims[l + 1], rng));
    layers_.back().register_params(params_, name_ + ".fc" + std::to_string(l + 1));
  }
  if (has_time()) {
    for (std::size_t l = 0; l + 1 < kLayers; ++l) {
      time_layers_.push_back(Linear::init(width, width, rng));
      time_layers_.back().register_params(params_, name_ + ".temb" + std::to_string(l + 1));
    }
  }
}

ad::Tensor TimeEmbedMlp::forward(const ad::Tensor& x, std::span<const int> t) const {
  if (!has_time()) throw ContractError(name_ + ": network has no time embedding");
  if (x.dim() != 2) throw ShapeError(name_ + ": input must be [B, d], got " + ad::to_string(x.shape()));
  if (t.size() != x.size(0)) {
    throw ShapeError(name_ + ": " + std::to_string(t.size()) + " time indices for batch of " +
                     std::to_string(x.size(0)));
  }
  // Embed each distinct index once, then gather per row.
  std::vector<int> distinct(t.begin(), t.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (int v : distinct) {
    if (v < 1 || v > max_t_) {
      throw ContractError(name_ + ": time index " + std::to_string(v) + " outside [1, " + std::to_string(max_t_) +
                          "]");
    }
  }
  std::vector<std::size_t> rows(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    rows[i] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), t[i]) - distinct.begin());
  }
  const auto table = ad::Tensor::from({distinct.size(), width_}, sinusoidal_embedding(distinct, width_));

  ad::Tensor h = x;
  for (std::size_t l = 0; l + 1 < kLayers; ++l) {
    const ad::Tensor emb = ad::gather_rows(time_layers_[l](table), rows);
    h = layers_[l].apply(h, ad::Activation::kSoftplus, &emb);
  }
  return layers_.back().apply(h, ad::Activation::kIdentity);
}

ad::Tensor TimeEmbedMlp::forward(const ad::Tensor& x, int t) const {
  if (x.dim() != 2) throw ShapeError(name_ + ": input must be [B, d], got " + ad::to_string(x.shape()));
  const std::vector<int> ts(x.size(0), t);
  return forward(x, ts);
}

ad::Tensor TimeEmbedMlp::forward(const ad::Tensor& x) const {
  if (has_time()) throw ContractError(name_ + ": network requires a time index");
  ad::Tensor h = x;
  for (std::size_t l = 0; l + 1 < kLayers; ++l) h = layers_[l].apply(h, ad::Activation::kSoftplus);
  return layers_.back().apply(h, ad::Activation::kIdentity);
}

// ---- Critic / Navigator -------------------------------------------------

Critic::Critic(std::string name, std::uint64_t seed, std::size_t in_dim, std::size_t width) : width_(width) {
  Rng rng(seed);
  const std::size_t dims[5] = {in_dim, width, width, width, 1};
  for (std::size_t l = 0; l < 4; ++l) {
    layers_.push_back(Linear::init(dims[l], dims[l + 1], rng));
    layers_.back().register_params(params_, name + ".fc" + std::to_string(l + 1));
  }
}

Critic::Output Critic::forward(const ad::Tensor& x) const {
  if (x.dim() != 2) throw ShapeError("critic: input must be [B, d], got " + ad::to_string(x.shape()));
  ad::Tensor h = x;
  for (std::size_t l = 0; l < 3; ++l) h = layers_[l].apply(h, ad::Activation::kLeakyRelu);
  ad::Tensor out = layers_[3].apply(h, ad::Activation::kIdentity);
  return {ad::reshape(out, {x.size(0)}), h};
}

Navigator::Navigator(std::string name, std::uint64_t seed, std::size_t width)
    : net_(std::move(name), seed, 1, width) {}

ad::Tensor Navigator::scores(const ad::Tensor& distances) const {
  if (distances.dim() != 2) {
    throw ShapeError("navigator: distances must be [m, k], got " + ad::to_string(distances.shape()));
  }
  const std::size_t m = distances.size(0), k = distances.size(1);
  const ad::Tensor flat = ad::reshape(distances, {m * k, 1});
  return ad::reshape(net_.logits(flat), {m, k});
}

// ---- operations ---------------------------------------------------------

ad::Tensor denoise_eps(const TimeEmbedMlp& model, const ad::Tensor& x, int t) { return model.forward(x, t); }

ad::Tensor generate_prior_shared(const TimeEmbedMlp& model, const ad::Tensor& z, int t_trunc) {
  return model.forward(z, t_trunc + 1);
}

ad::Tensor generate_prior_separate(const TimeEmbedMlp& generator, const ad::Tensor& z) {
  return generator.forward(z);
}

ad::Tensor discriminate(const Critic& critic, const ad::Tensor& x) { return critic.logits(x); }

ad::Tensor critic_cost(const Critic& critic, const ad::Tensor& a, const ad::Tensor& b, bool normalize) {
  ad::Tensor fa = critic.features(a);
  ad::Tensor fb = critic.features(b);
  if (normalize) {
    fa = ad::normalize_rows(fa);
    fb = ad::normalize_rows(fb);
  }
  return ad::pairwise_sq_dist(fa, fb);
}

ad::Tensor navigator_assign(const Navigator& nav, const Critic& critic, const ad::Tensor& src,
                            const ad::Tensor& dst, bool normalize_features) {
  return ad::softmax_rows(nav.scores(critic_cost(critic, src, dst, normalize_features)));
}

}  // namespace tdpm
