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

#include "tdpm/optim.hpp"

#include <algorithm>
#include <cmath>

#include "tdpm/errors.hpp"

namespace tdpm {

void ParamSet::add(std::string name, ad::Tensor tensor) {
  if (find(name)) throw ContractError("ParamSet: duplicate parameter name '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(tensor));
}

void ParamSet::append(const ParamSet& other) {
  for (const auto& [name, t] : other) add(name, t);
}

const ad::Tensor* ParamSet::find(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return &t;
  }
  return nullptr;
}

void ParamSet::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

void ParamSet::set_requires_grad(bool flag) {
  for (auto& [_, t] : entries_) t.set_requires_grad(flag);
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.numel();
  return n;
}

std::vector<std::vector<double>> ParamSet::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(entries_.size());
  for (const auto& [_, t] : entries_) out.emplace_back(t.data().begin(), t.data().end());
  return out;
}

void ParamSet::load(const std::vector<std::vector<double>>& values) {
  if (values.size() != entries_.size()) {
    throw ShapeError("ParamSet::load: " + std::to_string(values.size()) + " blocks for " +
                     std::to_string(entries_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto dst = entries_[i].second.mutable_data();
    if (values[i].size() != dst.size()) {
      throw ShapeError("ParamSet::load: size mismatch for '" + entries_[i].first + "'");
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

AdamState AdamState::init(const ParamSet& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  for (const auto& [_, t] : params) {
    s.m.emplace_back(t.numel(), 0.0);
    s.v.emplace_back(t.numel(), 0.0);
  }
  return s;
}

void adam_step(std::vector<std::span<double>> params, std::vector<std::span<const double>> grads,
               AdamState& state, double direction) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " + std::to_string(state.m.size()) +
                     " moment blocks");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != state.m[i].size() || params[i].size() != state.v[i].size() ||
        (!grads[i].empty() && grads[i].size() != params[i].size())) {
      throw ShapeError("adam_step: block " + std::to_string(i) + " has mismatched lengths");
    }
  }
  const AdamConfig& c = state.config;
  state.step += 1;
  const double k = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, k);
  const double bc2 = 1.0 - std::pow(c.beta2, k);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      // A parameter that never received a gradient sees g = 0.
      const double g = grads[i].empty() ? 0.0 : direction * grads[i][j];
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      params[i][j] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

void adam_step(ParamSet& params, AdamState& state, double direction) {
  std::vector<std::span<double>> values;
  std::vector<std::span<const double>> grads;
  for (auto& [_, t] : params) {
    values.push_back(t.mutable_data());
    grads.push_back(t.grad());
  }
  adam_step(std::move(values), std::move(grads), state, direction);
}

EmaState EmaState::init(const ParamSet& params, double decay) {
  if (!(decay > 0.0 && decay < 1.0)) throw ContractError("EmaState: decay must lie in (0, 1)");
  return EmaState{decay, params.snapshot()};
}

void ema_update(EmaState& ema, const ParamSet& params) {
  if (ema.shadow.size() != params.size()) {
    throw ShapeError("ema_update: shadow has " + std::to_string(ema.shadow.size()) +
                     " blocks, parameters have " + std::to_string(params.size()));
  }
  const double d = ema.decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto live = params[i].data();
    auto& sh = ema.shadow[i];
    if (sh.size() != live.size()) throw ShapeError("ema_update: size mismatch for '" + params.name(i) + "'");
    for (std::size_t j = 0; j < sh.size(); ++j) sh[j] = d * sh[j] + (1.0 - d) * live[j];
  }
}

double clip_grad_norm(ParamSet& params, double max_norm) {
  double sq = 0.0;
  for (auto& [_, t] : params) {
    for (double g : t.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& [_, t] : params) {
      if (t.grad().empty()) continue;
      for (double& g : t.mutable_grad()) g *= f;
    }
  }
  return norm;
}

}  // namespace tdpm
