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
#include <string>
#include <utility>
#include <vector>

#include "tdpm/tensor.hpp"

namespace tdpm {

// Ordered collection of named trainable tensors. Names follow
// "{model}.{layer}.{weight|bias}". Copies share storage with the original.
class ParamSet {
 public:
  void add(std::string name, ad::Tensor tensor);
  void append(const ParamSet& other);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  ad::Tensor& operator[](std::size_t i) { return entries_[i].second; }
  const ad::Tensor& operator[](std::size_t i) const { return entries_[i].second; }
  const ad::Tensor* find(const std::string& name) const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  void set_requires_grad(bool flag);
  std::size_t count() const;  // total scalar parameters

  // Deep copy of all values, detached from this set's storage.
  std::vector<std::vector<double>> snapshot() const;
  void load(const std::vector<std::vector<double>>& values);

 private:
  std::vector<std::pair<std::string, ad::Tensor>> entries_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t step = 0;

  static AdamState init(const ParamSet& params, const AdamConfig& config);
};

// Bias-corrected Adam on the gradients currently stored in the parameters.
// direction = -1 performs gradient ascent with the same moments.
void adam_step(ParamSet& params, AdamState& state, double direction = 1.0);

// Raw form used by adam_step; grads[i] must match params[i] in length.
void adam_step(std::vector<std::span<double>> params, std::vector<std::span<const double>> grads,
               AdamState& state, double direction = 1.0);

struct EmaState {
  double decay = 0.9999;
  std::vector<std::vector<double>> shadow;

  static EmaState init(const ParamSet& params, double decay);
};

// shadow <- decay * shadow + (1 - decay) * params
void ema_update(EmaState& ema, const ParamSet& params);

// Scales all gradients so that their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(ParamSet& params, double max_norm);

}  // namespace tdpm
