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

// Dense float64 tensors with tape-free reverse-mode differentiation.
//
// A Tensor is a cheap handle onto a node. Ops on tracked inputs record their
// parents and a local backward rule; Tensor::backward() walks the resulting
// DAG in reverse topological order. Leaf gradients accumulate across calls
// until zero_grad(). Untracked tensors carry no graph and are immutable
// values once constructed.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tdpm::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const;
  std::size_t dim() const { return shape().size(); }
  std::size_t size(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Writable view for leaves (parameters, optimizer updates). Throws on
  // interior graph nodes.
  std::span<double> mutable_data();

  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool is_leaf() const;

  // Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Scalar outputs only. Accumulates d(this)/d(leaf) into each tracked leaf.
  void backward() const;

  // Same values, no graph, not tracked.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// ---- primitives ---------------------------------------------------------
// Shape conventions: matrices are [rows, cols]; "batch broadcast" means a
// [n] or [1, n] operand is repeated over the rows of an [m, n] operand.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);  // same shape or batch broadcast of b
Tensor sub(const Tensor& a, const Tensor& b);  // same shape
Tensor mul(const Tensor& a, const Tensor& b);  // same shape
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor neg(const Tensor& a);
Tensor square(const Tensor& a);
Tensor log(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.2);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum_rows(const Tensor& a);  // [m, n] -> [m]
Tensor concat_cols(const Tensor& a, const Tensor& b);  // [m, p] ++ [m, q] -> [m, p+q]
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a);
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> rows);
Tensor softmax_rows(const Tensor& a);
Tensor softmax_cols(const Tensor& a);
Tensor pairwise_sq_dist(const Tensor& a, const Tensor& b);  // [m, d], [k, d] -> [m, k]
Tensor normalize_rows(const Tensor& a, double eps = 1e-12);  // unit L2 norm per row

enum class Activation { kIdentity, kSoftplus, kLeakyRelu };

// Fused affine layer act(x W + b + addend): x [m, k], W [k, n], b [n],
// optional addend [m, n]. One graph node; same values as the composed ops.
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b, Activation act, double slope = 0.2,
             const Tensor* addend = nullptr);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double c, const Tensor& a) { return scale(a, c); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

// Scoped switch that turns off graph recording for every op on this thread.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

}  // namespace tdpm::ad
