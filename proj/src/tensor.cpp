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

#include "tdpm/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "tdpm/errors.hpp"

namespace tdpm::ad {

namespace detail {

// Aligned storage keeps Eigen's vectorized reductions on one summation order
// regardless of where the heap places a buffer.
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

struct Node {
  Shape shape;
  Buffer value;
  Buffer grad;
  bool requires_grad = false;
  bool leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Buffer& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

using detail::Node;
using detail::Buffer;
using NodePtr = std::shared_ptr<Node>;

namespace {

thread_local bool g_grad_enabled = true;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ArrMap = Eigen::Map<Eigen::ArrayXd>;

ArrMap arr(Buffer& v) {
  return ArrMap(v.data(), static_cast<Eigen::Index>(v.size()));
}
MatMap mat(Buffer& v, std::size_t rows, std::size_t cols) {
  return MatMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                   to_string(b));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const std::string& expected) {
  throw ShapeError(std::string(op) + ": shape " + to_string(a) + " is invalid, expected " +
                   expected);
}

const Node& node_of(const Tensor& t) {
  if (!t.node()) throw ContractError("operation on an empty tensor");
  return *t.node();
}

void require_matrix(const char* op, const Tensor& t) {
  if (node_of(t).shape.size() != 2) shape_error(op, t.shape(), "a 2-D matrix");
}

// Builds an op result. backward receives the result node (its grad filled)
// and must accumulate into the parents that require grad.
Tensor make_result(const char* op, Shape shape, Buffer value,
                   std::vector<NodePtr> parents, std::function<void(Node&)> backward) {
  if (!arr(value).allFinite()) {
    throw NumericError(std::string(op) + ": non-finite value in result of shape " +
                       to_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  node->leaf = false;
  bool tracked = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) tracked = tracked || p->requires_grad;
  }
  if (tracked) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

// Elementwise unary op with derivative expressed from input and output.
template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& a, Fwd fwd, Deriv deriv) {
  const NodePtr& pa = a.node();
  if (!pa) throw ContractError(std::string(op) + ": empty tensor");
  Buffer out(pa->value.size());
  arr(out) = fwd(arr(pa->value));
  return make_result(op, pa->shape, std::move(out), {pa}, [pa, deriv](Node& self) {
    auto& g = pa->grad_buffer();
    arr(g) += arr(self.grad) * deriv(arr(pa->value), arr(self.value));
  });
}

}  // namespace

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

// ---- Tensor -------------------------------------------------------------

Tensor::Tensor() = default;

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(ad::numel(shape), value);
  return from(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (data.size() != ad::numel(shape)) {
    throw ShapeError("Tensor::from: " + std::to_string(data.size()) +
                     " values do not fill shape " + ad::to_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value.assign(data.begin(), data.end());
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return node_of(*this).shape; }

std::size_t Tensor::size(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw ContractError("Tensor::size: axis out of range");
  return s[axis];
}

std::size_t Tensor::numel() const { return node_of(*this).value.size(); }

std::span<const double> Tensor::data() const { return node_of(*this).value; }

std::span<double> Tensor::mutable_data() {
  if (!node_of(*this).leaf) throw ContractError("mutable_data: tensor is not a leaf");
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item: tensor of shape " + to_string(shape()) + " is not a scalar");
  return node_->value[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  const auto& s = shape();
  if (s.size() != 2 || row >= s[0] || col >= s[1]) throw ContractError("Tensor::at: index out of range");
  return node_->value[row * s[1] + col];
}

bool Tensor::requires_grad() const { return node_of(*this).requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (!node_of(*this).leaf) throw ContractError("set_requires_grad: tensor is not a leaf");
  node_->requires_grad = flag;
}

bool Tensor::is_leaf() const { return node_of(*this).leaf; }

std::span<const double> Tensor::grad() const { return node_of(*this).grad; }

std::span<double> Tensor::mutable_grad() {
  return const_cast<Node&>(node_of(*this)).grad_buffer();
}

void Tensor::zero_grad() {
  auto& n = const_cast<Node&>(node_of(*this));
  std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  const Node& n = node_of(*this);
  return from(n.shape, std::vector<double>(n.value.begin(), n.value.end()), false);
}

void Tensor::backward() const {
  const Node& root_ref = node_of(*this);
  if (root_ref.value.size() != 1) {
    throw ContractError("backward: output must be a scalar, got shape " + to_string(root_ref.shape));
  }
  if (!root_ref.requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->leaf) n->grad.assign(n->value.size(), 0.0);
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->leaf && n->backward) n->backward(*n);
  }
}

// ---- grad mode ----------------------------------------------------------

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_mode_enabled() { return g_grad_enabled; }

// ---- primitives ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const NodePtr& pa = a.node();
  const NodePtr& pb = b.node();
  const std::size_t m = pa->shape[0], k = pa->shape[1], n = pb->shape[1];
  if (pb->shape[0] != k) shape_error("matmul", pa->shape, pb->shape);
  Buffer out(m * n);
  mat(out, m, n).noalias() = mat(pa->value, m, k) * mat(pb->value, k, n);
  return make_result("matmul", {m, n}, std::move(out), {pa, pb}, [pa, pb, m, k, n](Node& self) {
    auto g = mat(self.grad, m, n);
    if (pa->requires_grad) {
      mat(pa->grad_buffer(), m, k).noalias() += g * mat(pb->value, k, n).transpose();
    }
    if (pb->requires_grad) {
      mat(pb->grad_buffer(), k, n).noalias() += mat(pa->value, m, k).transpose() * g;
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const NodePtr& pa = a.node();
  const NodePtr& pb = b.node();
  if (!pa || !pb) throw ContractError("add: empty tensor");
  if (pa->shape == pb->shape) {
    Buffer out(pa->value.size());
    arr(out) = arr(pa->value) + arr(pb->value);
    return make_result("add", pa->shape, std::move(out), {pa, pb}, [pa, pb](Node& self) {
      if (pa->requires_grad) arr(pa->grad_buffer()) += arr(self.grad);
      if (pb->requires_grad) arr(pb->grad_buffer()) += arr(self.grad);
    });
  }
  // batch broadcast: [m, n] + [n] or [m, n] + [1, n]
  const bool row_vector = (pb->shape.size() == 1) || (pb->shape.size() == 2 && pb->shape[0] == 1);
  if (pa->shape.size() != 2 || !row_vector || pb->value.size() != pa->shape[1]) {
    shape_error("add", pa->shape, pb->shape);
  }
  const std::size_t m = pa->shape[0], n = pa->shape[1];
  Buffer out(m * n);
  mat(out, m, n) = mat(pa->value, m, n).rowwise() + mat(pb->value, 1, n).row(0);
  return make_result("add", pa->shape, std::move(out), {pa, pb}, [pa, pb, m, n](Node& self) {
    if (pa->requires_grad) arr(pa->grad_buffer()) += arr(self.grad);
    if (pb->requires_grad) {
      mat(pb->grad_buffer(), 1, n) += mat(self.grad, m, n).colwise().sum();
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const NodePtr& pa = a.node();
  const NodePtr& pb = b.node();
  if (!pa || !pb) throw ContractError("sub: empty tensor");
  if (pa->shape != pb->shape) shape_error("sub", pa->shape, pb->shape);
  Buffer out(pa->value.size());
  arr(out) = arr(pa->value) - arr(pb->value);
  return make_result("sub", pa->shape, std::move(out), {pa, pb}, [pa, pb](Node& self) {
    if (pa->requires_grad) arr(pa->grad_buffer()) += arr(self.grad);
    if (pb->requires_grad) arr(pb->grad_buffer()) -= arr(self.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const NodePtr& pa = a.node();
  const NodePtr& pb = b.node();
  if (!pa || !pb) throw ContractError("mul: empty tensor");
  if (pa->shape != pb->shape) shape_error("mul", pa->shape, pb->shape);
  Buffer out(pa->value.size());
  arr(out) = arr(pa->value) * arr(pb->value);
  return make_result("mul", pa->shape, std::move(out), {pa, pb}, [pa, pb](Node& self) {
    if (pa->requires_grad) arr(pa->grad_buffer()) += arr(self.grad) * arr(pb->value);
    if (pb->requires_grad) arr(pb->grad_buffer()) += arr(self.grad) * arr(pa->value);
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      "scale", a, [factor](const auto& x) { return x * factor; },
      [factor](const auto& x, const auto&) { return Eigen::ArrayXd::Constant(x.size(), factor); });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(
      "add_scalar", a, [value](const auto& x) { return x + value; },
      [](const auto& x, const auto&) { return Eigen::ArrayXd::Ones(x.size()); });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor square(const Tensor& a) {
  return unary(
      "square", a, [](const auto& x) { return x.square(); },
      [](const auto& x, const auto&) { return 2.0 * x; });
}

Tensor log(const Tensor& a) {
  return unary(
      "log", a, [](const auto& x) { return x.log(); },
      [](const auto& x, const auto&) { return x.inverse(); });
}

Tensor exp(const Tensor& a) {
  return unary(
      "exp", a, [](const auto& x) { return x.exp(); }, [](const auto&, const auto& y) { return y; });
}

namespace {
Eigen::ArrayXd stable_sigmoid(const Eigen::Ref<const Eigen::ArrayXd>& x) {
  const Eigen::ArrayXd e = (-x.abs()).exp();
  return (x >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
}
}  // namespace

Tensor sigmoid(const Tensor& a) {
  return unary(
      "sigmoid", a, [](const auto& x) { return stable_sigmoid(x); },
      [](const auto&, const auto& y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& a) {
  return unary(
      "softplus", a,
      [](const auto& x) -> Eigen::ArrayXd { return x.max(0.0) + (1.0 + (-x.abs()).exp()).log(); },
      [](const auto& x, const auto&) { return stable_sigmoid(x); });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary(
      "leaky_relu", a, [slope](const auto& x) -> Eigen::ArrayXd { return (x > 0.0).select(x, slope * x); },
      [slope](const auto& x, const auto&) -> Eigen::ArrayXd {
        return (x > 0.0).select(Eigen::ArrayXd::Ones(x.size()), Eigen::ArrayXd::Constant(x.size(), slope));
      });
}

Tensor sum(const Tensor& a) {
  const NodePtr& pa = a.node();
  if (!pa) throw ContractError("sum: empty tensor");
  const double s = arr(pa->value).sum();
  return make_result("sum", {}, {s}, {pa}, [pa](Node& self) {
    arr(pa->grad_buffer()) += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const NodePtr& pa = a.node();
  if (!pa) throw ContractError("mean: empty tensor");
  if (pa->value.empty()) throw ShapeError("mean: tensor of shape " + to_string(pa->shape) + " is empty");
  const double n = static_cast<double>(pa->value.size());
  const double s = arr(pa->value).sum() / n;
  return make_result("mean", {}, {s}, {pa}, [pa, n](Node& self) {
    arr(pa->grad_buffer()) += self.grad[0] / n;
  });
}

Tensor sum_rows(const Tensor& a) {
  require_matrix("sum_rows", a);
  const NodePtr& pa = a.node();
  const std::size_t m = pa->shape[0], n = pa->shape[1];
  Buffer out(m);
  mat(out, m, 1) = mat(pa->value, m, n).rowwise().sum();
  return make_result("sum_rows", {m}, std::move(out), {pa}, [pa, m, n](Node& self) {
    mat(pa->grad_buffer(), m, n).colwise() += mat(self.grad, m, 1).col(0);
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_matrix("concat_cols", a);
  require_matrix("concat_cols", b);
  const NodePtr& pa = a.node();
  const NodePtr& pb = b.node();
  const std::size_t m = pa->shape[0], p = pa->shape[1], q = pb->shape[1];
  if (pb->shape[0] != m) shape_error("concat_cols", pa->shape, pb->shape);
  Buffer out(m * (p + q));
  auto o = mat(out, m, p + q);
  o.leftCols(p) = mat(pa->value, m, p);
  o.rightCols(q) = mat(pb->value, m, q);
  return make_result("concat_cols", {m, p + q}, std::move(out), {pa, pb}, [pa, pb, m, p, q](Node& self) {
    auto g = mat(self.grad, m, p + q);
    if (pa->requires_grad) mat(pa->grad_buffer(), m, p) += g.leftCols(p);
    if (pb->requires_grad) mat(pb->grad_buffer(), m, q) += g.rightCols(q);
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  const NodePtr& pa = a.node();
  if (!pa) throw ContractError("reshape: empty tensor");
  if (numel(shape) != pa->value.size()) shape_error("reshape", pa->shape, shape);
  return make_result("reshape", std::move(shape), pa->value, {pa}, [pa](Node& self) {
    arr(pa->grad_buffer()) += arr(self.grad);
  });
}

Tensor transpose(const Tensor& a) {
  require_matrix("transpose", a);
  const NodePtr& pa = a.node();
  const std::size_t m = pa->shape[0], n = pa->shape[1];
  Buffer out(m * n);
  mat(out, n, m) = mat(pa->value, m, n).transpose();
  return make_result("transpose", {n, m}, std::move(out), {pa}, [pa, m, n](Node& self) {
    mat(pa->grad_buffer(), m, n) += mat(self.grad, n, m).transpose();
  });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> rows) {
  require_matrix("gather_rows", table);
  const NodePtr& pt = table.node();
  const std::size_t k = pt->shape[0], n = pt->shape[1], m = rows.size();
  for (std::size_t r : rows) {
    if (r >= k) {
      throw ShapeError("gather_rows: row index " + std::to_string(r) + " out of range for table " +
                       to_string(pt->shape));
    }
  }
  Buffer out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(pt->value.begin() + static_cast<std::ptrdiff_t>(rows[i] * n), n,
                out.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return make_result("gather_rows", {m, n}, std::move(out), {pt}, [pt, idx = std::move(idx), n](Node& self) {
    auto& g = pt->grad_buffer();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < n; ++j) g[idx[i] * n + j] += self.grad[i * n + j];
    }
  });
}

Tensor softmax_rows(const Tensor& a) {
  require_matrix("softmax_rows", a);
  const NodePtr& pa = a.node();
  const std::size_t m = pa->shape[0], n = pa->shape[1];
  if (n == 0) shape_error("softmax_rows", pa->shape, "at least one column");
  Buffer out(m * n);
  auto x = mat(pa->value, m, n);
  auto y = mat(out, m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double mx = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - mx).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return make_result("softmax_rows", {m, n}, std::move(out), {pa}, [pa, m, n](Node& self) {
    auto yv = mat(self.value, m, n);
    auto g = mat(self.grad, m, n);
    const Eigen::VectorXd dot = (g.array() * yv.array()).rowwise().sum();
    mat(pa->grad_buffer(), m, n).array() += yv.array() * (g.array().colwise() - dot.array());
  });
}

Tensor softmax_cols(const Tensor& a) { return transpose(softmax_rows(transpose(a))); }

Tensor pairwise_sq_dist(const Tensor& a, const Tensor& b) {
  require_matrix("pairwise_sq_dist", a);
  require_matrix("pairwise_sq_dist", b);
  const NodePtr& pa = a.node();
  const NodePtr& pb = b.node();
  const std::size_t m = pa->shape[0], d = pa->shape[1], k = pb->shape[0];
  if (pb->shape[1] != d) shape_error("pairwise_sq_dist", pa->shape, pb->shape);
  Buffer out(m * k);
  auto av = mat(pa->value, m, d);
  auto bv = mat(pb->value, k, d);
  // Direct differences so that identical rows give exactly zero.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out[i * k + j] = (av.row(static_cast<Eigen::Index>(i)) - bv.row(static_cast<Eigen::Index>(j))).squaredNorm();
    }
  }
  return make_result("pairwise_sq_dist", {m, k}, std::move(out), {pa, pb}, [pa, pb, m, d, k](Node& self) {
    auto g = mat(self.grad, m, k);
    auto av = mat(pa->value, m, d);
    auto bv = mat(pb->value, k, d);
    if (pa->requires_grad) {
      const Eigen::VectorXd rs = g.rowwise().sum();
      mat(pa->grad_buffer(), m, d) += 2.0 * (av.array().colwise() * rs.array()).matrix() - 2.0 * g * bv;
    }
    if (pb->requires_grad) {
      const Eigen::VectorXd cs = g.colwise().sum().transpose();
      mat(pb->grad_buffer(), k, d) += 2.0 * (bv.array().colwise() * cs.array()).matrix() - 2.0 * g.transpose() * av;
    }
  });
}

Tensor normalize_rows(const Tensor& a, double eps) {
  require_matrix("normalize_rows", a);
  const NodePtr& pa = a.node();
  const std::size_t m = pa->shape[0], n = pa->shape[1];
  auto x = mat(pa->value, m, n);
  Eigen::VectorXd norms = (x.rowwise().squaredNorm().array() + eps).sqrt();
  Buffer out(m * n);
  mat(out, m, n) = x.array().colwise() / norms.array();
  return make_result("normalize_rows", {m, n}, std::move(out), {pa},
                     [pa, m, n, norms = std::move(norms)](Node& self) {
                       auto y = mat(self.value, m, n);
                       auto g = mat(self.grad, m, n);
                       const Eigen::VectorXd dot = (g.array() * y.array()).rowwise().sum();
                       mat(pa->grad_buffer(), m, n).array() +=
                           (g.array() - y.array().colwise() * dot.array()).colwise() / norms.array();
                     });
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b, Activation act, double slope,
             const Tensor* addend) {
  require_matrix("dense", x);
  require_matrix("dense", w);
  const NodePtr& px = x.node();
  const NodePtr& pw = w.node();
  const NodePtr& pb = b.node();
  if (!pb) throw ContractError("dense: empty bias");
  const std::size_t m = px->shape[0], k = px->shape[1], n = pw->shape[1];
  if (pw->shape[0] != k) shape_error("dense", px->shape, pw->shape);
  if (pb->value.size() != n) shape_error("dense", pw->shape, pb->shape);
  NodePtr pe;
  if (addend) {
    pe = addend->node();
    if (!pe || pe->shape != Shape{m, n}) shape_error("dense", Shape{m, n}, addend->shape());
  }

  Buffer pre(m * n);
  auto P = mat(pre, m, n);
  P.noalias() = mat(px->value, m, k) * mat(pw->value, k, n);
  P.rowwise() += mat(pb->value, 1, n).row(0);
  if (pe) P += mat(pe->value, m, n);

  Buffer out(m * n);
  switch (act) {
    case Activation::kIdentity:
      out = pre;
      break;
    case Activation::kSoftplus:
      arr(out) = arr(pre).max(0.0) + (1.0 + (-arr(pre).abs()).exp()).log();
      break;
    case Activation::kLeakyRelu:
      arr(out) = (arr(pre) > 0.0).select(arr(pre), slope * arr(pre));
      break;
  }

  std::vector<NodePtr> parents{px, pw, pb};
  if (pe) parents.push_back(pe);
  return make_result(
      "dense", {m, n}, std::move(out), std::move(parents),
      [px, pw, pb, pe, m, k, n, act, slope, pre = std::move(pre)](Node& self) mutable {
        Buffer gp(self.grad);
        const auto p = arr(pre);
        switch (act) {
          case Activation::kIdentity:
            break;
          case Activation::kSoftplus:
            arr(gp) *= stable_sigmoid(p);
            break;
          case Activation::kLeakyRelu:
            arr(gp) *= (p > 0.0).select(Eigen::ArrayXd::Ones(p.size()), Eigen::ArrayXd::Constant(p.size(), slope));
            break;
        }
        auto G = mat(gp, m, n);
        if (pw->requires_grad) mat(pw->grad_buffer(), k, n).noalias() += mat(px->value, m, k).transpose() * G;
        if (pb->requires_grad) mat(pb->grad_buffer(), 1, n) += G.colwise().sum();
        if (px->requires_grad) mat(px->grad_buffer(), m, k).noalias() += G * mat(pw->value, k, n).transpose();
        if (pe && pe->requires_grad) arr(pe->grad_buffer()) += arr(gp);
      });
}

}  // namespace tdpm::ad
