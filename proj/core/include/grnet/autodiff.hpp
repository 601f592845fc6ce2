// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "grnet/tensor.hpp"

namespace grnet {

// Reverse-mode automatic differentiation over Tensor values. A forward pass
// builds a DAG of Node objects; backward(root) runs the tape in reverse
// topological order. Graphs are rebuilt every forward (define-by-run), while
// parameter leaves persist across passes and accumulate gradients until
// zero_grad().

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  bool grad_ready = false;  // grad allocated and zeroed
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& ensure_grad() {
    if (!grad_ready) {
      grad = Tensor::zeros_like(value);
      grad_ready = true;
    }
    return grad;
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(Tensor v, bool requires_grad = false)
      : n_(std::make_shared<Node>()) {
    n_->value = std::move(v);
    n_->requires_grad = requires_grad;
  }
  explicit Var(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  bool defined() const { return static_cast<bool>(n_); }
  const Tensor& value() const { return n_->value; }
  Tensor& value() { return n_->value; }
  Tensor& grad() { return n_->ensure_grad(); }
  bool requires_grad() const { return n_->requires_grad; }
  const std::shared_ptr<Node>& node() const { return n_; }

  void zero_grad() { n_->grad_ready = false; }

 private:
  std::shared_ptr<Node> n_;
};

/// Run reverse-mode accumulation from `root`, seeding with ones.
void backward(const Var& root);

// --- point-wise scalar kernels shared with loss/metric code ---

inline double sigmoid_s(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(x)), overflow-safe.
inline double softplus_s(double x) {
  return std::log1p(std::exp(-std::abs(x))) + (x > 0.0 ? x : 0.0);
}

// --- graph operations ---

Var add(const Var& a, const Var& b);  // numpy-style broadcasting (dim == or 1)
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var scale(const Var& a, double k);
Var add_const(const Var& a, double k);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);

/// 2-D convolution, same-padding convention chosen by caller.
/// x:(N,Ci,H,W) w:(Co,Ci,kh,kw) b:(1,Co,1,1).
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);

/// Per-channel batch normalization. `running_*` live outside the graph and
/// are updated only when `training` is true.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta,
               Tensor& running_mean, Tensor& running_var, bool training,
               double momentum = 0.1, double eps = 1e-5);

/// 3x3 stride-2 max pool with padding 1 (staged-encoder stem pool).
Var max_pool3x3s2(const Var& x);

/// Bilinear resize with half-pixel centers; gradients flow to the source.
Var resize_bilinear(const Var& x, int64_t oh, int64_t ow);

/// Mean over the spatial extent, one value per (n, c).
Var global_avg_pool(const Var& x);

Var concat_channels(const std::vector<Var>& xs);

Var sum_all(const Var& x);         // -> (1,1,1,1)
Var sum_per_sample(const Var& x);  // -> (n,1,1,1)

}  // namespace grnet
