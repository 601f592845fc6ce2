// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grnet/autodiff.hpp"
#include "grnet/rng.hpp"

namespace grnet {

/// Optimizer grouping from the training schedule: staged encoder/mixer
/// trunks train at the lower rate, everything else at the higher one.
enum class ParamGroup { backbone, other };

struct ParamEntry {
  std::string name;
  ParamGroup group;
  Var var;
};

/// Non-trainable state that still belongs in checkpoints (BN running stats).
struct BufferEntry {
  std::string name;
  std::shared_ptr<Tensor> tensor;
};

class ParamRegistry {
 public:
  Var create(const std::string& name, ParamGroup group, Tensor init) {
    Var v(std::move(init), /*requires_grad=*/true);
    params_.push_back({name, group, v});
    return v;
  }
  std::shared_ptr<Tensor> create_buffer(const std::string& name, Tensor init) {
    auto t = std::make_shared<Tensor>(std::move(init));
    buffers_.push_back({name, t});
    return t;
  }

  std::vector<ParamEntry>& params() { return params_; }
  const std::vector<ParamEntry>& params() const { return params_; }
  const std::vector<BufferEntry>& buffers() const { return buffers_; }

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.var.value().size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.var.zero_grad();
  }

 private:
  std::vector<ParamEntry> params_;
  std::vector<BufferEntry> buffers_;
};

/// Name-prefix + group context threaded through module constructors.
struct Scope {
  ParamRegistry* reg;
  std::string prefix;
  ParamGroup group;

  Scope sub(const std::string& name) const { return {reg, prefix + name + ".", group}; }
  Scope sub(const std::string& name, ParamGroup g) const { return {reg, prefix + name + ".", g}; }
  Var param(const std::string& name, Tensor init) const {
    return reg->create(prefix + name, group, std::move(init));
  }
  std::shared_ptr<Tensor> buffer(const std::string& name, Tensor init) const {
    return reg->create_buffer(prefix + name, std::move(init));
  }
};

/// Fan-in scaled normal initialization for convolution kernels.
Tensor he_normal(int64_t co, int64_t ci, int kh, int kw, Rng& rng);

enum class Act { none, relu, sigmoid };

struct Conv2d {
  Var w, b;
  int stride = 1, pad = 0;

  Conv2d() = default;
  Conv2d(const Scope& s, int64_t ci, int64_t co, int k, int stride, Rng& rng);
  Var forward(const Var& x) const { return conv2d(x, w, b, stride, pad); }
};

struct BatchNorm2d {
  Var gamma, beta;
  std::shared_ptr<Tensor> running_mean, running_var;

  BatchNorm2d() = default;
  BatchNorm2d(const Scope& s, int64_t c);
  Var forward(const Var& x, bool training) const {
    return batch_norm(x, gamma, beta, *running_mean, *running_var, training);
  }
};

/// Convolution followed by optional batch norm and an activation.
struct ConvUnit {
  Conv2d conv;
  std::optional<BatchNorm2d> bn;
  Act act = Act::none;

  ConvUnit() = default;
  ConvUnit(const Scope& s, int64_t ci, int64_t co, int k, int stride, bool with_bn, Act act,
           Rng& rng);
  Var forward(const Var& x, bool training) const;
};

/// ResNet-style bottleneck: 1x1 reduce, 3x3 (optionally strided), 1x1 expand,
/// projection shortcut when shape changes.
struct Bottleneck {
  ConvUnit reduce, spatial, expand;
  std::optional<ConvUnit> shortcut;

  Bottleneck() = default;
  Bottleneck(const Scope& s, int64_t ci, int64_t co, int stride, Rng& rng);
  Var forward(const Var& x, bool training) const;
};

}  // namespace grnet
