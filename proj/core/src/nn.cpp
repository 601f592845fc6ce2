// SPDX-License-Identifier: Apache-2.0
#include "grnet/nn.hpp"

namespace grnet {

Tensor he_normal(int64_t co, int64_t ci, int kh, int kw, Rng& rng) {
  Tensor t(co, ci, kh, kw);
  const double stddev = std::sqrt(2.0 / static_cast<double>(ci * kh * kw));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0, stddev);
  return t;
}

Conv2d::Conv2d(const Scope& s, int64_t ci, int64_t co, int k, int stride_, Rng& rng)
    : stride(stride_), pad(k / 2) {
  w = s.param("w", he_normal(co, ci, k, k, rng));
  b = s.param("b", Tensor(1, co, 1, 1));
}

BatchNorm2d::BatchNorm2d(const Scope& s, int64_t c) {
  gamma = s.param("gamma", Tensor::full(1, c, 1, 1, 1.0));
  beta = s.param("beta", Tensor(1, c, 1, 1));
  running_mean = s.buffer("running_mean", Tensor(1, c, 1, 1));
  running_var = s.buffer("running_var", Tensor::full(1, c, 1, 1, 1.0));
}

ConvUnit::ConvUnit(const Scope& s, int64_t ci, int64_t co, int k, int stride, bool with_bn,
                   Act act_, Rng& rng)
    : conv(s.sub("conv"), ci, co, k, stride, rng), act(act_) {
  if (with_bn) bn.emplace(s.sub("bn"), co);
}

Var ConvUnit::forward(const Var& x, bool training) const {
  Var y = conv.forward(x);
  if (bn) y = bn->forward(y, training);
  switch (act) {
    case Act::relu:
      return relu(y);
    case Act::sigmoid:
      return sigmoid(y);
    case Act::none:
      return y;
  }
  return y;
}

Bottleneck::Bottleneck(const Scope& s, int64_t ci, int64_t co, int stride, Rng& rng) {
  const int64_t mid = std::max<int64_t>(1, co / 4);
  reduce = ConvUnit(s.sub("reduce"), ci, mid, 1, 1, true, Act::relu, rng);
  spatial = ConvUnit(s.sub("spatial"), mid, mid, 3, stride, true, Act::relu, rng);
  expand = ConvUnit(s.sub("expand"), mid, co, 1, 1, true, Act::none, rng);
  if (stride != 1 || ci != co)
    shortcut.emplace(s.sub("shortcut"), ci, co, 1, stride, true, Act::none, rng);
}

Var Bottleneck::forward(const Var& x, bool training) const {
  Var y = expand.forward(spatial.forward(reduce.forward(x, training), training), training);
  Var sc = shortcut ? shortcut->forward(x, training) : x;
  return relu(add(y, sc));
}

}  // namespace grnet
