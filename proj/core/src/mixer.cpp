// SPDX-License-Identifier: Apache-2.0
#include "grnet/mixer.hpp"

namespace grnet {

namespace {

std::vector<Bottleneck> make_stage(const Scope& s, int64_t ci, int64_t co, int first_stride,
                                   int blocks, Rng& rng) {
  std::vector<Bottleneck> out;
  out.reserve(blocks);
  for (int i = 0; i < blocks; ++i)
    out.emplace_back(s.sub("block" + std::to_string(i)), i == 0 ? ci : co, co,
                     i == 0 ? first_stride : 1, rng);
  return out;
}

Var run_stage(const std::vector<Bottleneck>& stage, Var x, bool training) {
  for (const auto& b : stage) x = b.forward(x, training);
  return x;
}

}  // namespace

MixerNet::MixerNet(const Scope& s, const StagePlan& p, int64_t in_ch, Rng& rng)
    : plan(p), in_channels(in_ch) {
  plan.validate();
  const auto& w = plan.stage_widths;
  // Insertion convs are projections and train with the non-backbone group.
  insert2 = ConvUnit(s.sub("insert2", ParamGroup::other), in_ch, 64, 3, 1, false, Act::relu, rng);
  insert3 = ConvUnit(s.sub("insert3", ParamGroup::other), in_ch, w[1], 3, 1, false, Act::relu, rng);
  insert4 = ConvUnit(s.sub("insert4", ParamGroup::other), in_ch, w[2], 3, 1, false, Act::relu, rng);
  stage2 = make_stage(s.sub("stage2"), 64, w[1], 1, plan.blocks_per_stage[1], rng);
  stage3 = make_stage(s.sub("stage3"), w[1], w[2], 2, plan.blocks_per_stage[2], rng);
  stage4 = make_stage(s.sub("stage4"), w[2], w[3], 2, plan.blocks_per_stage[3], rng);
  stage5 = make_stage(s.sub("stage5"), w[3], w[4], 2, plan.blocks_per_stage[4], rng);
}

MixerOutputs MixerNet::forward(const Var& b1, const Var& b2, const Var& b3, bool training) const {
  const Tensor& t1 = b1.value();
  const Tensor& t2 = b2.value();
  const Tensor& t3 = b3.value();
  if (t2.h() * 2 != t1.h() || t3.h() * 4 != t1.h() || t2.w() * 2 != t1.w() ||
      t3.w() * 4 != t1.w())
    throw ShapeError("mixer inputs must arrive at strides 4/8/16, got " + t1.shape_str() + " " +
                     t2.shape_str() + " " + t3.shape_str());

  MixerOutputs out;
  out.x2p = run_stage(stage2, insert2.forward(b1, training), training);
  Var u2 = insert3.forward(resize_bilinear(b2, t1.h(), t1.w()), training);
  out.x3p = run_stage(stage3, add(u2, out.x2p), training);
  const Tensor& x3 = out.x3p.value();
  Var u3 = insert4.forward(resize_bilinear(b3, x3.h(), x3.w()), training);
  out.x4p = run_stage(stage4, add(u3, out.x3p), training);
  out.x5p = run_stage(stage5, out.x4p, training);
  return out;
}

}  // namespace grnet
