// SPDX-License-Identifier: Apache-2.0
#include "grnet/backbone.hpp"

namespace grnet {

namespace {

std::vector<Bottleneck> make_stage(const Scope& s, int64_t ci, int64_t co, int first_stride,
                                   int blocks, Rng& rng) {
  std::vector<Bottleneck> out;
  out.reserve(blocks);
  for (int i = 0; i < blocks; ++i) {
    Scope bs = s.sub("block" + std::to_string(i));
    out.emplace_back(bs, i == 0 ? ci : co, co, i == 0 ? first_stride : 1, rng);
  }
  return out;
}

Var run_stage(const std::vector<Bottleneck>& stage, Var x, bool training) {
  for (const auto& b : stage) x = b.forward(x, training);
  return x;
}

}  // namespace

StageEncoder::StageEncoder(const Scope& s, const StagePlan& p, Rng& rng) : plan(p) {
  plan.validate();
  const auto& w = plan.stage_widths;
  stem = ConvUnit(s.sub("stem"), plan.input_channels, w[0], 7, 2, true, Act::relu, rng);
  stage1_extra = make_stage(s.sub("stage1"), w[0], w[0], 1, plan.blocks_per_stage[0] - 1, rng);
  stage2 = make_stage(s.sub("stage2"), w[0], w[1], 1, plan.blocks_per_stage[1], rng);
  stage3 = make_stage(s.sub("stage3"), w[1], w[2], 2, plan.blocks_per_stage[2], rng);
  stage4 = make_stage(s.sub("stage4"), w[2], w[3], 2, plan.blocks_per_stage[3], rng);
  stage5 = make_stage(s.sub("stage5"), w[3], w[4], 2, plan.blocks_per_stage[4], rng);
}

StageFeatures StageEncoder::forward(const Var& image, bool training) const {
  const Tensor& t = image.value();
  if (t.c() != plan.input_channels)
    throw ShapeError("encoder expects " + std::to_string(plan.input_channels) + " channels, got " +
                     t.shape_str());
  if (t.h() != t.w() || t.h() < 32 || t.h() % 32 != 0)
    throw ShapeError("encoder input must be square with side a multiple of 32, got " +
                     t.shape_str());

  StageFeatures f;
  f.s1 = run_stage(stage1_extra, stem.forward(image, training), training);
  Var pooled = max_pool3x3s2(f.s1);
  f.s2 = run_stage(stage2, pooled, training);
  f.s3 = run_stage(stage3, f.s2, training);
  f.s4 = run_stage(stage4, f.s3, training);
  f.s5 = run_stage(stage5, f.s4, training);
  return f;
}

ConvUnit make_project64(const Scope& s, int64_t ci, Act act, Rng& rng) {
  return ConvUnit(s, ci, 64, 3, 1, /*with_bn=*/false, act, rng);
}

SemanticMerge::SemanticMerge(const Scope& s, Rng& rng) {
  conv = ConvUnit(s.sub("conv"), 64, 64, 3, 1, /*with_bn=*/false, Act::relu, rng);
}

Var SemanticMerge::forward(const Var& s4_64, const Var& s5_64, bool training) const {
  const Tensor& a = s4_64.value();
  const Tensor& b = s5_64.value();
  if (b.h() * 2 != a.h() || b.w() * 2 != a.w())
    throw ShapeError("semantic merge expects the deeper feature at half resolution, got " +
                     a.shape_str() + " vs " + b.shape_str());
  return conv.forward(add(s4_64, resize_bilinear(s5_64, a.h(), a.w())), training);
}

Var depth_to_3ch(const Var& depth) {
  if (depth.value().c() != 1) throw ShapeError("depth input must have 1 channel");
  return concat_channels({depth, depth, depth});
}

}  // namespace grnet
