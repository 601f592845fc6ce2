// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "grnet/config.hpp"
#include "grnet/nn.hpp"

namespace grnet {

/// Multi-level features at strides 2/4/8/16/32.
struct StageFeatures {
  Var s1, s2, s3, s4, s5;
};

/// Staged residual encoder. Stage 1 = 7x7/2 stem (+ optional extra blocks),
/// then 3x3/2 max pool, then four bottleneck stacks.
struct StageEncoder {
  StagePlan plan;
  ConvUnit stem;
  std::vector<Bottleneck> stage1_extra;
  std::vector<Bottleneck> stage2, stage3, stage4, stage5;

  StageEncoder() = default;
  StageEncoder(const Scope& s, const StagePlan& plan, Rng& rng);

  StageFeatures forward(const Var& image, bool training) const;
};

/// 3x3 projection of a backbone stage to the decoder's 64-channel width.
ConvUnit make_project64(const Scope& s, int64_t ci, Act act, Rng& rng);

/// Top-down merge of the two deepest stages into one semantic feature map
/// at stage-4 resolution.
struct SemanticMerge {
  ConvUnit conv;

  SemanticMerge() = default;
  SemanticMerge(const Scope& s, Rng& rng);
  Var forward(const Var& s4_64, const Var& s5_64, bool training) const;
};

/// Replicate a single-channel depth map to the encoder's 3-channel input.
Var depth_to_3ch(const Var& depth);

}  // namespace grnet
