// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "grnet/config.hpp"
#include "grnet/nn.hpp"

namespace grnet {

/// Recoded multi-level features at strides 4/8/16/32 with the plan's
/// stage-2..5 widths.
struct MixerOutputs {
  Var x2p, x3p, x4p, x5p;
};

/// Recoding mixer: residual stages 2..5 (no stage 1) re-encode the balanced
/// features, with the level-2/3/4 inputs inserted step by step.
struct MixerNet {
  StagePlan plan;
  int64_t in_channels = 64;
  ConvUnit insert2;  // in->64
  ConvUnit insert3;  // in->w2
  ConvUnit insert4;  // in->w3
  std::vector<Bottleneck> stage2, stage3, stage4, stage5;

  MixerNet() = default;
  MixerNet(const Scope& s, const StagePlan& plan, int64_t in_channels, Rng& rng);

  MixerOutputs forward(const Var& b1, const Var& b2, const Var& b3, bool training) const;
};

}  // namespace grnet
