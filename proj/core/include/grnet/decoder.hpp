// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>

#include "grnet/config.hpp"
#include "grnet/nn.hpp"

namespace grnet {

/// Per-level channel widths of the decoder's four inputs (levels 2..5).
using LevelChannels = std::array<int64_t, 4>;

struct DecoderOutputs {
  Var saliency_logits;           // (n,1,S,S) at input resolution
  std::optional<Var> edge_logits;
  // Inspection handles.
  std::array<Var, 4> c;          // C2..C5
  Var f2, f1;
  Var p;                         // parallel branch output (pf/full)
  Var edge_feat;                 // OEGS output (full)
};

/// Level-wise fusion producing a 64-channel C feature. Dual-input form
/// projects both sides to 64 channels and merges the concatenation; the
/// single-input form (depth ablated) only projects and merges.
struct FuseLevel {
  std::optional<ConvUnit> proj_a, proj_b;
  ConvUnit merge;

  FuseLevel() = default;
  FuseLevel(const Scope& s, int64_t ca, std::optional<int64_t> cb, Rng& rng);

  Var forward(const Var& xa, const std::optional<Var>& xb, bool training) const;
};

/// Edge guidance stream: low-level encoder features of both modalities,
/// semantically suppressed and modally gated.
struct Oegs {
  ConvUnit ed_conv, er_conv;  // 128 -> 64 over cat(up(s2), s1)
  Conv2d suppress;            // 64 -> 1 mask projection of the semantic guide

  Oegs() = default;
  Oegs(const Scope& s, int64_t s1_ch, int64_t s2_ch, Rng& rng);

  Var forward(const Var& s1_d, const Var& s2_d, const Var& s1_r, const Var& s2_r, const Var& f1,
              const Var& gr, const Var& gd, bool training) const;
};

/// Hybrid decoder: progressive (FPN) branch always present; parallel branch
/// in pf/full modes; OEGS in full mode.
struct Decoder {
  DecoderMode mode = DecoderMode::full;
  std::array<FuseLevel, 4> fuse;           // levels 2..5
  std::array<ConvUnit, 4> lateral;         // progressive convs, level 2..5
  ConvUnit guide;                          // F2 -> F1 conv
  std::optional<std::array<ConvUnit, 4>> parallel;  // per-level convs
  std::optional<ConvUnit> p2_edge;         // cat(path2, edge_feat) -> 64
  std::optional<ConvUnit> p_merge;         // summed paths -> 64
  std::optional<Oegs> oegs;
  Conv2d head;                             // logit projection
  std::optional<Conv2d> edge_head;

  Decoder() = default;
  Decoder(const Scope& s, DecoderMode mode, const LevelChannels& in_ch,
          std::optional<LevelChannels> in_ch_b, bool with_oegs, int64_t s1_ch, int64_t s2_ch,
          bool with_edge_head, Rng& rng);

  struct EdgeInputs {
    Var s1_d, s2_d, s1_r, s2_r, gr, gd;
  };

  DecoderOutputs forward(const std::array<Var, 4>& xa, const std::optional<std::array<Var, 4>>& xb,
                         const std::optional<EdgeInputs>& edges, int64_t out_size,
                         bool training) const;
};

}  // namespace grnet
