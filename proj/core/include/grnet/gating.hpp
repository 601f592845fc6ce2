// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "grnet/config.hpp"
#include "grnet/nn.hpp"

namespace grnet {

/// Weight analysis module: one scalar gate in (0,1) per forward pass,
/// computed from the current-level features of both modalities plus the
/// semantic features of both encoders.
struct Wam {
  WamVariant variant = WamVariant::simple;
  ConvUnit squeeze;            // simple: 256->1 sigmoid; mlp: 256->64 sigmoid
  std::optional<Conv2d> fc1;   // mlp only, 1x1 64->16
  std::optional<Conv2d> fc2;   // mlp only, 1x1 16->1
  std::optional<double> forced_gate;  // test/ablation override

  Wam() = default;
  Wam(const Scope& s, WamVariant variant, Rng& rng);

  /// Returns an (n,1,1,1) gate. Semantic inputs are resized to the level size.
  Var forward(const Var& d, const Var& r, const Var& ds, const Var& rs, bool training) const;
};

struct MguOutputs {
  Var a, b;    // balanced features
  Var ga, gb;  // (n,1,1,1) gates
};

/// Modal-adaptive gate unit for one level: shared 64-channel sigmoid
/// projections per modality, two independently parameterized gates, and the
/// two cross-weighted sums A and B.
struct Mgu {
  ConvUnit sconv_d, sconv_r;
  std::optional<Wam> wam_a, wam_b;  // absent when gating is ablated
  bool concat_fusion = false;       // emit 128ch concat instead of the sum

  Mgu() = default;
  Mgu(const Scope& s, WamVariant variant, bool gating, bool concat_fusion, Rng& rng);

  MguOutputs forward(const Var& d_l, const Var& r_l, const Var& ds, const Var& rs,
                     bool training) const;

  int64_t out_channels() const { return concat_fusion ? 128 : 64; }
};

/// Encoder-side gate pair feeding the edge guidance stream.
struct EncoderWam {
  Wam wam_r, wam_d;

  EncoderWam() = default;
  EncoderWam(const Scope& s, WamVariant variant, Rng& rng);

  std::pair<Var, Var> forward(const Var& d2, const Var& r2, const Var& ds, const Var& rs,
                              bool training) const;  // (Gr, Gd)
};

/// Constant (n,1,1,1) gate used when a gate module is ablated away.
Var unit_gate(int64_t n, double value = 1.0);

}  // namespace grnet
