// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>

#include "grnet/backbone.hpp"
#include "grnet/config.hpp"
#include "grnet/decoder.hpp"
#include "grnet/gating.hpp"
#include "grnet/mixer.hpp"

namespace grnet {

/// Gate scalars of one sample (levels 2..4 plus the edge pair).
struct GateSample {
  std::array<double, 3> ga{}, gb{};
  double gr = 0.0, gd = 0.0;
};

struct ForwardOutputs {
  Var saliency_logits;  // (n,1,S,S)
  std::optional<Var> edge_logits;
  std::array<Var, 3> ga, gb;  // defined when the gated fusion units exist
  Var gr, gd;                 // defined when the edge gate pair exists
  bool has_mgu_gates = false;
  bool has_edge_gates = false;
  DecoderOutputs dec;

  /// Per-sample gate values; absent gates read as 0.
  std::vector<GateSample> gate_samples() const;
};

/// The full gated recoding network. Components are instantiated per the
/// ablation flags so disabled branches contribute no parameters.
class GrnetModel {
 public:
  explicit GrnetModel(const ModelConfig& cfg, uint64_t init_seed = 1234);
  GrnetModel(const GrnetModel&) = delete;
  GrnetModel& operator=(const GrnetModel&) = delete;

  /// rgb: (n,3,S,S); depth: (n,1,S,S), ignored (may be empty) when the model
  /// was built without the depth branch. S must equal config().input_size.
  ForwardOutputs forward(const Tensor& rgb, const Tensor& depth, bool training);

  const ModelConfig& config() const { return cfg_; }
  ParamRegistry& registry() { return reg_; }
  const ParamRegistry& registry() const { return reg_; }
  bool has_gating() const { return has_wams_; }

 private:
  ModelConfig cfg_;
  ParamRegistry reg_;
  bool has_wams_ = false;

  std::optional<StageEncoder> enc_r_, enc_d_;
  std::array<std::optional<ConvUnit>, 4> proj_r_, proj_d_;  // levels 2..5
  std::optional<SemanticMerge> sem_r_, sem_d_;
  std::optional<std::array<Mgu, 3>> mgus_;
  std::optional<EncoderWam> enc_wam_;
  std::optional<MixerNet> mixer_a_, mixer_b_;
  std::optional<Decoder> decoder_;
};

}  // namespace grnet
