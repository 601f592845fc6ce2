// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "grnet/common.hpp"

namespace grnet {

/// Staged-encoder layout: output channels and block counts for the five
/// stages. Stage 1 is the strided stem plus (blocks[0]-1) residual blocks;
/// stages 2..5 are bottleneck stacks ending at total strides 4/8/16/32.
struct StagePlan {
  std::array<int64_t, 5> stage_widths{8, 16, 32, 64, 128};
  std::array<int, 5> blocks_per_stage{1, 1, 1, 1, 1};
  int64_t input_channels = 3;

  /// Fast configuration for CI-scale experiments.
  static StagePlan desk() { return {}; }
  /// Minimal plan used by gradient checks.
  static StagePlan tiny() { return {{4, 8, 8, 16, 16}, {1, 1, 1, 1, 1}, 3}; }
  /// Full ResNet-50 widths and depths (valid but not trained here).
  static StagePlan resnet50() { return {{64, 256, 512, 1024, 2048}, {1, 3, 4, 6, 3}, 3}; }

  void validate() const {
    for (int i = 0; i < 5; ++i) {
      if (stage_widths[i] < 1) throw ConfigError("StagePlan: stage width must be >= 1");
      if (blocks_per_stage[i] < 1) throw ConfigError("StagePlan: blocks per stage must be >= 1");
    }
  }
  bool operator==(const StagePlan&) const = default;
};

enum class WamVariant { simple, mlp };
enum class DecoderMode { fpn, pf, full };
enum class LossMode { bce, structure };
enum class DepthMode { faithful, flat, noise };
enum class RgbMode { clean, cluttered };

/// Component switches mirroring the ablation table rows.
struct AblationFlags {
  bool use_depth = true;
  bool use_mixer = true;
  bool mgu_gating = true;   // off: MGU gates pinned to 1
  DecoderMode decoder_mode = DecoderMode::full;
  bool oegs_gating = true;  // off: Gr = Gd = 1
  WamVariant wam_variant = WamVariant::simple;
  LossMode loss_mode = LossMode::structure;
  bool augmentation = false;

  void validate() const {
    if (use_mixer && !use_depth) throw ConfigError("AblationFlags: mixer requires depth input");
    if (mgu_gating && !use_mixer) throw ConfigError("AblationFlags: MGU gating requires the mixer");
    if (decoder_mode == DecoderMode::full && !use_mixer)
      throw ConfigError("AblationFlags: full decoder requires the mixer");
    if (decoder_mode == DecoderMode::full && !use_depth)
      throw ConfigError("AblationFlags: edge guidance requires depth input");
  }
  bool operator==(const AblationFlags&) const = default;
};

struct ModelConfig {
  StagePlan plan = StagePlan::desk();
  int64_t input_size = 352;
  AblationFlags flags;
  bool mgu_concat_fusion = false;  // two-way concat reading of the fusion sum
  bool edge_head = false;          // emit edge logits for edge supervision

  void validate() const {
    plan.validate();
    flags.validate();
    if (input_size < 32 || input_size % 32 != 0)
      throw ConfigError("ModelConfig: input_size must be a positive multiple of 32, got " +
                        std::to_string(input_size));
    if (edge_head && flags.decoder_mode != DecoderMode::full)
      throw ConfigError("ModelConfig: edge supervision requires the edge guidance stream");
  }
  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  int max_epochs = 30;
  int64_t max_steps = 0;  // 0: fully governed by max_epochs
  int batch_size = 16;
  double lr_backbone_max = 5e-3;
  double lr_other_max = 5e-2;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  double warmup_fraction = 0.1;
  uint64_t seed = 0;
  bool edge_loss = false;
  int64_t crop_size = 0;  // augmentation crop; 0 picks 7/8 of the input size
  int64_t snapshot_every = 0;  // 0: final checkpoint only

  /// Full-scale profile matching the reference training recipe.
  static TrainConfig reference() { return {}; }
  /// CI-scale profile.
  static TrainConfig desk() {
    TrainConfig c;
    c.batch_size = 4;
    c.max_epochs = 1 << 20;  // step-bounded
    c.max_steps = 500;
    return c;
  }

  void validate() const {
    if (max_epochs < 1) throw ConfigError("TrainConfig: max_epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0))
      throw ConfigError("TrainConfig: warmup_fraction must lie in (0,1)");
    if (max_steps < 0) throw ConfigError("TrainConfig: max_steps must be >= 0");
  }
  bool operator==(const TrainConfig&) const = default;
};

/// Synthetic RGB-D sample generation recipe.
struct SynthSpec {
  int64_t n_samples = 8;
  int64_t image_size = 64;
  DepthMode depth_mode = DepthMode::faithful;
  RgbMode rgb_mode = RgbMode::clean;
  uint64_t seed = 0;

  void validate() const {
    if (n_samples < 1) throw ConfigError("SynthSpec: n_samples must be >= 1");
    if (image_size < 32 || image_size % 32 != 0)
      throw ConfigError("SynthSpec: image_size must be a positive multiple of 32, got " +
                        std::to_string(image_size));
  }
  bool operator==(const SynthSpec&) const = default;
};

const char* to_string(WamVariant v);
const char* to_string(DecoderMode m);
const char* to_string(LossMode m);
const char* to_string(DepthMode m);
const char* to_string(RgbMode m);
WamVariant wam_variant_from_string(const std::string& s);
DecoderMode decoder_mode_from_string(const std::string& s);
LossMode loss_mode_from_string(const std::string& s);
DepthMode depth_mode_from_string(const std::string& s);
RgbMode rgb_mode_from_string(const std::string& s);

}  // namespace grnet
