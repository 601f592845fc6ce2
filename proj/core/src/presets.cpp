// SPDX-License-Identifier: Apache-2.0
#include "grnet/presets.hpp"

namespace grnet {

namespace {

AblationFlags make(bool depth, bool mixer, bool gating, DecoderMode mode, bool oegs,
                   WamVariant wam, LossMode loss) {
  AblationFlags f;
  f.use_depth = depth;
  f.use_mixer = mixer;
  f.mgu_gating = gating;
  f.decoder_mode = mode;
  f.oegs_gating = oegs;
  f.wam_variant = wam;
  f.loss_mode = loss;
  f.augmentation = false;
  f.validate();
  return f;
}

struct Entry {
  const char* name;
  AblationFlags flags;
};

const std::vector<Entry>& table() {
  using enum DecoderMode;
  const auto s = WamVariant::simple;
  const auto m = WamVariant::mlp;
  const auto bce = LossMode::bce;
  const auto str = LossMode::structure;
  static const std::vector<Entry> rows = {
      {"w/o_depth", make(false, false, false, fpn, false, s, bce)},
      {"en_fpn", make(true, false, false, fpn, false, s, bce)},
      {"en_mix_minus_fpn", make(true, true, false, fpn, false, s, bce)},
      {"en_mix_fpn", make(true, true, true, fpn, false, s, bce)},
      {"en_mix_pf", make(true, true, true, pf, false, s, bce)},
      {"en_mix_de_minus", make(true, true, true, full, false, s, bce)},
      {"en_mix_de", make(true, true, true, full, true, s, bce)},
      {"structure_loss", make(true, true, true, full, true, s, str)},
      {"grnet_mlp", make(true, true, true, full, true, m, str)},
  };
  return rows;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& e : table()) out.emplace_back(e.name);
  return out;
}

AblationFlags preset(const std::string& name) {
  for (const auto& e : table())
    if (name == e.name) return e.flags;
  std::string valid;
  for (const auto& e : table()) valid += std::string(valid.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown preset '" + name + "' (valid: " + valid + ")");
}

}  // namespace grnet
