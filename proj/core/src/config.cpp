// SPDX-License-Identifier: Apache-2.0
#include "grnet/config.hpp"

namespace grnet {

const char* to_string(WamVariant v) { return v == WamVariant::simple ? "simple" : "mlp"; }

const char* to_string(DecoderMode m) {
  switch (m) {
    case DecoderMode::fpn: return "fpn";
    case DecoderMode::pf: return "pf";
    default: return "full";
  }
}

const char* to_string(LossMode m) { return m == LossMode::bce ? "bce" : "structure"; }

const char* to_string(DepthMode m) {
  switch (m) {
    case DepthMode::faithful: return "faithful";
    case DepthMode::flat: return "flat";
    default: return "noise";
  }
}

const char* to_string(RgbMode m) { return m == RgbMode::clean ? "clean" : "cluttered"; }

WamVariant wam_variant_from_string(const std::string& s) {
  if (s == "simple") return WamVariant::simple;
  if (s == "mlp") return WamVariant::mlp;
  throw ConfigError("unknown attention variant: " + s);
}

DecoderMode decoder_mode_from_string(const std::string& s) {
  if (s == "fpn") return DecoderMode::fpn;
  if (s == "pf") return DecoderMode::pf;
  if (s == "full") return DecoderMode::full;
  throw ConfigError("unknown decoder mode: " + s);
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "bce") return LossMode::bce;
  if (s == "structure") return LossMode::structure;
  throw ConfigError("unknown loss mode: " + s);
}

DepthMode depth_mode_from_string(const std::string& s) {
  if (s == "faithful") return DepthMode::faithful;
  if (s == "flat") return DepthMode::flat;
  if (s == "noise") return DepthMode::noise;
  throw ConfigError("unknown depth mode: " + s);
}

RgbMode rgb_mode_from_string(const std::string& s) {
  if (s == "clean") return RgbMode::clean;
  if (s == "cluttered") return RgbMode::cluttered;
  throw ConfigError("unknown rgb mode: " + s);
}

}  // namespace grnet
