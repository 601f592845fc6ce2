// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "grnet/config.hpp"
#include "grnet/model.hpp"
#include "grnet/tensor.hpp"

namespace grnet {

/// Serialized training artifact: model/train configuration plus a flat
/// name -> tensor map holding every parameter and every BN running buffer.
/// On-disk container is versioned and little-endian (see checkpoint.cpp).
struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  uint64_t seed = 0;
  int64_t step = 0;
  std::map<std::string, Tensor> tensors;

  static Checkpoint from_model(const GrnetModel& m, const TrainConfig& train, int64_t step);

  /// Copies tensors into an existing model; every model parameter/buffer must
  /// be present with matching shape, and the configs must match.
  void apply_to(GrnetModel& m) const;

  /// Builds a fresh model from the stored config and loads the weights.
  std::unique_ptr<GrnetModel> instantiate() const;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

/// JSON round-trip helpers shared with the CLI and the run manifest.
std::string model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const std::string& json);
std::string train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const std::string& json);

}  // namespace grnet
