// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <ostream>

#include "grnet/presets.hpp"
#include "grnet/trainer.hpp"

namespace grnet {

/// Everything needed to replay a run exactly.
struct RunManifest {
  std::string code_version = kVersion;
  ModelConfig model;
  TrainConfig train;
  SynthSpec synth;                       // dataset recipe
  std::optional<SynthSpec> eval_synth;   // unset: evaluate on the training set
  std::vector<std::string> rows;         // ablation rows to run
  std::optional<uint64_t> dataset_fingerprint;  // verified when present

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

/// FNV-1a over ids and raw plane contents, order-sensitive.
uint64_t dataset_fingerprint(const std::vector<SamplePair>& samples);

struct AblationRowResult {
  std::string row;
  bool ok = false;
  std::string error;
  MetricReport report;
};

struct AblationSuiteResult {
  std::vector<AblationRowResult> rows;
  uint64_t train_fingerprint = 0;

  /// One data line per requested row:
  /// row,status,mae,f_beta_max,f_beta_adaptive,f_w_beta
  std::string to_csv() const;
};

/// Trains and evaluates every requested row with the shared seed and data.
/// Row failures are recorded and the suite continues.
AblationSuiteResult run_ablation_suite(const RunManifest& manifest,
                                       std::ostream* progress = nullptr);

struct PredictResult {
  int64_t written = 0;
  std::vector<std::string> warnings;
};

/// Runs inference over <input_dir>/rgb (+ depth when the model uses it) and
/// writes one 8-bit map per readable pair into output_dir. Unreadable pairs
/// produce warnings; failing every pair is an error.
PredictResult predict_dir(const Checkpoint& ckpt, const std::filesystem::path& input_dir,
                          const std::filesystem::path& output_dir);

}  // namespace grnet
