// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <ostream>

#include "grnet/checkpoint.hpp"
#include "grnet/datamodel.hpp"
#include "grnet/metrics.hpp"
#include "grnet/model.hpp"
#include "grnet/objective.hpp"

namespace grnet {

/// Warm-up + linear decay schedule. Piecewise linear, 0 at both ends, exactly
/// lr_max at step floor(warmup_fraction * total).
double lr_at(int64_t step, int64_t total_steps, double lr_max, double warmup_fraction);

struct StepLog {
  int64_t step = 0;
  double lr_backbone = 0.0, lr_other = 0.0;
  LossReport loss;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<StepLog> steps;
  int64_t total_steps = 0;

  double first_loss() const { return steps.empty() ? 0.0 : steps.front().loss.total; }
  double final_loss() const { return steps.empty() ? 0.0 : steps.back().loss.total; }
  /// "step,lr_backbone,lr_other,bce,iou,total" rows.
  std::string loss_csv() const;
};

struct TrainOptions {
  /// Polled every `stop_check_every` steps; returning true ends training.
  std::function<bool(int64_t step, GrnetModel& model)> stop_check;
  int64_t stop_check_every = 0;
  /// Optional warm start: weights and BN buffers are copied in before the
  /// first step (model config must match). Optimizer state, schedule, and
  /// step count start fresh.
  const Checkpoint* init_from = nullptr;
  /// Receives the last finite state right before a DivergenceError is thrown.
  Checkpoint* rescue = nullptr;
  std::ostream* progress = nullptr;
};

/// Seeded, shuffled mini-batch SGD per the reference schedule. Single
/// threaded and bit-reproducible for a fixed seed.
TrainResult train(const ModelConfig& mc, const TrainConfig& tc,
                  const std::vector<SamplePair>& data, const TrainOptions& opts = {});

/// Deterministic inference at the checkpoint's configured input size;
/// predictions resized back to each sample's native size for scoring.
/// `export_dir`, when set, receives one 8-bit map per sample id.
MetricReport evaluate(const Checkpoint& ckpt, const std::vector<SamplePair>& data,
                      const std::optional<std::filesystem::path>& export_dir = std::nullopt);

/// Same, reusing an already instantiated model (must match the checkpoint).
MetricReport evaluate_model(GrnetModel& model, const std::vector<SamplePair>& data,
                            const std::optional<std::filesystem::path>& export_dir = std::nullopt);

/// Per-sample saliency maps (sigmoid of the logits) at native sample size.
std::vector<Grid> predict(GrnetModel& model, const std::vector<SamplePair>& data);

struct GateStatsRow {
  std::string dataset;
  int64_t n_samples = 0;
  std::array<double, 3> ga{}, gb{};
  double gr = 0.0, gd = 0.0;
};

struct GateStatsReport {
  std::vector<GateStatsRow> rows;  // per dataset
  GateStatsRow overall;            // pooled, dataset = "ALL"
  bool has_edge_gates = false;

  /// One CSV row per dataset plus the pooled row, with depth-dominance
  /// indicator columns.
  std::string to_csv() const;
};

/// Mean gate values over one or more named datasets. Requires a checkpoint
/// whose fusion gates exist; the edge pair is included when present.
GateStatsReport gate_stats(const Checkpoint& ckpt,
                           const std::vector<std::pair<std::string, std::vector<SamplePair>>>& sets);

}  // namespace grnet
