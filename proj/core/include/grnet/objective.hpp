// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "grnet/autodiff.hpp"
#include "grnet/config.hpp"

namespace grnet {

struct LossReport {
  double bce = 0.0;
  double iou = 0.0;
  std::optional<double> edge_bce;
  double total = 0.0;
};

struct LossResult {
  Var total;
  LossReport report;
};

/// Mean binary cross-entropy from logits, stable softplus form.
Var bce_loss(const Var& logits, const Var& gt);

/// Soft IoU loss, smoothing constant 1, averaged over the batch.
Var iou_loss(const Var& logits, const Var& gt);

/// BCE + IoU, plus edge BCE when enabled.
LossResult structure_loss(const Var& logits, const Var& gt, const std::optional<Var>& edge_logits,
                          const std::optional<Var>& edge_gt, bool edge_enabled);

/// Loss-mode dispatch used by the trainer. In bce mode the IoU term is
/// neither computed nor added.
LossResult compute_loss(const Var& logits, const Var& gt, LossMode mode,
                        const std::optional<Var>& edge_logits, const std::optional<Var>& edge_gt,
                        bool edge_enabled);

}  // namespace grnet
