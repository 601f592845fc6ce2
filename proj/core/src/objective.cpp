// SPDX-License-Identifier: Apache-2.0
#include "grnet/objective.hpp"

namespace grnet {

namespace {

void check_pair(const Var& logits, const Var& gt) {
  if (!logits.value().same_shape(gt.value()))
    throw ShapeError("loss inputs differ in shape: " + logits.value().shape_str() + " vs " +
                     gt.value().shape_str());
  for (double v : gt.value().vec())
    if (v != 0.0 && v != 1.0) throw DataError("loss target must be binary");
}

Var one_minus(const Var& gt) {
  Tensor t = gt.value();
  for (double& v : t.vec()) v = 1.0 - v;
  return Var(std::move(t));
}

}  // namespace

Var bce_loss(const Var& logits, const Var& gt) {
  check_pair(logits, gt);
  Var term = add(mul(gt, softplus(scale(logits, -1.0))), mul(one_minus(gt), softplus(logits)));
  return scale(sum_all(term), 1.0 / static_cast<double>(logits.value().size()));
}

Var iou_loss(const Var& logits, const Var& gt) {
  check_pair(logits, gt);
  Var p = sigmoid(logits);
  Var inter = sum_per_sample(mul(p, gt));
  Var uni = sub(add(sum_per_sample(p), sum_per_sample(gt)), inter);
  Var frac = div(add_const(inter, 1.0), add_const(uni, 1.0));
  Var per_sample = sub(Var(Tensor::full(frac.value().n(), 1, 1, 1, 1.0)), frac);
  return scale(sum_all(per_sample), 1.0 / static_cast<double>(logits.value().n()));
}

LossResult structure_loss(const Var& logits, const Var& gt, const std::optional<Var>& edge_logits,
                          const std::optional<Var>& edge_gt, bool edge_enabled) {
  LossResult r;
  Var b = bce_loss(logits, gt);
  Var i = iou_loss(logits, gt);
  r.total = add(b, i);
  r.report.bce = b.value().item();
  r.report.iou = i.value().item();
  if (edge_enabled) {
    if (!edge_logits || !edge_gt)
      throw ConfigError("edge loss enabled but edge prediction or target missing");
    Var e = bce_loss(*edge_logits, *edge_gt);
    r.total = add(r.total, e);
    r.report.edge_bce = e.value().item();
  }
  r.report.total = r.total.value().item();
  return r;
}

LossResult compute_loss(const Var& logits, const Var& gt, LossMode mode,
                        const std::optional<Var>& edge_logits, const std::optional<Var>& edge_gt,
                        bool edge_enabled) {
  if (mode == LossMode::structure)
    return structure_loss(logits, gt, edge_logits, edge_gt, edge_enabled);
  LossResult r;
  Var b = bce_loss(logits, gt);
  r.total = b;
  r.report.bce = b.value().item();
  if (edge_enabled) {
    if (!edge_logits || !edge_gt)
      throw ConfigError("edge loss enabled but edge prediction or target missing");
    Var e = bce_loss(*edge_logits, *edge_gt);
    r.total = add(r.total, e);
    r.report.edge_bce = e.value().item();
  }
  r.report.total = r.total.value().item();
  return r;
}

}  // namespace grnet
