// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grnet/tensor.hpp"

namespace grnet {

struct PrPoint {
  double precision = 0.0;
  double recall = 0.0;
};

struct MetricReport {
  double mae = 0.0;
  double f_beta_max = 0.0;
  double f_beta_adaptive = 0.0;
  double f_w_beta = 0.0;
  std::vector<PrPoint> pr;  // 256 thresholds k/255
  int64_t n_samples = 0;

  /// Flat "key value" lines.
  std::string to_kv() const;
  /// "dataset,model,metric,value" rows (header included).
  std::string to_csv(const std::string& dataset, const std::string& model) const;
  /// "threshold,precision,recall" rows for the full curve.
  std::string pr_to_csv() const;
};

/// Mean absolute error between a [0,1] prediction and a binary mask.
double mae(const Grid& pred, const Grid& gt);

/// 256-point precision/recall curve; thresholds k/255, binarize pred >= t.
/// Precision defined as 1 when nothing is predicted positive.
std::vector<PrPoint> pr_curve(const Grid& pred, const Grid& gt);

/// F-measure with squared beta weighting (default follows the saliency
/// convention); 0 when the denominator vanishes.
double f_beta(double precision, double recall, double beta_sq = 0.3);

/// Exact Euclidean distance to the nearest foreground pixel, with the
/// nearest index resolved by smallest column then smallest row on ties.
/// `nearest` holds row-major linear indices, -1 when the mask is empty.
struct EdtResult {
  std::vector<double> dist;
  std::vector<int64_t> nearest;
};
EdtResult distance_to_foreground(const Grid& gt);

/// Weighted F-measure (error-field formulation with pixel dependency and
/// importance weighting).
double f_w_beta(const Grid& pred, const Grid& gt, double beta_sq = 1.0);

/// Per-sample metrics averaged; PR curves averaged pointwise; f_beta_max
/// taken over the averaged curve; adaptive threshold = 2*mean(pred).
MetricReport aggregate(const std::vector<std::pair<Grid, Grid>>& samples);

}  // namespace grnet
