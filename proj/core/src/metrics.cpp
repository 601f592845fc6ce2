// SPDX-License-Identifier: Apache-2.0
#include "grnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "grnet/common.hpp"

namespace grnet {

namespace {

constexpr double kEps = 2.220446049250313e-16;

void check_sample(const Grid& pred, const Grid& gt) {
  if (!pred.same_shape(gt))
    throw ShapeError("metric inputs differ in shape");
  for (double v : pred.vec())
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("prediction values must lie in [0,1]");
  for (double v : gt.vec())
    if (v != 0.0 && v != 1.0) throw DataError("ground truth must be binary");
}

struct Confusion {
  int64_t tp = 0, fp = 0, fn = 0;
};

Confusion confusion_at(const Grid& pred, const Grid& gt, double t) {
  Confusion c;
  for (int64_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] >= t;
    const bool g = gt[i] != 0.0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
  }
  return c;
}

PrPoint pr_from(const Confusion& c) {
  PrPoint p;
  p.precision = (c.tp + c.fp) == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fp);
  p.recall = (c.tp + c.fn) == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fn);
  return p;
}

std::vector<double> gaussian7(double sigma) {
  std::vector<double> k(49);
  double sum = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      double d2 = (i - 3) * (i - 3) + (j - 3) * (j - 3);
      k[i * 7 + j] = std::exp(-d2 / (2.0 * sigma * sigma));
      sum += k[i * 7 + j];
    }
  for (double& v : k) v /= sum;
  return k;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double mae(const Grid& pred, const Grid& gt) {
  check_sample(pred, gt);
  double s = 0.0;
  for (int64_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - gt[i]);
  return s / static_cast<double>(pred.size());
}

std::vector<PrPoint> pr_curve(const Grid& pred, const Grid& gt) {
  check_sample(pred, gt);
  std::vector<PrPoint> out(256);
  for (int k = 0; k < 256; ++k)
    out[k] = pr_from(confusion_at(pred, gt, static_cast<double>(k) / 255.0));
  return out;
}

double f_beta(double precision, double recall, double beta_sq) {
  const double den = beta_sq * precision + recall;
  if (den == 0.0) return 0.0;
  return (1.0 + beta_sq) * precision * recall / den;
}

EdtResult distance_to_foreground(const Grid& gt) {
  const int64_t h = gt.h(), w = gt.w();
  EdtResult res;
  res.dist.assign(static_cast<size_t>(h * w), std::numeric_limits<double>::infinity());
  res.nearest.assign(static_cast<size_t>(h * w), -1);

  // Per column: nearest foreground row (ties resolved to the smaller row).
  std::vector<int64_t> col_row(static_cast<size_t>(h * w), -1);
  std::vector<int64_t> fg_rows;
  for (int64_t c = 0; c < w; ++c) {
    fg_rows.clear();
    for (int64_t r = 0; r < h; ++r)
      if (gt.at(r, c) != 0.0) fg_rows.push_back(r);
    if (fg_rows.empty()) continue;
    size_t j = 0;
    for (int64_t r = 0; r < h; ++r) {
      while (j + 1 < fg_rows.size() && std::abs(fg_rows[j + 1] - r) < std::abs(fg_rows[j] - r))
        ++j;
      col_row[static_cast<size_t>(r * w + c)] = fg_rows[j];
    }
  }

  // Per pixel: scan source columns left to right; strict improvement keeps
  // the smallest column (and the smaller row from the pass above) on ties.
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      double best = std::numeric_limits<double>::infinity();
      int64_t best_idx = -1;
      for (int64_t cc = 0; cc < w; ++cc) {
        int64_t nr = col_row[static_cast<size_t>(r * w + cc)];
        if (nr < 0) continue;
        const double dy = static_cast<double>(nr - r);
        const double dx = static_cast<double>(cc - c);
        const double d2 = dx * dx + dy * dy;
        if (d2 < best) {
          best = d2;
          best_idx = nr * w + cc;
        }
      }
      if (best_idx >= 0) {
        res.dist[static_cast<size_t>(r * w + c)] = std::sqrt(best);
        res.nearest[static_cast<size_t>(r * w + c)] = best_idx;
      }
    }
  }
  return res;
}

double f_w_beta(const Grid& pred, const Grid& gt, double beta_sq) {
  check_sample(pred, gt);
  const int64_t h = gt.h(), w = gt.w(), n = h * w;
  double gt_sum = 0.0;
  for (double v : gt.vec()) gt_sum += v;
  if (gt_sum == 0.0) throw DataError("weighted F-measure undefined for an empty mask");

  std::vector<double> e(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) e[static_cast<size_t>(i)] = std::abs(pred[i] - gt[i]);

  EdtResult edt = distance_to_foreground(gt);

  // Pixel dependency: background errors inherit the nearest foreground error
  // before smoothing.
  std::vector<double> et = e;
  for (int64_t i = 0; i < n; ++i)
    if (gt[i] == 0.0) et[static_cast<size_t>(i)] = e[static_cast<size_t>(edt.nearest[static_cast<size_t>(i)])];

  static const std::vector<double> kernel = gaussian7(5.0);
  std::vector<double> ea(static_cast<size_t>(n), 0.0);
  for (int64_t r = 0; r < h; ++r)
    for (int64_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int ky = 0; ky < 7; ++ky) {
        const int64_t sr = r + ky - 3;
        if (sr < 0 || sr >= h) continue;
        for (int kx = 0; kx < 7; ++kx) {
          const int64_t sc = c + kx - 3;
          if (sc < 0 || sc >= w) continue;
          acc += kernel[static_cast<size_t>(ky * 7 + kx)] * et[static_cast<size_t>(sr * w + sc)];
        }
      }
      ea[static_cast<size_t>(r * w + c)] = acc;
    }

  // Importance weighting and the weighted error field.
  const double decay = std::log(0.5) / 5.0;
  double ew_fg = 0.0, ew_bg = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const size_t s = static_cast<size_t>(i);
    double err;
    double b;
    if (gt[i] != 0.0) {
      err = std::min(e[s], ea[s]);
      b = 1.0;
      ew_fg += err * b;
    } else {
      err = e[s];
      b = 2.0 - std::exp(decay * edt.dist[s]);
      ew_bg += err * b;
    }
  }

  const double tpw = gt_sum - ew_fg;
  const double fpw = ew_bg;
  const double recall = 1.0 - ew_fg / gt_sum;
  const double precision = tpw / (kEps + tpw + fpw);
  const double den = kEps + beta_sq * precision + recall;
  return (1.0 + beta_sq) * precision * recall / den;
}

MetricReport aggregate(const std::vector<std::pair<Grid, Grid>>& samples) {
  if (samples.empty()) throw DataError("metric aggregation over an empty sample set");
  MetricReport rep;
  rep.n_samples = static_cast<int64_t>(samples.size());
  rep.pr.assign(256, PrPoint{});
  const double inv_n = 1.0 / static_cast<double>(samples.size());

  for (const auto& [pred, gt] : samples) {
    rep.mae += mae(pred, gt);
    rep.f_w_beta += f_w_beta(pred, gt);

    double mean_pred = 0.0;
    for (double v : pred.vec()) mean_pred += v;
    mean_pred /= static_cast<double>(pred.size());
    const double t = std::min(1.0, 2.0 * mean_pred);
    PrPoint ap = pr_from(confusion_at(pred, gt, t));
    rep.f_beta_adaptive += f_beta(ap.precision, ap.recall);

    std::vector<PrPoint> curve = pr_curve(pred, gt);
    for (int k = 0; k < 256; ++k) {
      rep.pr[static_cast<size_t>(k)].precision += curve[static_cast<size_t>(k)].precision;
      rep.pr[static_cast<size_t>(k)].recall += curve[static_cast<size_t>(k)].recall;
    }
  }

  rep.mae *= inv_n;
  rep.f_w_beta *= inv_n;
  rep.f_beta_adaptive *= inv_n;
  for (auto& p : rep.pr) {
    p.precision *= inv_n;
    p.recall *= inv_n;
  }
  rep.f_beta_max = 0.0;
  for (const auto& p : rep.pr)
    rep.f_beta_max = std::max(rep.f_beta_max, f_beta(p.precision, p.recall));
  return rep;
}

std::string MetricReport::to_kv() const {
  std::string s;
  s += "mae " + fmt_double(mae) + "\n";
  s += "f_beta_max " + fmt_double(f_beta_max) + "\n";
  s += "f_beta_adaptive " + fmt_double(f_beta_adaptive) + "\n";
  s += "f_w_beta " + fmt_double(f_w_beta) + "\n";
  s += "n_samples " + std::to_string(n_samples) + "\n";
  return s;
}

std::string MetricReport::to_csv(const std::string& dataset, const std::string& model) const {
  std::string s = "dataset,model,metric,value\n";
  auto row = [&](const char* name, double v) {
    s += dataset + "," + model + "," + name + "," + fmt_double(v) + "\n";
  };
  row("mae", mae);
  row("f_beta_max", f_beta_max);
  row("f_beta_adaptive", f_beta_adaptive);
  row("f_w_beta", f_w_beta);
  return s;
}

std::string MetricReport::pr_to_csv() const {
  std::string s = "threshold,precision,recall\n";
  for (size_t k = 0; k < pr.size(); ++k) {
    s += fmt_double(static_cast<double>(k) / 255.0) + "," + fmt_double(pr[k].precision) + "," +
         fmt_double(pr[k].recall) + "\n";
  }
  return s;
}

}  // namespace grnet
