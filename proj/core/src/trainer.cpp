// SPDX-License-Identifier: Apache-2.0
#include "grnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "grnet/image_io.hpp"

namespace grnet {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int64_t> shuffled_indices(int64_t n, Rng& rng) {
  std::vector<int64_t> idx(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  for (int64_t i = n - 1; i > 0; --i)
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(rng.uniform_int(i + 1))]);
  return idx;
}

Grid slice_pred(const Tensor& logits, int64_t i) {
  Grid g(logits.h(), logits.w());
  for (int64_t y = 0; y < logits.h(); ++y)
    for (int64_t x = 0; x < logits.w(); ++x) g.at(y, x) = sigmoid_s(logits.at(i, 0, y, x));
  return g;
}

// Resizes one sample's network inputs to the model's square input size.
Batch network_batch(const std::vector<SamplePair>& data, const std::vector<int64_t>& idx,
                    int64_t input_size) {
  std::vector<SamplePair> scratch;
  scratch.reserve(idx.size());
  bool native = true;
  for (int64_t i : idx) {
    const SamplePair& s = data[static_cast<size_t>(i)];
    if (s.h() != input_size || s.w() != input_size) native = false;
  }
  if (native) return make_batch(data, idx);
  std::vector<int64_t> local;
  for (int64_t i : idx) {
    SamplePair s = data[static_cast<size_t>(i)];
    for (auto& p : s.rgb) p = resize_bilinear(p, input_size, input_size);
    s.depth = resize_bilinear(s.depth, input_size, input_size);
    s.gt = resize_nearest(s.gt, input_size, input_size);
    s.edge = resize_nearest(s.edge, input_size, input_size);
    local.push_back(static_cast<int64_t>(scratch.size()));
    scratch.push_back(std::move(s));
  }
  return make_batch(scratch, local);
}

}  // namespace

double lr_at(int64_t step, int64_t total_steps, double lr_max, double warmup_fraction) {
  if (total_steps < 1) throw ConfigError("schedule needs total_steps >= 1");
  if (step < 0 || step > total_steps)
    throw ConfigError("schedule step " + std::to_string(step) + " outside [0, " +
                      std::to_string(total_steps) + "]");
  const int64_t warm = static_cast<int64_t>(std::floor(warmup_fraction * static_cast<double>(total_steps)));
  if (step <= warm)
    return warm == 0 ? 0.0
                     : lr_max * static_cast<double>(step) / static_cast<double>(warm);
  return lr_max * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warm);
}

std::string TrainResult::loss_csv() const {
  std::string s = "step,lr_backbone,lr_other,bce,iou,total\n";
  for (const auto& l : steps) {
    s += std::to_string(l.step) + "," + fmt_double(l.lr_backbone) + "," + fmt_double(l.lr_other) +
         "," + fmt_double(l.loss.bce) + "," + fmt_double(l.loss.iou) + "," +
         fmt_double(l.loss.total) + "\n";
  }
  return s;
}

TrainResult train(const ModelConfig& mc, const TrainConfig& tc,
                  const std::vector<SamplePair>& data, const TrainOptions& opts) {
  mc.validate();
  tc.validate();
  if (data.empty()) throw DataError("training requires a nonempty dataset");
  if (tc.edge_loss && !mc.edge_head)
    throw ConfigError("edge loss requires a model built with the edge head");

  GrnetModel model(mc, tc.seed);
  if (opts.init_from) opts.init_from->apply_to(model);
  auto& params = model.registry().params();
  std::vector<Tensor> velocity;
  velocity.reserve(params.size());
  for (const auto& p : params) velocity.push_back(Tensor::zeros_like(p.var.value()));

  const int64_t n = static_cast<int64_t>(data.size());
  const int64_t steps_per_epoch = (n + tc.batch_size - 1) / tc.batch_size;
  int64_t total = steps_per_epoch * static_cast<int64_t>(tc.max_epochs);
  if (tc.max_steps > 0) total = std::min(total, tc.max_steps);
  const int64_t crop = tc.crop_size > 0 ? tc.crop_size : mc.input_size * 7 / 8;

  TrainResult res;
  res.total_steps = total;
  Rng shuffle_base(tc.seed);
  Rng aug_base = Rng(tc.seed).fork(0xa06);

  int64_t step = 0;
  bool done = false;
  for (int epoch = 0; epoch < tc.max_epochs && !done; ++epoch) {
    Rng erng = shuffle_base.fork(static_cast<uint64_t>(epoch));
    std::vector<int64_t> order = shuffled_indices(n, erng);
    Rng arng = aug_base.fork(static_cast<uint64_t>(epoch));

    for (int64_t b = 0; b < steps_per_epoch && !done; ++b) {
      ++step;
      const int64_t lo = b * tc.batch_size;
      const int64_t hi = std::min<int64_t>(lo + tc.batch_size, n);
      std::vector<int64_t> idx(order.begin() + lo, order.begin() + hi);

      Batch batch;
      if (mc.flags.augmentation) {
        std::vector<SamplePair> augmented;
        std::vector<int64_t> local;
        for (int64_t i : idx) {
          augmented.push_back(augment(data[static_cast<size_t>(i)], crop, arng.next_u64()));
          local.push_back(static_cast<int64_t>(local.size()));
        }
        batch = network_batch(augmented, local, mc.input_size);
      } else {
        batch = network_batch(data, idx, mc.input_size);
      }

      ForwardOutputs out = model.forward(batch.rgb, batch.depth, /*training=*/true);
      std::optional<Var> edge_gt;
      if (tc.edge_loss) edge_gt = Var(batch.edge);
      LossResult loss = compute_loss(out.saliency_logits, Var(batch.gt), mc.flags.loss_mode,
                                     out.edge_logits, edge_gt, tc.edge_loss);

      if (!std::isfinite(loss.report.total)) {
        if (opts.rescue) *opts.rescue = Checkpoint::from_model(model, tc, step - 1);
        throw DivergenceError("non-finite loss at step " + std::to_string(step), step);
      }

      const double lr_bb = lr_at(step, total, tc.lr_backbone_max, tc.warmup_fraction);
      const double lr_ot = lr_at(step, total, tc.lr_other_max, tc.warmup_fraction);

      model.registry().zero_grad();
      backward(loss.total);
      for (size_t pi = 0; pi < params.size(); ++pi) {
        Var& v = params[pi].var;
        if (!v.node()->grad_ready) continue;               // unused in this graph
        const double lr = params[pi].group == ParamGroup::backbone ? lr_bb : lr_ot;
        Tensor& p = v.value();
        Tensor& g = v.grad();
        Tensor& vel = velocity[pi];
        for (int64_t j = 0; j < p.size(); ++j) {
          const double grad = g[j] + tc.weight_decay * p[j];
          vel[j] = tc.momentum * vel[j] + grad;
          p[j] -= lr * vel[j];
        }
      }

      StepLog log{step, lr_bb, lr_ot, loss.report};
      res.steps.push_back(log);
      if (opts.progress) {
        (*opts.progress) << "step " << step << "/" << total << " loss " << loss.report.total
                         << "\n";
        opts.progress->flush();
      }

      if (opts.stop_check && opts.stop_check_every > 0 && step % opts.stop_check_every == 0 &&
          opts.stop_check(step, model))
        done = true;
      if (step >= total) done = true;
    }
  }

  res.checkpoint = Checkpoint::from_model(model, tc, step);
  return res;
}

std::vector<Grid> predict(GrnetModel& model, const std::vector<SamplePair>& data) {
  const int64_t S = model.config().input_size;
  std::vector<Grid> preds;
  preds.reserve(data.size());
  constexpr int64_t kEvalBatch = 4;
  for (size_t lo = 0; lo < data.size(); lo += kEvalBatch) {
    std::vector<int64_t> idx;
    for (size_t i = lo; i < std::min(data.size(), lo + kEvalBatch); ++i)
      idx.push_back(static_cast<int64_t>(i));
    Batch batch = network_batch(data, idx, S);
    ForwardOutputs out = model.forward(batch.rgb, batch.depth, /*training=*/false);
    for (size_t k = 0; k < idx.size(); ++k) {
      Grid p = slice_pred(out.saliency_logits.value(), static_cast<int64_t>(k));
      const SamplePair& s = data[lo + k];
      if (s.h() != p.h() || s.w() != p.w()) p = resize_bilinear(p, s.h(), s.w());
      preds.push_back(std::move(p));
    }
  }
  return preds;
}

MetricReport evaluate_model(GrnetModel& model, const std::vector<SamplePair>& data,
                            const std::optional<std::filesystem::path>& export_dir) {
  if (data.empty()) throw DataError("evaluation requires a nonempty dataset");
  std::vector<Grid> preds = predict(model, data);
  if (export_dir) {
    std::filesystem::create_directories(*export_dir);
    for (size_t i = 0; i < data.size(); ++i)
      write_pnm(*export_dir / (data[i].id + ".pgm"), gray_to_u8(preds[i]));
  }
  std::vector<std::pair<Grid, Grid>> pairs;
  pairs.reserve(data.size());
  for (size_t i = 0; i < data.size(); ++i) pairs.emplace_back(std::move(preds[i]), data[i].gt);
  return aggregate(pairs);
}

MetricReport evaluate(const Checkpoint& ckpt, const std::vector<SamplePair>& data,
                      const std::optional<std::filesystem::path>& export_dir) {
  auto model = ckpt.instantiate();
  return evaluate_model(*model, data, export_dir);
}

GateStatsReport gate_stats(
    const Checkpoint& ckpt,
    const std::vector<std::pair<std::string, std::vector<SamplePair>>>& sets) {
  if (!(ckpt.model.flags.use_mixer && ckpt.model.flags.mgu_gating))
    throw ConfigError("gate statistics need a checkpoint trained with gated fusion");
  auto model = ckpt.instantiate();
  const int64_t S = model->config().input_size;

  GateStatsReport rep;
  rep.has_edge_gates =
      ckpt.model.flags.decoder_mode == DecoderMode::full && ckpt.model.flags.oegs_gating;
  rep.overall.dataset = "ALL";

  for (const auto& [name, data] : sets) {
    if (data.empty()) throw DataError("gate statistics over an empty dataset: " + name);
    GateStatsRow row;
    row.dataset = name;
    constexpr int64_t kEvalBatch = 4;
    for (size_t lo = 0; lo < data.size(); lo += kEvalBatch) {
      std::vector<int64_t> idx;
      for (size_t i = lo; i < std::min(data.size(), lo + kEvalBatch); ++i)
        idx.push_back(static_cast<int64_t>(i));
      Batch batch = network_batch(data, idx, S);
      ForwardOutputs out = model->forward(batch.rgb, batch.depth, /*training=*/false);
      for (const GateSample& gs : out.gate_samples()) {
        for (int l = 0; l < 3; ++l) {
          row.ga[l] += gs.ga[l];
          row.gb[l] += gs.gb[l];
        }
        row.gr += gs.gr;
        row.gd += gs.gd;
        ++row.n_samples;
      }
    }
    for (int l = 0; l < 3; ++l) {
      rep.overall.ga[l] += row.ga[l];
      rep.overall.gb[l] += row.gb[l];
    }
    rep.overall.gr += row.gr;
    rep.overall.gd += row.gd;
    rep.overall.n_samples += row.n_samples;

    const double inv = 1.0 / static_cast<double>(row.n_samples);
    for (int l = 0; l < 3; ++l) {
      row.ga[l] *= inv;
      row.gb[l] *= inv;
    }
    row.gr *= inv;
    row.gd *= inv;
    rep.rows.push_back(row);
  }

  const double inv = 1.0 / static_cast<double>(rep.overall.n_samples);
  for (int l = 0; l < 3; ++l) {
    rep.overall.ga[l] *= inv;
    rep.overall.gb[l] *= inv;
  }
  rep.overall.gr *= inv;
  rep.overall.gd *= inv;
  return rep;
}

std::string GateStatsReport::to_csv() const {
  std::string s = "dataset,n_samples,ga1,ga2,ga3,gb1,gb2,gb3";
  if (has_edge_gates) s += ",gr,gd";
  s += ",gb_gt_ga1,gb_gt_ga2,gb_gt_ga3";
  if (has_edge_gates) s += ",gd_gt_gr";
  s += "\n";
  auto emit = [&](const GateStatsRow& r) {
    s += r.dataset + "," + std::to_string(r.n_samples);
    for (int l = 0; l < 3; ++l) s += "," + fmt_double(r.ga[l]);
    for (int l = 0; l < 3; ++l) s += "," + fmt_double(r.gb[l]);
    if (has_edge_gates) s += "," + fmt_double(r.gr) + "," + fmt_double(r.gd);
    for (int l = 0; l < 3; ++l) s += r.gb[l] > r.ga[l] ? ",1" : ",0";
    if (has_edge_gates) s += r.gd > r.gr ? ",1" : ",0";
    s += "\n";
  };
  for (const auto& r : rows) emit(r);
  emit(overall);
  return s;
}

}  // namespace grnet
