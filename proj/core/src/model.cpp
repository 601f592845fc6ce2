// SPDX-License-Identifier: Apache-2.0
#include "grnet/model.hpp"

namespace grnet {

std::vector<GateSample> ForwardOutputs::gate_samples() const {
  int64_t n = saliency_logits.value().n();
  std::vector<GateSample> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    if (has_mgu_gates)
      for (int l = 0; l < 3; ++l) {
        out[i].ga[l] = ga[l].value()[i];
        out[i].gb[l] = gb[l].value()[i];
      }
    if (has_edge_gates) {
      out[i].gr = gr.value()[i];
      out[i].gd = gd.value()[i];
    }
  }
  return out;
}

GrnetModel::GrnetModel(const ModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  const AblationFlags& f = cfg_.flags;
  Rng rng(init_seed);
  Scope root{&reg_, "", ParamGroup::other};

  const bool full_dec = f.decoder_mode == DecoderMode::full;
  has_wams_ = (f.use_mixer && f.mgu_gating) || (full_dec && f.oegs_gating);
  const bool need_l5_proj = has_wams_ || !f.use_mixer;
  const auto& w = cfg_.plan.stage_widths;

  enc_r_.emplace(root.sub("enc_r", ParamGroup::backbone), cfg_.plan, rng);
  if (f.use_depth) enc_d_.emplace(root.sub("enc_d", ParamGroup::backbone), cfg_.plan, rng);

  for (int l = 0; l < 4; ++l) {
    if (l == 3 && !need_l5_proj) break;
    const std::string name = "proj_l" + std::to_string(l + 2);
    proj_r_[l] = make_project64(root.sub("proj_r." + name), w[l + 1], Act::relu, rng);
    if (f.use_depth)
      proj_d_[l] = make_project64(root.sub("proj_d." + name), w[l + 1], Act::relu, rng);
  }

  if (has_wams_) {
    sem_r_.emplace(root.sub("sem_r"), rng);
    sem_d_.emplace(root.sub("sem_d"), rng);
  }

  std::optional<LevelChannels> ch_b;
  LevelChannels ch_a{64, 64, 64, 64};
  if (f.use_mixer) {
    mgus_.emplace();
    for (int l = 0; l < 3; ++l)
      (*mgus_)[l] = Mgu(root.sub("mgu" + std::to_string(l + 1)), f.wam_variant, f.mgu_gating,
                        cfg_.mgu_concat_fusion, rng);
    int64_t fused = (*mgus_)[0].out_channels();
    mixer_a_.emplace(root.sub("mixer_a", ParamGroup::backbone), cfg_.plan, fused, rng);
    mixer_b_.emplace(root.sub("mixer_b", ParamGroup::backbone), cfg_.plan, fused, rng);
    ch_a = {w[1], w[2], w[3], w[4]};
    ch_b = ch_a;
  } else if (f.use_depth) {
    ch_b = ch_a;
  }

  if (full_dec && f.oegs_gating) enc_wam_.emplace(root.sub("enc_wam"), f.wam_variant, rng);

  decoder_.emplace(root.sub("decoder"), f.decoder_mode, ch_a, ch_b, full_dec, w[0], w[1],
                   cfg_.edge_head, rng);
}

ForwardOutputs GrnetModel::forward(const Tensor& rgb, const Tensor& depth, bool training) {
  const AblationFlags& f = cfg_.flags;
  const int64_t S = cfg_.input_size;
  if (rgb.c() != 3 || rgb.h() != S || rgb.w() != S)
    throw ShapeError("model expects rgb (n,3," + std::to_string(S) + "," + std::to_string(S) +
                     "), got " + rgb.shape_str());
  if (f.use_depth) {
    if (depth.c() != 1 || depth.h() != S || depth.w() != S || depth.n() != rgb.n())
      throw ShapeError("model expects depth (n,1," + std::to_string(S) + "," +
                       std::to_string(S) + "), got " + depth.shape_str());
  }

  Var rgb_v(rgb), depth_v;
  StageFeatures fr = enc_r_->forward(rgb_v, training);
  std::optional<StageFeatures> fd;
  if (f.use_depth) {
    depth_v = Var(depth);
    fd = enc_d_->forward(depth_to_3ch(depth_v), training);
  }

  auto project = [&](const std::array<std::optional<ConvUnit>, 4>& proj, const StageFeatures& sf,
                     int l) {
    const Var* stages[4] = {&sf.s2, &sf.s3, &sf.s4, &sf.s5};
    return proj[l]->forward(*stages[l], training);
  };

  Var rs, ds;
  if (has_wams_) {
    rs = sem_r_->forward(project(proj_r_, fr, 2), project(proj_r_, fr, 3), training);
    ds = sem_d_->forward(project(proj_d_, *fd, 2), project(proj_d_, *fd, 3), training);
  }

  ForwardOutputs out;
  std::array<Var, 4> xa;
  std::optional<std::array<Var, 4>> xb;

  if (f.use_mixer) {
    std::array<Var, 3> a, b;
    for (int l = 0; l < 3; ++l) {
      MguOutputs mo = (*mgus_)[l].forward(project(proj_d_, *fd, l), project(proj_r_, fr, l), ds,
                                          rs, training);
      a[l] = mo.a;
      b[l] = mo.b;
      out.ga[l] = mo.ga;
      out.gb[l] = mo.gb;
    }
    out.has_mgu_gates = f.mgu_gating;
    MixerOutputs ma = mixer_a_->forward(a[0], a[1], a[2], training);
    MixerOutputs mb = mixer_b_->forward(b[0], b[1], b[2], training);
    xa = {ma.x2p, ma.x3p, ma.x4p, ma.x5p};
    xb = {{mb.x2p, mb.x3p, mb.x4p, mb.x5p}};
  } else if (f.use_depth) {
    for (int l = 0; l < 4; ++l) xa[l] = project(proj_d_, *fd, l);
    xb.emplace();
    for (int l = 0; l < 4; ++l) (*xb)[l] = project(proj_r_, fr, l);
  } else {
    for (int l = 0; l < 4; ++l) xa[l] = project(proj_r_, fr, l);
  }

  std::optional<Decoder::EdgeInputs> edges;
  if (f.decoder_mode == DecoderMode::full) {
    Var gr, gd;
    if (enc_wam_) {
      auto [r, d] =
          enc_wam_->forward(project(proj_d_, *fd, 0), project(proj_r_, fr, 0), ds, rs, training);
      gr = r;
      gd = d;
      out.has_edge_gates = true;
    } else {
      gr = unit_gate(rgb.n());
      gd = unit_gate(rgb.n());
    }
    out.gr = gr;
    out.gd = gd;
    edges = Decoder::EdgeInputs{fd->s1, fd->s2, fr.s1, fr.s2, gr, gd};
  }

  out.dec = decoder_->forward(xa, xb, edges, S, training);
  out.saliency_logits = out.dec.saliency_logits;
  out.edge_logits = out.dec.edge_logits;
  return out;
}

}  // namespace grnet
