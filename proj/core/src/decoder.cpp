// SPDX-License-Identifier: Apache-2.0
#include "grnet/decoder.hpp"

namespace grnet {

FuseLevel::FuseLevel(const Scope& s, int64_t ca, std::optional<int64_t> cb, Rng& rng) {
  if (cb) {
    proj_a = ConvUnit(s.sub("proj_a"), ca, 64, 3, 1, true, Act::relu, rng);
    proj_b = ConvUnit(s.sub("proj_b"), *cb, 64, 3, 1, true, Act::relu, rng);
    merge = ConvUnit(s.sub("merge"), 128, 64, 3, 1, true, Act::relu, rng);
  } else {
    proj_a = ConvUnit(s.sub("proj_a"), ca, 64, 3, 1, true, Act::relu, rng);
    merge = ConvUnit(s.sub("merge"), 64, 64, 3, 1, true, Act::relu, rng);
  }
}

Var FuseLevel::forward(const Var& xa, const std::optional<Var>& xb, bool training) const {
  Var a = proj_a->forward(xa, training);
  if (proj_b) {
    if (!xb) throw ShapeError("level fusion built for two inputs, got one");
    if (xa.value().h() != xb->value().h() || xa.value().w() != xb->value().w())
      throw ShapeError("level fusion inputs differ in size: " + xa.value().shape_str() + " vs " +
                       xb->value().shape_str());
    return merge.forward(concat_channels({a, proj_b->forward(*xb, training)}), training);
  }
  return merge.forward(a, training);
}

Oegs::Oegs(const Scope& s, int64_t s1_ch, int64_t s2_ch, Rng& rng) {
  ed_conv = ConvUnit(s.sub("ed_conv"), s1_ch + s2_ch, 64, 3, 1, true, Act::relu, rng);
  er_conv = ConvUnit(s.sub("er_conv"), s1_ch + s2_ch, 64, 3, 1, true, Act::relu, rng);
  suppress = Conv2d(s.sub("suppress"), 64, 1, 3, 1, rng);
}

Var Oegs::forward(const Var& s1_d, const Var& s2_d, const Var& s1_r, const Var& s2_r,
                  const Var& f1, const Var& gr, const Var& gd, bool training) const {
  const int64_t eh = s1_d.value().h(), ew = s1_d.value().w();
  if (s1_r.value().h() != eh || s1_r.value().w() != ew)
    throw ShapeError("edge stream stage-1 sizes differ across modalities");
  Var ed = ed_conv.forward(concat_channels({resize_bilinear(s2_d, eh, ew), s1_d}), training);
  Var er = er_conv.forward(concat_channels({resize_bilinear(s2_r, eh, ew), s1_r}), training);
  Var mask = sigmoid(suppress.forward(resize_bilinear(f1, eh, ew)));
  ed = mul(ed, mask);
  er = mul(er, mask);
  return add(mul(gd, ed), mul(gr, er));
}

Decoder::Decoder(const Scope& s, DecoderMode m, const LevelChannels& in_ch,
                 std::optional<LevelChannels> in_ch_b, bool with_oegs, int64_t s1_ch,
                 int64_t s2_ch, bool with_edge_head, Rng& rng)
    : mode(m) {
  for (int l = 0; l < 4; ++l) {
    Scope fs = s.sub("fuse" + std::to_string(l + 2));
    fuse[l] = FuseLevel(fs, in_ch[l], in_ch_b ? std::optional((*in_ch_b)[l]) : std::nullopt, rng);
    lateral[l] = ConvUnit(s.sub("lat" + std::to_string(l + 2)), 64, 64, 3, 1, true, Act::relu, rng);
  }
  guide = ConvUnit(s.sub("guide"), 64, 64, 3, 1, true, Act::relu, rng);

  int64_t head_in = 64;
  if (mode != DecoderMode::fpn) {
    parallel.emplace();
    for (int l = 0; l < 4; ++l)
      (*parallel)[l] =
          ConvUnit(s.sub("par" + std::to_string(l + 2)), 64, 64, 3, 1, true, Act::relu, rng);
    if (with_oegs) {
      oegs = Oegs(s.sub("oegs"), s1_ch, s2_ch, rng);
      p2_edge = ConvUnit(s.sub("p2_edge"), 128, 64, 3, 1, true, Act::relu, rng);
    }
    p_merge = ConvUnit(s.sub("p_merge"), 64, 64, 3, 1, true, Act::relu, rng);
    head_in = 128;
  }
  head = Conv2d(s.sub("head"), head_in, 1, 3, 1, rng);
  if (with_edge_head) edge_head = Conv2d(s.sub("edge_head"), 64, 1, 3, 1, rng);
}

DecoderOutputs Decoder::forward(const std::array<Var, 4>& xa,
                                const std::optional<std::array<Var, 4>>& xb,
                                const std::optional<EdgeInputs>& edges, int64_t out_size,
                                bool training) const {
  DecoderOutputs out;
  for (int l = 0; l < 4; ++l)
    out.c[l] = fuse[l].forward(xa[l], xb ? std::optional((*xb)[l]) : std::nullopt, training);

  // Progressive branch, top-down.
  Var f = lateral[3].forward(out.c[3], training);
  for (int l = 2; l >= 0; --l) {
    const Tensor& cl = out.c[l].value();
    f = lateral[l].forward(add(out.c[l], resize_bilinear(f, cl.h(), cl.w())), training);
  }
  out.f2 = f;
  const int64_t g_h = out.f2.value().h() * 2, g_w = out.f2.value().w() * 2;
  out.f1 = resize_bilinear(guide.forward(out.f2, training), g_h, g_w);

  Var pre_head;
  if (mode == DecoderMode::fpn) {
    pre_head = resize_bilinear(out.f2, g_h, g_w);
  } else {
    if (oegs) {
      if (!edges) throw ShapeError("edge guidance enabled but encoder edge features missing");
      out.edge_feat = oegs->forward(edges->s1_d, edges->s2_d, edges->s1_r, edges->s2_r, out.f1,
                                    edges->gr, edges->gd, training);
    }
    Var sum;
    for (int l = 0; l < 4; ++l) {
      Var path = (*parallel)[l].forward(out.c[l], training);
      path = resize_bilinear(path, g_h, g_w);
      if (l == 0 && oegs) path = p2_edge->forward(concat_channels({path, out.edge_feat}), training);
      sum = l == 0 ? path : add(sum, path);
    }
    out.p = p_merge->forward(sum, training);
    pre_head = concat_channels({resize_bilinear(out.f2, g_h, g_w), out.p});
  }

  out.saliency_logits = resize_bilinear(head.forward(pre_head), out_size, out_size);
  if (edge_head && out.edge_feat.defined())
    out.edge_logits = resize_bilinear(edge_head->forward(out.edge_feat), out_size, out_size);
  return out;
}

}  // namespace grnet
