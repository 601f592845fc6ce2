// SPDX-License-Identifier: Apache-2.0
#include "grnet/gating.hpp"

namespace grnet {

Wam::Wam(const Scope& s, WamVariant v, Rng& rng) : variant(v) {
  if (variant == WamVariant::simple) {
    squeeze = ConvUnit(s.sub("squeeze"), 256, 1, 3, 1, /*with_bn=*/false, Act::sigmoid, rng);
  } else {
    squeeze = ConvUnit(s.sub("squeeze"), 256, 64, 3, 1, /*with_bn=*/false, Act::sigmoid, rng);
    fc1 = Conv2d(s.sub("fc1"), 64, 16, 1, 1, rng);
    fc2 = Conv2d(s.sub("fc2"), 16, 1, 1, 1, rng);
  }
}

Var Wam::forward(const Var& d, const Var& r, const Var& ds, const Var& rs, bool training) const {
  const Tensor& t = d.value();
  if (forced_gate) return unit_gate(t.n(), *forced_gate);
  for (const Var* v : {&d, &r, &ds, &rs})
    if (v->value().c() != 64)
      throw ShapeError("gate module expects 64-channel inputs, got " + v->value().shape_str());
  if (!d.value().same_shape(r.value()))
    throw ShapeError("gate module modality shapes differ: " + d.value().shape_str() + " vs " +
                     r.value().shape_str());
  Var cat = concat_channels(
      {d, r, resize_bilinear(ds, t.h(), t.w()), resize_bilinear(rs, t.h(), t.w())});
  Var g = global_avg_pool(squeeze.forward(cat, training));
  if (variant == WamVariant::mlp) g = sigmoid(fc2->forward(relu(fc1->forward(g))));
  return g;
}

Mgu::Mgu(const Scope& s, WamVariant variant, bool gating, bool concat, Rng& rng)
    : concat_fusion(concat) {
  sconv_d = ConvUnit(s.sub("sconv_d"), 64, 64, 3, 1, /*with_bn=*/false, Act::sigmoid, rng);
  sconv_r = ConvUnit(s.sub("sconv_r"), 64, 64, 3, 1, /*with_bn=*/false, Act::sigmoid, rng);
  if (gating) {
    wam_a = Wam(s.sub("wam_a"), variant, rng);
    wam_b = Wam(s.sub("wam_b"), variant, rng);
  }
}

MguOutputs Mgu::forward(const Var& d_l, const Var& r_l, const Var& ds, const Var& rs,
                        bool training) const {
  int64_t n = d_l.value().n();
  MguOutputs out;
  out.ga = wam_a ? wam_a->forward(d_l, r_l, ds, rs, training) : unit_gate(n);
  out.gb = wam_b ? wam_b->forward(d_l, r_l, ds, rs, training) : unit_gate(n);
  Var pd = sconv_d.forward(d_l, training);
  Var pr = sconv_r.forward(r_l, training);
  Var a_depth = pd, a_rgb = mul(out.ga, pr);
  Var b_depth = mul(out.gb, pd), b_rgb = pr;
  if (concat_fusion) {
    out.a = concat_channels({a_depth, a_rgb});
    out.b = concat_channels({b_depth, b_rgb});
  } else {
    out.a = add(a_depth, a_rgb);
    out.b = add(b_depth, b_rgb);
  }
  return out;
}

EncoderWam::EncoderWam(const Scope& s, WamVariant variant, Rng& rng)
    : wam_r(s.sub("wam_r"), variant, rng), wam_d(s.sub("wam_d"), variant, rng) {}

std::pair<Var, Var> EncoderWam::forward(const Var& d2, const Var& r2, const Var& ds, const Var& rs,
                                        bool training) const {
  return {wam_r.forward(d2, r2, ds, rs, training), wam_d.forward(d2, r2, ds, rs, training)};
}

Var unit_gate(int64_t n, double value) {
  return Var(Tensor::full(n, 1, 1, 1, value), /*requires_grad=*/false);
}

}  // namespace grnet
