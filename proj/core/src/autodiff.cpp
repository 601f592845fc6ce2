// SPDX-License-Identifier: Apache-2.0
#include "grnet/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <unordered_set>

namespace grnet {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

namespace {

std::shared_ptr<Node> make_node(Tensor value, std::vector<std::shared_ptr<Node>> parents,
                                std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

// Maps an output linear index onto an input index under equal-or-one
// broadcasting.
struct BcastIndex {
  std::array<int64_t, 4> od;
  std::array<int64_t, 4> stride;  // 0 where the input axis is broadcast

  BcastIndex(const std::array<int64_t, 4>& out, const std::array<int64_t, 4>& in) : od(out) {
    int64_t s = 1;
    std::array<int64_t, 4> full{};
    for (int i = 3; i >= 0; --i) {
      full[i] = s;
      s *= in[i];
    }
    for (int i = 0; i < 4; ++i) stride[i] = (in[i] == out[i]) ? full[i] : 0;
  }

  int64_t operator()(int64_t lin) const {
    const int64_t w = lin % od[3];
    lin /= od[3];
    const int64_t h = lin % od[2];
    lin /= od[2];
    const int64_t c = lin % od[1];
    const int64_t n = lin / od[1];
    return n * stride[0] + c * stride[1] + h * stride[2] + w * stride[3];
  }
};

std::array<int64_t, 4> broadcast_dims(const Tensor& a, const Tensor& b, const char* op) {
  std::array<int64_t, 4> out{};
  for (int i = 0; i < 4; ++i) {
    const int64_t da = a.dims()[i], db = b.dims()[i];
    if (da == db) {
      out[i] = da;
    } else if (da == 1 || db == 1) {
      out[i] = std::max(da, db);
    } else {
      throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " vs " +
                       b.shape_str());
    }
  }
  return out;
}

template <class FwdFn, class BwdA, class BwdB>
Var binary_op(const Var& a, const Var& b, const char* name, FwdFn fwd, BwdA da_fn, BwdB db_fn) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const auto od = broadcast_dims(av, bv, name);
  Tensor out(od[0], od[1], od[2], od[3]);

  if (av.dims() == od && bv.dims() == od) {
    const double* pa = av.data();
    const double* pb = bv.data();
    double* po = out.data();
    const int64_t n = out.size();
    for (int64_t i = 0; i < n; ++i) po[i] = fwd(pa[i], pb[i]);
  } else {
    BcastIndex ia(od, av.dims()), ib(od, bv.dims());
    const double* pa = av.data();
    const double* pb = bv.data();
    double* po = out.data();
    const int64_t n = out.size();
    for (int64_t i = 0; i < n; ++i) po[i] = fwd(pa[ia(i)], pb[ib(i)]);
  }

  auto an = a.node();
  auto bn = b.node();
  auto backward = [an, bn, da_fn, db_fn](Node& self) {
    const Tensor& g = self.grad;
    const auto od = self.value.dims();
    BcastIndex ia(od, an->value.dims()), ib(od, bn->value.dims());
    const int64_t n = g.size();
    if (an->requires_grad) {
      Tensor& ga = an->ensure_grad();
      for (int64_t i = 0; i < n; ++i) {
        const int64_t j = ia(i);
        ga[j] += g[i] * da_fn(an->value[j], bn->value[ib(i)]);
      }
    }
    if (bn->requires_grad) {
      Tensor& gb = bn->ensure_grad();
      for (int64_t i = 0; i < n; ++i) {
        const int64_t j = ib(i);
        gb[j] += g[i] * db_fn(an->value[ia(i)], bn->value[j]);
      }
    }
  };
  return Var(make_node(std::move(out), {an, bn}, std::move(backward)));
}

template <class FwdFn, class BwdFn>
Var unary_op(const Var& a, FwdFn fwd, BwdFn dfdx_from_in_out) {
  const Tensor& av = a.value();
  Tensor out = Tensor::zeros_like(av);
  const int64_t n = av.size();
  for (int64_t i = 0; i < n; ++i) out[i] = fwd(av[i]);
  auto an = a.node();
  auto backward = [an, dfdx_from_in_out](Node& self) {
    if (!an->requires_grad) return;
    Tensor& ga = an->ensure_grad();
    const int64_t n = self.grad.size();
    for (int64_t i = 0; i < n; ++i)
      ga[i] += self.grad[i] * dfdx_from_in_out(an->value[i], self.value[i]);
  };
  return Var(make_node(std::move(out), {an}, std::move(backward)));
}

void im2col(const Tensor& x, int64_t n, int kh, int kw, int stride, int pad, int64_t oh,
            int64_t ow, RowMat& col) {
  const int64_t ci = x.c(), H = x.h(), W = x.w();
  const double* base = x.data() + n * ci * H * W;
  for (int64_t c = 0; c < ci; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const int64_t r = (c * kh + ky) * kw + kx;
        double* dst = col.data() + r * oh * ow;
        for (int64_t oy = 0; oy < oh; ++oy) {
          const int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) {
            std::fill(dst + oy * ow, dst + (oy + 1) * ow, 0.0);
            continue;
          }
          const double* src = base + (c * H + iy) * W;
          for (int64_t ox = 0; ox < ow; ++ox) {
            const int64_t ix = ox * stride - pad + kx;
            dst[oy * ow + ox] = (ix >= 0 && ix < W) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_accum(const RowMat& col, int64_t n, int kh, int kw, int stride, int pad, int64_t oh,
                  int64_t ow, Tensor& gx) {
  const int64_t ci = gx.c(), H = gx.h(), W = gx.w();
  double* base = gx.data() + n * ci * H * W;
  for (int64_t c = 0; c < ci; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const int64_t r = (c * kh + ky) * kw + kx;
        const double* src = col.data() + r * oh * ow;
        for (int64_t oy = 0; oy < oh; ++oy) {
          const int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          double* dst = base + (c * H + iy) * W;
          for (int64_t ox = 0; ox < ow; ++ox) {
            const int64_t ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < W) dst[ix] += src[oy * ow + ox];
          }
        }
      }
    }
  }
}

struct ResizeTaps {
  std::vector<int64_t> i0, i1;
  std::vector<double> w0, w1;
};

ResizeTaps bilinear_taps(int64_t in, int64_t out) {
  ResizeTaps t;
  t.i0.resize(out);
  t.i1.resize(out);
  t.w0.resize(out);
  t.w1.resize(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (int64_t o = 0; o < out; ++o) {
    const double s = (o + 0.5) * scale - 0.5;
    double f = std::floor(s);
    double frac = s - f;
    int64_t lo = static_cast<int64_t>(f);
    int64_t hi = lo + 1;
    lo = std::clamp<int64_t>(lo, 0, in - 1);
    hi = std::clamp<int64_t>(hi, 0, in - 1);
    t.i0[o] = lo;
    t.i1[o] = hi;
    t.w0[o] = 1.0 - frac;
    t.w1[o] = frac;
  }
  return t;
}

}  // namespace

void backward(const Var& root) {
  // Iterative post-order DFS for a deterministic topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  Node* r = root.node().get();
  if (!r->requires_grad) return;
  stack.push_back({r, 0});
  visited.insert(r);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }
  Tensor& g = r->ensure_grad();
  g.fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad_ready) n->backward_fn(*n);
  }
}

Var add(const Var& a, const Var& b) {
  return binary_op(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
  return binary_op(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
  return binary_op(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var div(const Var& a, const Var& b) {
  return binary_op(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Var scale(const Var& a, double k) {
  return unary_op(
      a, [k](double x) { return k * x; }, [k](double, double) { return k; });
}

Var add_const(const Var& a, double k) {
  return unary_op(
      a, [k](double x) { return x + k; }, [](double, double) { return 1.0; });
}

Var relu(const Var& a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
  return unary_op(
      a, [](double x) { return sigmoid_s(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var softplus(const Var& a) {
  return unary_op(
      a, [](double x) { return softplus_s(x); },
      [](double x, double) { return sigmoid_s(x); });
}

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  const int64_t N = xv.n(), Ci = xv.c(), H = xv.h(), W = xv.w();
  const int64_t Co = wv.n();
  const int kh = static_cast<int>(wv.h()), kw = static_cast<int>(wv.w());
  if (wv.c() != Ci)
    throw ShapeError("conv2d: input channels " + std::to_string(Ci) + " vs kernel " +
                     std::to_string(wv.c()));
  if (bv.c() != Co) throw ShapeError("conv2d: bias size mismatch");
  const int64_t OH = (H + 2 * pad - kh) / stride + 1;
  const int64_t OW = (W + 2 * pad - kw) / stride + 1;
  if (OH <= 0 || OW <= 0) throw ShapeError("conv2d: output would be empty for input " + xv.shape_str());

  Tensor out(N, Co, OH, OW);
  const int64_t K = Ci * kh * kw;
  RowMat col(K, OH * OW);
  CMapMat Wm(wv.data(), Co, K);
  for (int64_t n = 0; n < N; ++n) {
    im2col(xv, n, kh, kw, stride, pad, OH, OW, col);
    MapMat Om(out.data() + n * Co * OH * OW, Co, OH * OW);
    Om.noalias() = Wm * col;
    for (int64_t c = 0; c < Co; ++c) Om.row(c).array() += bv[c];
  }

  auto xn = x.node();
  auto wn = w.node();
  auto bn = b.node();
  auto backward = [xn, wn, bn, stride, pad, kh, kw, OH, OW](Node& self) {
    const Tensor& xv = xn->value;
    const Tensor& wv = wn->value;
    const int64_t N = xv.n(), Ci = xv.c();
    const int64_t Co = wv.n();
    const int64_t K = Ci * kh * kw;
    CMapMat Wm(wv.data(), Co, K);
    RowMat col(K, OH * OW);
    for (int64_t n = 0; n < N; ++n) {
      CMapMat Gm(self.grad.data() + n * Co * OH * OW, Co, OH * OW);
      if (wn->requires_grad || xn->requires_grad) im2col(xv, n, kh, kw, stride, pad, OH, OW, col);
      if (wn->requires_grad) {
        MapMat dWm(wn->ensure_grad().data(), Co, K);
        dWm.noalias() += Gm * col.transpose();
      }
      if (bn->requires_grad) {
        Tensor& gb = bn->ensure_grad();
        for (int64_t c = 0; c < Co; ++c) gb[c] += Gm.row(c).sum();
      }
      if (xn->requires_grad) {
        RowMat dcol(K, OH * OW);
        dcol.noalias() = Wm.transpose() * Gm;
        col2im_accum(dcol, n, kh, kw, stride, pad, OH, OW, xn->ensure_grad());
      }
    }
  };
  return Var(make_node(std::move(out), {xn, wn, bn}, std::move(backward)));
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, Tensor& running_mean,
               Tensor& running_var, bool training, double momentum, double eps) {
  const Tensor& xv = x.value();
  const int64_t N = xv.n(), C = xv.c(), H = xv.h(), W = xv.w();
  const int64_t M = N * H * W;  // reduction size per channel
  if (gamma.value().c() != C || beta.value().c() != C || running_mean.c() != C ||
      running_var.c() != C)
    throw ShapeError("batch_norm: channel mismatch for input " + xv.shape_str());

  auto mean = std::make_shared<std::vector<double>>(C, 0.0);
  auto invstd = std::make_shared<std::vector<double>>(C, 0.0);

  if (training) {
    for (int64_t c = 0; c < C; ++c) {
      double s = 0.0;
      for (int64_t n = 0; n < N; ++n) {
        const double* p = xv.data() + (n * C + c) * H * W;
        for (int64_t i = 0; i < H * W; ++i) s += p[i];
      }
      const double mu = s / static_cast<double>(M);
      double v = 0.0;
      for (int64_t n = 0; n < N; ++n) {
        const double* p = xv.data() + (n * C + c) * H * W;
        for (int64_t i = 0; i < H * W; ++i) {
          const double d = p[i] - mu;
          v += d * d;
        }
      }
      const double var = v / static_cast<double>(M);
      (*mean)[c] = mu;
      (*invstd)[c] = 1.0 / std::sqrt(var + eps);
      const double unbiased = (M > 1) ? v / static_cast<double>(M - 1) : var;
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mu;
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * unbiased;
    }
  } else {
    for (int64_t c = 0; c < C; ++c) {
      (*mean)[c] = running_mean[c];
      (*invstd)[c] = 1.0 / std::sqrt(running_var[c] + eps);
    }
  }

  Tensor out(N, C, H, W);
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      const double* p = xv.data() + (n * C + c) * H * W;
      double* q = out.data() + (n * C + c) * H * W;
      const double mu = (*mean)[c], is = (*invstd)[c], g = gv[c], b = bv[c];
      for (int64_t i = 0; i < H * W; ++i) q[i] = (p[i] - mu) * is * g + b;
    }
  }

  auto xn = x.node();
  auto gn = gamma.node();
  auto bn = beta.node();
  auto backward = [xn, gn, bn, mean, invstd, training](Node& self) {
    const Tensor& xv = xn->value;
    const int64_t N = xv.n(), C = xv.c(), HW = xv.h() * xv.w();
    const int64_t M = N * HW;
    const Tensor& g = self.grad;
    for (int64_t c = 0; c < C; ++c) {
      const double mu = (*mean)[c], is = (*invstd)[c];
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (int64_t n = 0; n < N; ++n) {
        const double* gp = g.data() + (n * C + c) * HW;
        const double* xp = xv.data() + (n * C + c) * HW;
        for (int64_t i = 0; i < HW; ++i) {
          sum_dy += gp[i];
          sum_dy_xhat += gp[i] * (xp[i] - mu) * is;
        }
      }
      if (gn->requires_grad) gn->ensure_grad()[c] += sum_dy_xhat;
      if (bn->requires_grad) bn->ensure_grad()[c] += sum_dy;
      if (xn->requires_grad) {
        Tensor& gx = xn->ensure_grad();
        const double gam = gn->value[c];
        if (training) {
          const double mdy = sum_dy / static_cast<double>(M);
          const double mdyx = sum_dy_xhat / static_cast<double>(M);
          for (int64_t n = 0; n < N; ++n) {
            const double* gp = g.data() + (n * C + c) * HW;
            const double* xp = xv.data() + (n * C + c) * HW;
            double* op = gx.data() + (n * C + c) * HW;
            for (int64_t i = 0; i < HW; ++i) {
              const double xhat = (xp[i] - mu) * is;
              op[i] += gam * is * (gp[i] - mdy - xhat * mdyx);
            }
          }
        } else {
          for (int64_t n = 0; n < N; ++n) {
            const double* gp = g.data() + (n * C + c) * HW;
            double* op = gx.data() + (n * C + c) * HW;
            for (int64_t i = 0; i < HW; ++i) op[i] += gam * is * gp[i];
          }
        }
      }
    }
  };
  return Var(make_node(std::move(out), {xn, gn, bn}, std::move(backward)));
}

Var max_pool3x3s2(const Var& x) {
  const Tensor& xv = x.value();
  const int64_t N = xv.n(), C = xv.c(), H = xv.h(), W = xv.w();
  const int64_t OH = (H - 1) / 2 + 1, OW = (W - 1) / 2 + 1;
  Tensor out(N, C, OH, OW);
  auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(out.size()));
  int64_t o = 0;
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      const double* p = xv.data() + (n * C + c) * H * W;
      for (int64_t oy = 0; oy < OH; ++oy) {
        for (int64_t ox = 0; ox < OW; ++ox, ++o) {
          double best = -std::numeric_limits<double>::infinity();
          int64_t bi = -1;
          for (int ky = 0; ky < 3; ++ky) {
            const int64_t iy = oy * 2 - 1 + ky;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int64_t ix = ox * 2 - 1 + kx;
              if (ix < 0 || ix >= W) continue;
              const double v = p[iy * W + ix];
              if (v > best) {
                best = v;
                bi = (n * C + c) * H * W + iy * W + ix;
              }
            }
          }
          out[o] = best;
          (*argmax)[static_cast<size_t>(o)] = bi;
        }
      }
    }
  }
  auto xn = x.node();
  auto backward = [xn, argmax](Node& self) {
    if (!xn->requires_grad) return;
    Tensor& gx = xn->ensure_grad();
    const int64_t n = self.grad.size();
    for (int64_t i = 0; i < n; ++i) gx[(*argmax)[static_cast<size_t>(i)]] += self.grad[i];
  };
  return Var(make_node(std::move(out), {xn}, std::move(backward)));
}

Var resize_bilinear(const Var& x, int64_t oh, int64_t ow) {
  const Tensor& xv = x.value();
  const int64_t N = xv.n(), C = xv.c(), H = xv.h(), W = xv.w();
  auto ty = std::make_shared<ResizeTaps>(bilinear_taps(H, oh));
  auto tx = std::make_shared<ResizeTaps>(bilinear_taps(W, ow));
  Tensor out(N, C, oh, ow);
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      const double* p = xv.data() + (n * C + c) * H * W;
      double* q = out.data() + (n * C + c) * oh * ow;
      for (int64_t y = 0; y < oh; ++y) {
        const int64_t y0 = ty->i0[y], y1 = ty->i1[y];
        const double wy0 = ty->w0[y], wy1 = ty->w1[y];
        for (int64_t xo = 0; xo < ow; ++xo) {
          const int64_t x0 = tx->i0[xo], x1 = tx->i1[xo];
          const double wx0 = tx->w0[xo], wx1 = tx->w1[xo];
          q[y * ow + xo] = wy0 * (wx0 * p[y0 * W + x0] + wx1 * p[y0 * W + x1]) +
                           wy1 * (wx0 * p[y1 * W + x0] + wx1 * p[y1 * W + x1]);
        }
      }
    }
  }
  auto xn = x.node();
  auto backward = [xn, ty, tx, oh, ow](Node& self) {
    if (!xn->requires_grad) return;
    const int64_t N = xn->value.n(), C = xn->value.c(), H = xn->value.h(), W = xn->value.w();
    Tensor& gx = xn->ensure_grad();
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t c = 0; c < C; ++c) {
        const double* gp = self.grad.data() + (n * C + c) * oh * ow;
        double* op = gx.data() + (n * C + c) * H * W;
        for (int64_t y = 0; y < oh; ++y) {
          const int64_t y0 = ty->i0[y], y1 = ty->i1[y];
          const double wy0 = ty->w0[y], wy1 = ty->w1[y];
          for (int64_t xo = 0; xo < ow; ++xo) {
            const int64_t x0 = tx->i0[xo], x1 = tx->i1[xo];
            const double g = gp[y * ow + xo];
            op[y0 * W + x0] += wy0 * tx->w0[xo] * g;
            op[y0 * W + x1] += wy0 * tx->w1[xo] * g;
            op[y1 * W + x0] += wy1 * tx->w0[xo] * g;
            op[y1 * W + x1] += wy1 * tx->w1[xo] * g;
          }
        }
      }
    }
  };
  return Var(make_node(std::move(out), {xn}, std::move(backward)));
}

Var global_avg_pool(const Var& x) {
  const Tensor& xv = x.value();
  const int64_t N = xv.n(), C = xv.c(), HW = xv.h() * xv.w();
  Tensor out(N, C, 1, 1);
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      const double* p = xv.data() + (n * C + c) * HW;
      double s = 0.0;
      for (int64_t i = 0; i < HW; ++i) s += p[i];
      out[n * C + c] = s / static_cast<double>(HW);
    }
  }
  auto xn = x.node();
  auto backward = [xn](Node& self) {
    if (!xn->requires_grad) return;
    const int64_t N = xn->value.n(), C = xn->value.c(), HW = xn->value.h() * xn->value.w();
    Tensor& gx = xn->ensure_grad();
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t c = 0; c < C; ++c) {
        const double g = self.grad[n * C + c] / static_cast<double>(HW);
        double* op = gx.data() + (n * C + c) * HW;
        for (int64_t i = 0; i < HW; ++i) op[i] += g;
      }
    }
  };
  return Var(make_node(std::move(out), {xn}, std::move(backward)));
}

Var concat_channels(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeError("concat_channels: empty input list");
  const int64_t N = xs[0].value().n(), H = xs[0].value().h(), W = xs[0].value().w();
  int64_t C = 0;
  for (const auto& v : xs) {
    const Tensor& t = v.value();
    if (t.n() != N || t.h() != H || t.w() != W)
      throw ShapeError("concat_channels: mismatched shapes " + xs[0].value().shape_str() +
                       " vs " + t.shape_str());
    C += t.c();
  }
  Tensor out(N, C, H, W);
  for (int64_t n = 0; n < N; ++n) {
    int64_t co = 0;
    for (const auto& v : xs) {
      const Tensor& t = v.value();
      const int64_t ci = t.c();
      std::copy(t.data() + n * ci * H * W, t.data() + (n + 1) * ci * H * W,
                out.data() + (n * C + co) * H * W);
      co += ci;
    }
  }
  std::vector<std::shared_ptr<Node>> parents;
  parents.reserve(xs.size());
  for (const auto& v : xs) parents.push_back(v.node());
  auto backward = [](Node& self) {
    const int64_t N = self.value.n(), C = self.value.c();
    const int64_t HW = self.value.h() * self.value.w();
    for (int64_t n = 0; n < N; ++n) {
      int64_t co = 0;
      for (auto& p : self.parents) {
        const int64_t ci = p->value.c();
        if (p->requires_grad) {
          Tensor& gp = p->ensure_grad();
          const double* src = self.grad.data() + (n * C + co) * HW;
          double* dst = gp.data() + n * ci * HW;
          for (int64_t i = 0; i < ci * HW; ++i) dst[i] += src[i];
        }
        co += ci;
      }
    }
  };
  return Var(make_node(std::move(out), std::move(parents), std::move(backward)));
}

Var sum_all(const Var& x) {
  const Tensor& xv = x.value();
  double s = 0.0;
  for (int64_t i = 0; i < xv.size(); ++i) s += xv[i];
  auto xn = x.node();
  auto backward = [xn](Node& self) {
    if (!xn->requires_grad) return;
    Tensor& gx = xn->ensure_grad();
    const double g = self.grad[0];
    for (int64_t i = 0; i < gx.size(); ++i) gx[i] += g;
  };
  return Var(make_node(Tensor::scalar(s), {xn}, std::move(backward)));
}

Var sum_per_sample(const Var& x) {
  const Tensor& xv = x.value();
  const int64_t N = xv.n(), CHW = xv.c() * xv.h() * xv.w();
  Tensor out(N, 1, 1, 1);
  for (int64_t n = 0; n < N; ++n) {
    const double* p = xv.data() + n * CHW;
    double s = 0.0;
    for (int64_t i = 0; i < CHW; ++i) s += p[i];
    out[n] = s;
  }
  auto xn = x.node();
  auto backward = [xn](Node& self) {
    if (!xn->requires_grad) return;
    const int64_t N = xn->value.n(), CHW = xn->value.c() * xn->value.h() * xn->value.w();
    Tensor& gx = xn->ensure_grad();
    for (int64_t n = 0; n < N; ++n) {
      const double g = self.grad[n];
      double* p = gx.data() + n * CHW;
      for (int64_t i = 0; i < CHW; ++i) p[i] += g;
    }
  };
  return Var(make_node(std::move(out), {xn}, std::move(backward)));
}

}  // namespace grnet
