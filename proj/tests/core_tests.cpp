// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <functional>
#include <vector>

#include "grnet/autodiff.hpp"
#include "grnet/backbone.hpp"
#include "grnet/image_io.hpp"
#include "grnet/rng.hpp"
#include "grnet/tensor.hpp"
#include "test_util.hpp"

using namespace grnet;
using testutil::rel_err;

TEST_SUITE("rng") {
  TEST_CASE("splitmix64 core matches the published vector for seed 0") {
    Rng r(0);
    CHECK(r.next_u64() == 0xE220A8397B1DCDAFull);
  }

  TEST_CASE("identical seeds produce identical streams") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("fork leaves the parent stream untouched") {
    Rng a(99), b(99);
    (void)a.fork(7);
    (void)a.fork(8);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("forks with different salts decorrelate") {
    Rng base(5);
    Rng f1 = base.fork(1), f2 = base.fork(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += f1.next_u64() == f2.next_u64();
    CHECK(same == 0);
  }

  TEST_CASE("uniform stays in [0,1) and spans the interval") {
    Rng r(3);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
  }

  TEST_CASE("bernoulli respects the degenerate probabilities") {
    Rng r(3);
    for (int i = 0; i < 100; ++i) {
      CHECK_FALSE(r.bernoulli(0.0));
      CHECK(r.bernoulli(1.0));
    }
  }
}

TEST_SUITE("tensor") {
  TEST_CASE("NCHW addressing is row-major within channels") {
    Tensor t(2, 3, 4, 5);
    t.at(1, 2, 3, 4) = 7.0;
    CHECK(t[((1 * 3 + 2) * 4 + 3) * 5 + 4] == 7.0);
    CHECK(t.size() == 2 * 3 * 4 * 5);
  }

  TEST_CASE("full and fill broadcast one value") {
    Tensor t = Tensor::full(1, 2, 2, 2, 0.25);
    for (int64_t i = 0; i < t.size(); ++i) CHECK(t[i] == 0.25);
    t.fill(-1.5);
    for (int64_t i = 0; i < t.size(); ++i) CHECK(t[i] == -1.5);
  }

  TEST_CASE("item is restricted to scalars") {
    CHECK(Tensor::scalar(3.5).item() == 3.5);
    CHECK_THROWS_AS((void)Tensor(1, 1, 1, 2).item(), ShapeError);
  }

  TEST_CASE("storage is 64-byte aligned so SIMD grouping is layout-independent") {
    for (int64_t n : {1, 3, 7, 13}) {
      Tensor t(n, 3, 5, 7);
      CHECK(reinterpret_cast<uintptr_t>(t.data()) % 64 == 0);
    }
  }

  TEST_CASE("grid bilinear resize: identity at equal size, constants preserved") {
    Rng rng(1);
    Grid g = testutil::random_prob_grid(6, 9, rng);
    Grid same = resize_bilinear(g, 6, 9);
    for (int64_t i = 0; i < g.size(); ++i) CHECK(same[i] == doctest::Approx(g[i]).epsilon(1e-12));

    Grid c(4, 4, 0.7);
    Grid up = resize_bilinear(c, 11, 5);
    CHECK(up.h() == 11);
    CHECK(up.w() == 5);
    for (int64_t i = 0; i < up.size(); ++i) CHECK(up[i] == doctest::Approx(0.7).epsilon(1e-12));
  }

  TEST_CASE("grid nearest resize keeps masks binary") {
    Rng rng(2);
    Grid m = testutil::random_mask(8, 8, rng);
    Grid r = resize_nearest(m, 13, 5);
    CHECK(r.h() == 13);
    CHECK(r.w() == 5);
    for (int64_t i = 0; i < r.size(); ++i) CHECK((r[i] == 0.0 || r[i] == 1.0));
  }
}

namespace {

/// Checks analytic gradients of sum(random_weights * build()) against central
/// finite differences at `probes` random coordinates of every leaf.
void check_gradients(const std::function<Var()>& build, std::vector<Var> leaves, Rng& rng,
                     int probes = 4, double tol = 1e-5) {
  Var y = build();
  Tensor weights =
      testutil::random_tensor(y.value().n(), y.value().c(), y.value().h(), y.value().w(), rng);
  const Var w_const(weights);

  for (auto& leaf : leaves) leaf.zero_grad();
  Var root = sum_all(mul(y, w_const));
  backward(root);

  auto scalar = [&]() {
    Var y2 = build();
    return sum_all(mul(y2, w_const)).value().item();
  };

  for (auto& leaf : leaves) {
    const Tensor analytic = leaf.grad();  // zeros if the op never touched it
    for (int p = 0; p < probes; ++p) {
      const int64_t i = rng.uniform_int(leaf.value().size());
      const double fd = testutil::central_diff(scalar, &leaf.value()[i]);
      const double an = analytic[i];
      if (std::abs(an) < 1e-9 && std::abs(fd) < 1e-9) continue;
      INFO("coordinate ", i, " analytic ", an, " fd ", fd);
      CHECK(rel_err(an, fd) <= tol);
    }
  }
}

}  // namespace

TEST_SUITE("autodiff") {
  TEST_CASE("pointwise and broadcast op gradients match finite differences") {
    Rng rng(42);
    Var a(testutil::random_tensor(2, 3, 4, 4, rng), true);
    Var b(testutil::random_tensor(2, 3, 4, 4, rng), true);
    Var c(testutil::random_tensor(2, 3, 1, 1, rng, 0.5, 1.5), true);  // broadcast operand

    check_gradients([&] { return add(a, b); }, {a, b}, rng);
    check_gradients([&] { return sub(a, b); }, {a, b}, rng);
    check_gradients([&] { return mul(a, b); }, {a, b}, rng);
    check_gradients([&] { return div(a, c); }, {a, c}, rng);
    check_gradients([&] { return add(a, c); }, {a, c}, rng);
    check_gradients([&] { return mul(a, c); }, {a, c}, rng);
    check_gradients([&] { return scale(a, -2.5); }, {a}, rng);
    check_gradients([&] { return add_const(a, 3.0); }, {a}, rng);
    check_gradients([&] { return sigmoid(a); }, {a}, rng);
    check_gradients([&] { return softplus(a); }, {a}, rng);
    // Keep ReLU probes away from the kink.
    Var shifted(testutil::random_tensor(2, 3, 4, 4, rng, 0.2, 1.0), true);
    check_gradients([&] { return relu(shifted); }, {shifted}, rng);
  }

  TEST_CASE("a value used twice accumulates both gradient paths") {
    Rng rng(7);
    Var a(testutil::random_tensor(1, 2, 3, 3, rng), true);
    check_gradients([&] { return add(mul(a, a), sigmoid(a)); }, {a}, rng);
  }

  TEST_CASE("conv2d gradients match finite differences") {
    Rng rng(11);
    Var x(testutil::random_tensor(2, 3, 6, 6, rng), true);
    Var w(testutil::random_tensor(4, 3, 3, 3, rng, -0.5, 0.5), true);
    Var b(testutil::random_tensor(1, 4, 1, 1, rng, -0.2, 0.2), true);
    check_gradients([&] { return conv2d(x, w, b, 1, 1); }, {x, w, b}, rng);
    check_gradients([&] { return conv2d(x, w, b, 2, 1); }, {x, w, b}, rng);

    Var w1(testutil::random_tensor(2, 3, 1, 1, rng, -0.5, 0.5), true);
    Var b1(testutil::random_tensor(1, 2, 1, 1, rng, -0.2, 0.2), true);
    check_gradients([&] { return conv2d(x, w1, b1, 1, 0); }, {x, w1, b1}, rng);
  }

  TEST_CASE("conv2d is pure: repeated calls give bit-identical outputs") {
    Rng rng(13);
    Var x(testutil::random_tensor(1, 3, 8, 8, rng));
    Var w(testutil::random_tensor(4, 3, 3, 3, rng));
    Var b(testutil::random_tensor(1, 4, 1, 1, rng));
    Var y1 = conv2d(x, w, b, 1, 1);
    Var y2 = conv2d(x, w, b, 1, 1);
    CHECK(testutil::tensors_equal(y1.value(), y2.value()));
  }

  TEST_CASE("batch_norm gradients match finite differences in both modes") {
    Rng rng(17);
    Var x(testutil::random_tensor(3, 2, 4, 4, rng), true);
    Var gamma(testutil::random_tensor(1, 2, 1, 1, rng, 0.5, 1.5), true);
    Var beta(testutil::random_tensor(1, 2, 1, 1, rng, -0.3, 0.3), true);
    Tensor rm = testutil::random_tensor(1, 2, 1, 1, rng, -0.2, 0.2);
    Tensor rv = testutil::random_tensor(1, 2, 1, 1, rng, 0.5, 1.5);

    check_gradients([&] { return batch_norm(x, gamma, beta, rm, rv, false); }, {x, gamma, beta},
                    rng);
    check_gradients([&] { return batch_norm(x, gamma, beta, rm, rv, true); }, {x, gamma, beta},
                    rng, 4, 1e-4);
  }

  TEST_CASE("batch_norm updates running stats only in training mode") {
    Rng rng(19);
    Var x(testutil::random_tensor(2, 2, 3, 3, rng), true);
    Var gamma(Tensor::full(1, 2, 1, 1, 1.0), true);
    Var beta(Tensor(1, 2, 1, 1), true);
    Tensor rm(1, 2, 1, 1), rv = Tensor::full(1, 2, 1, 1, 1.0);
    const Tensor rm0 = rm, rv0 = rv;
    (void)batch_norm(x, gamma, beta, rm, rv, false);
    CHECK(testutil::tensors_equal(rm, rm0));
    CHECK(testutil::tensors_equal(rv, rv0));
    (void)batch_norm(x, gamma, beta, rm, rv, true);
    CHECK_FALSE(testutil::tensors_equal(rm, rm0));
    CHECK_FALSE(testutil::tensors_equal(rv, rv0));
  }

  TEST_CASE("pooling, resizing and reduction gradients match finite differences") {
    Rng rng(23);
    Var x(testutil::random_tensor(2, 2, 6, 6, rng), true);
    check_gradients([&] { return max_pool3x3s2(x); }, {x}, rng);
    check_gradients([&] { return resize_bilinear(x, 9, 11); }, {x}, rng);
    check_gradients([&] { return resize_bilinear(x, 3, 4); }, {x}, rng);
    check_gradients([&] { return global_avg_pool(x); }, {x}, rng);
    check_gradients([&] { return sum_per_sample(x); }, {x}, rng);
  }

  TEST_CASE("concat splits gradients back to its inputs") {
    Rng rng(29);
    Var a(testutil::random_tensor(2, 2, 3, 3, rng), true);
    Var b(testutil::random_tensor(2, 3, 3, 3, rng), true);
    check_gradients([&] { return concat_channels({a, b}); }, {a, b}, rng);
  }

  TEST_CASE("depth replication sums gradient across the three copies") {
    Rng rng(31);
    Var d(testutil::random_tensor(1, 1, 4, 4, rng), true);

    Var rep = depth_to_3ch(d);
    CHECK(rep.value().c() == 3);
    for (int64_t i = 0; i < 16; ++i) {
      CHECK(rep.value()[i] == d.value()[i]);
      CHECK(rep.value()[16 + i] == d.value()[i]);
      CHECK(rep.value()[32 + i] == d.value()[i]);
    }
    check_gradients([&] { return depth_to_3ch(d); }, {d}, rng);
  }
}

TEST_SUITE("image_io") {
  TEST_CASE("grayscale PGM round-trips byte-exactly") {
    testutil::TmpDir tmp;
    Rng rng(5);
    ImageU8 img;
    img.h = 7;
    img.w = 5;
    img.channels = 1;
    img.data.resize(35);
    for (auto& v : img.data) v = static_cast<uint8_t>(rng.uniform_int(256));

    const auto p = tmp.path / "g.pgm";
    write_pnm(p, img);
    ImageU8 back = read_pnm(p);
    CHECK(back.h == img.h);
    CHECK(back.w == img.w);
    CHECK(back.channels == 1);
    CHECK(back.data == img.data);
  }

  TEST_CASE("color PPM round-trips byte-exactly") {
    testutil::TmpDir tmp;
    Rng rng(6);
    ImageU8 img;
    img.h = 4;
    img.w = 6;
    img.channels = 3;
    img.data.resize(4 * 6 * 3);
    for (auto& v : img.data) v = static_cast<uint8_t>(rng.uniform_int(256));

    const auto p = tmp.path / "c.ppm";
    write_pnm(p, img);
    ImageU8 back = read_pnm(p);
    CHECK(back.channels == 3);
    CHECK(back.data == img.data);
  }

  TEST_CASE("header comments and sub-255 maxval are handled") {
    testutil::TmpDir tmp;
    const auto p = tmp.path / "commented.pgm";
    {
      std::ofstream f(p, std::ios::binary);
      f << "P5\n# a comment line\n2 1\n# another\n100\n";
      const unsigned char px[2] = {0, 100};
      f.write(reinterpret_cast<const char*>(px), 2);
    }
    ImageU8 img = read_pnm(p);
    CHECK(img.w == 2);
    CHECK(img.h == 1);
    CHECK(img.data[0] == 0);
    CHECK(img.data[1] == 255);  // rescaled from maxval 100
  }

  TEST_CASE("truncated payload raises a data error") {
    testutil::TmpDir tmp;
    const auto p = tmp.path / "short.pgm";
    {
      std::ofstream f(p, std::ios::binary);
      f << "P5\n4 4\n255\n";
      f << "ab";  // 2 of 16 bytes
    }
    CHECK_THROWS_AS((void)read_pnm(p), DataError);
  }

  TEST_CASE("grid conversion quantizes and channel-averages") {
    Grid g(1, 3);
    g[0] = 0.0;
    g[1] = 0.5;
    g[2] = 1.0;
    ImageU8 u = gray_to_u8(g);
    CHECK(u.data[0] == 0);
    CHECK(u.data[1] == 128);  // round(0.5 * 255)
    CHECK(u.data[2] == 255);

    ImageU8 color;
    color.h = 1;
    color.w = 1;
    color.channels = 3;
    color.data = {10, 20, 30};
    Grid back = u8_to_gray(color);
    CHECK(back[0] == doctest::Approx(20.0 / 255.0).epsilon(1e-12));
  }
}
