// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "grnet/datamodel.hpp"
#include "grnet/image_io.hpp"
#include "test_util.hpp"

using namespace grnet;

namespace {

bool grids_equal(const Grid& a, const Grid& b) {
  if (!a.same_shape(b)) return false;
  for (int64_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

bool samples_equal(const SamplePair& a, const SamplePair& b) {
  return a.id == b.id && grids_equal(a.rgb[0], b.rgb[0]) && grids_equal(a.rgb[1], b.rgb[1]) &&
         grids_equal(a.rgb[2], b.rgb[2]) && grids_equal(a.depth, b.depth) &&
         grids_equal(a.gt, b.gt) && grids_equal(a.edge, b.edge);
}

/// Brute-force morphological gradient: a pixel is edge iff its 3x3 cross
/// neighborhood (replicated borders) contains both values after `band`
/// growth steps. Re-derived here as the oracle for the fast implementation.
Grid edge_oracle(const Grid& gt, int band) {
  auto probe = [&](const Grid& g, int64_t y, int64_t x, bool want_max) {
    static constexpr int dy[5] = {0, -1, 1, 0, 0};
    static constexpr int dx[5] = {0, 0, 0, -1, 1};
    bool acc = !want_max;
    for (int k = 0; k < 5; ++k) {
      const int64_t yy = std::clamp<int64_t>(y + dy[k], 0, g.h() - 1);
      const int64_t xx = std::clamp<int64_t>(x + dx[k], 0, g.w() - 1);
      const bool v = g.at(yy, xx) != 0.0;
      acc = want_max ? (acc || v) : (acc && v);
    }
    return acc;
  };
  Grid dil = gt, ero = gt;
  for (int step = 0; step < band; ++step) {
    Grid d2(gt.h(), gt.w()), e2(gt.h(), gt.w());
    for (int64_t y = 0; y < gt.h(); ++y)
      for (int64_t x = 0; x < gt.w(); ++x) {
        d2.at(y, x) = probe(dil, y, x, true) ? 1.0 : 0.0;
        e2.at(y, x) = probe(ero, y, x, false) ? 1.0 : 0.0;
      }
    dil = d2;
    ero = e2;
  }
  Grid out(gt.h(), gt.w());
  for (int64_t i = 0; i < gt.size(); ++i) out[i] = dil[i] != ero[i] ? 1.0 : 0.0;
  return out;
}

/// Marker centroid of all pixels above 0.5.
std::pair<double, double> centroid(const Grid& g) {
  double sy = 0.0, sx = 0.0, n = 0.0;
  for (int64_t y = 0; y < g.h(); ++y)
    for (int64_t x = 0; x < g.w(); ++x)
      if (g.at(y, x) > 0.5) {
        sy += static_cast<double>(y);
        sx += static_cast<double>(x);
        n += 1.0;
      }
  return {sy / n, sx / n};
}

}  // namespace

TEST_SUITE("edge_map") {
  TEST_CASE("an all-background mask has no edge") {
    Grid z(8, 8);
    Grid e = derive_edge_map(z);
    for (int64_t i = 0; i < e.size(); ++i) CHECK(e[i] == 0.0);
  }

  TEST_CASE("a single interior pixel marks itself plus its 4-neighborhood") {
    Grid g(7, 7);
    g.at(3, 3) = 1.0;
    Grid e = derive_edge_map(g);
    int64_t count = 0;
    for (int64_t i = 0; i < e.size(); ++i) count += e[i] > 0.5;
    CHECK(count == 5);
    CHECK(e.at(3, 3) == 1.0);
    CHECK(e.at(2, 3) == 1.0);
    CHECK(e.at(4, 3) == 1.0);
    CHECK(e.at(3, 2) == 1.0);
    CHECK(e.at(3, 4) == 1.0);
  }

  TEST_CASE("centered square ring matches the per-pixel neighborhood oracle") {
    Grid g(6, 6);
    for (int64_t y = 1; y <= 4; ++y)
      for (int64_t x = 1; x <= 4; ++x) g.at(y, x) = 1.0;
    CHECK(grids_equal(derive_edge_map(g, 1), edge_oracle(g, 1)));
    CHECK(grids_equal(derive_edge_map(g, 2), edge_oracle(g, 2)));
  }

  TEST_CASE("random masks match the oracle and are complement-symmetric") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
      const int64_t h = 3 + rng.uniform_int(8), w = 3 + rng.uniform_int(8);
      Grid g = testutil::random_mask(h, w, rng, 0.35, 0, 0);
      Grid e = derive_edge_map(g);
      CHECK(grids_equal(e, edge_oracle(g, 1)));

      Grid inv(h, w);
      for (int64_t i = 0; i < g.size(); ++i) inv[i] = 1.0 - g[i];
      CHECK(grids_equal(e, derive_edge_map(inv)));
    }
  }
}

TEST_SUITE("dataset_io") {
  TEST_CASE("complete stems load in lexicographic order") {
    testutil::TmpDir tmp;
    SynthSpec spec;
    spec.n_samples = 2;
    spec.image_size = 32;
    spec.seed = 4;
    auto samples = generate_synthetic(spec);
    samples[0].id = "b";
    samples[1].id = "a";
    save_dataset(tmp.path, samples);

    auto loaded = load_dataset(tmp.path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "a");
    CHECK(loaded[1].id == "b");
  }

  TEST_CASE("an orphaned stem is reported by name") {
    testutil::TmpDir tmp;
    SynthSpec spec;
    spec.n_samples = 1;
    spec.image_size = 32;
    auto samples = generate_synthetic(spec);
    samples[0].id = "a";
    save_dataset(tmp.path, samples);
    std::filesystem::remove(tmp.path / "gt" / "a.pgm");

    CHECK_THROWS_WITH_AS((void)load_dataset(tmp.path),
                         doctest::Contains("'a'"), DataError);
  }

  TEST_CASE("an empty dataset directory loads as an empty sequence") {
    testutil::TmpDir tmp;
    std::filesystem::create_directories(tmp.path / "rgb");
    std::filesystem::create_directories(tmp.path / "depth");
    std::filesystem::create_directories(tmp.path / "gt");
    CHECK(load_dataset(tmp.path).empty());
  }

  TEST_CASE("save/load round-trip preserves masks exactly and images to 8-bit") {
    testutil::TmpDir tmp;
    SynthSpec spec;
    spec.n_samples = 3;
    spec.image_size = 32;
    spec.seed = 9;
    auto samples = generate_synthetic(spec);
    save_dataset(tmp.path, samples);
    auto loaded = load_dataset(tmp.path);
    REQUIRE(loaded.size() == 3);
    for (size_t i = 0; i < loaded.size(); ++i) {
      CHECK(loaded[i].id == samples[i].id);
      CHECK(grids_equal(loaded[i].gt, samples[i].gt));
      CHECK(grids_equal(loaded[i].edge, samples[i].edge));
      double max_d = 0.0;
      for (int64_t j = 0; j < loaded[i].depth.size(); ++j)
        max_d = std::max(max_d, std::abs(loaded[i].depth[j] - samples[i].depth[j]));
      for (int c = 0; c < 3; ++c)
        for (int64_t j = 0; j < loaded[i].rgb[0].size(); ++j)
          max_d = std::max(max_d, std::abs(loaded[i].rgb[static_cast<size_t>(c)][j] -
                                           samples[i].rgb[static_cast<size_t>(c)][j]));
      CHECK(max_d <= 0.5 / 255.0 + 1e-12);
    }
  }

  TEST_CASE("loading with a resize target rescales all planes and rebinarizes") {
    testutil::TmpDir tmp;
    SynthSpec spec;
    spec.n_samples = 1;
    spec.image_size = 64;
    spec.seed = 10;
    save_dataset(tmp.path, generate_synthetic(spec));
    auto loaded = load_dataset(tmp.path, 32);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].h() == 32);
    CHECK(loaded[0].w() == 32);
    CHECK(loaded[0].rgb[0].h() == 32);
    CHECK(loaded[0].depth.w() == 32);
    for (int64_t i = 0; i < loaded[0].gt.size(); ++i)
      CHECK((loaded[0].gt[i] == 0.0 || loaded[0].gt[i] == 1.0));
  }

  TEST_CASE("sample validation rejects non-binary masks and size mismatches") {
    SynthSpec spec;
    spec.n_samples = 1;
    spec.image_size = 32;
    auto samples = generate_synthetic(spec);
    SamplePair bad = samples[0];
    bad.gt.at(0, 0) = 0.5;
    CHECK_THROWS_AS(bad.validate(), DataError);

    SamplePair mismat = samples[0];
    mismat.depth = Grid(16, 16);
    CHECK_THROWS_AS(mismat.validate(), ShapeError);
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("generation is a pure function of its recipe") {
    SynthSpec spec;
    spec.n_samples = 4;
    spec.image_size = 32;
    spec.seed = 7;
    spec.rgb_mode = RgbMode::cluttered;
    auto a = generate_synthetic(spec);
    auto b = generate_synthetic(spec);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(samples_equal(a[i], b[i]));
  }

  TEST_CASE("ids are zero-padded sequence numbers") {
    SynthSpec spec;
    spec.n_samples = 2;
    spec.image_size = 32;
    auto s = generate_synthetic(spec);
    CHECK(s[0].id == "s0000");
    CHECK(s[1].id == "s0001");
  }

  TEST_CASE("flat depth mode yields constant depth planes") {
    SynthSpec spec;
    spec.n_samples = 3;
    spec.image_size = 32;
    spec.depth_mode = DepthMode::flat;
    for (const auto& s : generate_synthetic(spec))
      for (int64_t i = 0; i < s.depth.size(); ++i) CHECK(s.depth[i] == 0.5);
  }

  TEST_CASE("faithful depth correlates with the mask, noise depth does not") {
    SynthSpec spec;
    spec.n_samples = 32;
    spec.image_size = 32;
    spec.seed = 3;
    spec.depth_mode = DepthMode::faithful;
    auto faithful = generate_synthetic(spec);
    spec.depth_mode = DepthMode::noise;
    auto noise = generate_synthetic(spec);

    auto mean_abs_r = [](const std::vector<SamplePair>& set) {
      double acc = 0.0;
      for (const auto& s : set) {
        std::vector<double> d(s.depth.vec().begin(), s.depth.vec().end());
        std::vector<double> g(s.gt.vec().begin(), s.gt.vec().end());
        acc += std::abs(testutil::pearson(d, g));
      }
      return acc / static_cast<double>(set.size());
    };
    const double r_faithful = mean_abs_r(faithful);
    const double r_noise = mean_abs_r(noise);
    INFO("faithful ", r_faithful, " noise ", r_noise);
    CHECK(r_faithful > r_noise);
    CHECK(r_faithful > 0.5);
    CHECK(r_noise < 0.2);
  }

  TEST_CASE("clutter perturbs only the color planes") {
    SynthSpec spec;
    spec.n_samples = 6;
    spec.image_size = 32;
    spec.seed = 12;
    auto clean = generate_synthetic(spec);
    spec.rgb_mode = RgbMode::cluttered;
    auto cluttered = generate_synthetic(spec);

    bool any_rgb_diff = false;
    for (size_t i = 0; i < clean.size(); ++i) {
      CHECK(grids_equal(clean[i].gt, cluttered[i].gt));
      CHECK(grids_equal(clean[i].depth, cluttered[i].depth));
      any_rgb_diff = any_rgb_diff || !grids_equal(clean[i].rgb[0], cluttered[i].rgb[0]);
    }
    CHECK(any_rgb_diff);
  }

  TEST_CASE("every generated sample passes validation with a nonempty object") {
    SynthSpec spec;
    spec.n_samples = 16;
    spec.image_size = 32;
    spec.seed = 21;
    for (const auto& s : generate_synthetic(spec)) {
      s.validate();
      double fg = 0.0;
      for (int64_t i = 0; i < s.gt.size(); ++i) fg += s.gt[i];
      CHECK(fg > 0.0);
      CHECK(fg < static_cast<double>(s.gt.size()));
    }
  }
}

TEST_SUITE("augment") {
  TEST_CASE("full-size crops are the identity or an exact mirror, and both occur") {
    SynthSpec spec;
    spec.n_samples = 1;
    spec.image_size = 32;
    spec.seed = 2;
    SamplePair s = generate_synthetic(spec)[0];

    int identities = 0, mirrors = 0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
      SamplePair out = augment(s, 32, seed);
      bool is_identity = true, is_mirror = true;
      for (int64_t y = 0; y < 32; ++y)
        for (int64_t x = 0; x < 32; ++x) {
          for (int c = 0; c < 3; ++c) {
            const auto& p = s.rgb[static_cast<size_t>(c)];
            const auto& q = out.rgb[static_cast<size_t>(c)];
            is_identity = is_identity && q.at(y, x) == p.at(y, x);
            is_mirror = is_mirror && q.at(y, x) == p.at(y, 31 - x);
          }
          is_identity = is_identity && out.gt.at(y, x) == s.gt.at(y, x);
          is_mirror = is_mirror && out.gt.at(y, x) == s.gt.at(y, 31 - x);
        }
      CHECK((is_identity || is_mirror));
      identities += is_identity;
      mirrors += is_mirror;
    }
    CHECK(identities > 0);
    CHECK(mirrors > 0);
  }

  TEST_CASE("masks stay strictly binary through crop and resize") {
    SynthSpec spec;
    spec.n_samples = 2;
    spec.image_size = 32;
    spec.seed = 6;
    for (const auto& s : generate_synthetic(spec))
      for (uint64_t seed = 0; seed < 5; ++seed) {
        SamplePair out = augment(s, 24, seed);
        for (int64_t i = 0; i < out.gt.size(); ++i)
          CHECK((out.gt[i] == 0.0 || out.gt[i] == 1.0));
        for (int64_t i = 0; i < out.edge.size(); ++i)
          CHECK((out.edge[i] == 0.0 || out.edge[i] == 1.0));
      }
  }

  TEST_CASE("one geometric transform moves every plane identically") {
    // A block marker shared by all planes must land on the same spot.
    SamplePair s;
    s.id = "marker";
    for (auto& p : s.rgb) p = Grid(64, 64, 0.0);
    s.depth = Grid(64, 64, 0.0);
    s.gt = Grid(64, 64, 0.0);
    for (int64_t y = 20; y < 32; ++y)
      for (int64_t x = 36; x < 48; ++x) {
        for (auto& p : s.rgb) p.at(y, x) = 1.0;
        s.depth.at(y, x) = 1.0;
        s.gt.at(y, x) = 1.0;
      }
    s.edge = derive_edge_map(s.gt);
    s.validate();

    for (uint64_t seed = 0; seed < 6; ++seed) {
      SamplePair out = augment(s, 48, seed);
      const auto [gy, gx] = centroid(out.gt);
      const auto [ry, rx] = centroid(out.rgb[0]);
      const auto [dy, dx] = centroid(out.depth);
      const auto [ey, ex] = centroid(out.edge);
      CHECK(std::abs(gy - ry) < 1.5);
      CHECK(std::abs(gx - rx) < 1.5);
      CHECK(std::abs(gy - dy) < 1.5);
      CHECK(std::abs(gx - dx) < 1.5);
      CHECK(std::abs(gy - ey) < 1.5);
      CHECK(std::abs(gx - ex) < 1.5);
    }
  }

  TEST_CASE("oversized crop targets are rejected") {
    SynthSpec spec;
    spec.n_samples = 1;
    spec.image_size = 32;
    SamplePair s = generate_synthetic(spec)[0];
    CHECK_THROWS_AS((void)augment(s, 33, 0), ConfigError);
    CHECK_THROWS_AS((void)augment(s, 0, 0), ConfigError);
  }
}

TEST_SUITE("batching") {
  TEST_CASE("batch assembly stacks planes in NCHW order") {
    SynthSpec spec;
    spec.n_samples = 3;
    spec.image_size = 32;
    spec.seed = 5;
    auto samples = generate_synthetic(spec);
    Batch b = make_batch(samples, {2, 0});
    CHECK(b.rgb.n() == 2);
    CHECK(b.rgb.c() == 3);
    CHECK(b.rgb.h() == 32);
    CHECK(b.depth.c() == 1);
    CHECK(b.gt.c() == 1);
    CHECK(b.ids == std::vector<std::string>{"s0002", "s0000"});
    CHECK(b.rgb.at(0, 1, 4, 7) == samples[2].rgb[1].at(4, 7));
    CHECK(b.rgb.at(1, 0, 9, 3) == samples[0].rgb[0].at(9, 3));
    CHECK(b.depth.at(0, 0, 5, 5) == samples[2].depth.at(5, 5));
    CHECK(b.gt.at(1, 0, 8, 8) == samples[0].gt.at(8, 8));
    CHECK(b.edge.at(1, 0, 8, 8) == samples[0].edge.at(8, 8));
  }
}
