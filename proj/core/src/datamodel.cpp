// SPDX-License-Identifier: Apache-2.0
#include "grnet/datamodel.hpp"

#include <algorithm>
#include <map>

#include "grnet/image_io.hpp"

namespace fs = std::filesystem;

namespace grnet {

namespace {

void check_binary(const Grid& g, const char* what) {
  for (double v : g.vec())
    if (v != 0.0 && v != 1.0) throw DataError(std::string(what) + " mask must be binary");
}

void check_unit_range(const Grid& g, const char* what) {
  for (double v : g.vec())
    if (!(v >= 0.0 && v <= 1.0)) throw DataError(std::string(what) + " values must lie in [0,1]");
}

// One step of dilation/erosion with the 3x3 cross element.
Grid morph_cross(const Grid& in, bool dilate) {
  static constexpr int dy[5] = {0, -1, 1, 0, 0};
  static constexpr int dx[5] = {0, 0, 0, -1, 1};
  Grid out(in.h(), in.w());
  for (int64_t y = 0; y < in.h(); ++y)
    for (int64_t x = 0; x < in.w(); ++x) {
      bool acc = !dilate;
      for (int k = 0; k < 5; ++k) {
        // replicate borders: keeps the gradient symmetric under mask complement
        int64_t yy = std::clamp<int64_t>(y + dy[k], 0, in.h() - 1);
        int64_t xx = std::clamp<int64_t>(x + dx[k], 0, in.w() - 1);
        bool v = in.at(yy, xx) != 0.0;
        acc = dilate ? (acc || v) : (acc && v);
      }
      out.at(y, x) = acc ? 1.0 : 0.0;
    }
  return out;
}

struct Shape {
  int kind;  // 0 circle, 1 rectangle, 2 triangle
  double cx, cy, rx, ry;

  bool contains(double x, double y) const {
    const double ux = x - cx, uy = y - cy;
    switch (kind) {
      case 0:
        return (ux * ux) / (rx * rx) + (uy * uy) / (ry * ry) <= 1.0;
      case 1:
        return std::abs(ux) <= rx && std::abs(uy) <= ry;
      default: {
        // isosceles triangle, apex up
        if (uy < -ry || uy > ry) return false;
        const double half = rx * (uy + ry) / (2.0 * ry);
        return std::abs(ux) <= half;
      }
    }
  }
};

Shape random_shape(Rng& rng, double size) {
  Shape s;
  s.kind = static_cast<int>(rng.uniform_int(3));
  s.cx = rng.uniform(0.28, 0.72) * size;
  s.cy = rng.uniform(0.28, 0.72) * size;
  s.rx = rng.uniform(0.08, 0.18) * size;
  s.ry = rng.uniform(0.08, 0.18) * size;
  return s;
}

struct Color {
  double r, g, b;
};

// Saturated foreground palette; distractors draw from the same pool so color
// alone cannot separate them from true objects.
Color palette_color(Rng& rng) {
  static constexpr Color pool[6] = {{0.9, 0.15, 0.1}, {0.1, 0.75, 0.2},  {0.15, 0.3, 0.9},
                                    {0.95, 0.8, 0.1}, {0.85, 0.2, 0.75}, {0.1, 0.8, 0.8}};
  return pool[rng.uniform_int(6)];
}

std::map<std::string, fs::path> stems_of(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) throw DataError("dataset is missing directory " + dir.string());
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    out[e.path().stem().string()] = e.path();
  }
  return out;
}

Grid binarize_loaded(const Grid& g) {
  Grid out(g.h(), g.w());
  for (int64_t i = 0; i < g.size(); ++i) out[i] = g[i] > 127.0 / 255.0 ? 1.0 : 0.0;
  return out;
}

Grid crop(const Grid& g, int64_t y0, int64_t x0, int64_t side) {
  Grid out(side, side);
  for (int64_t y = 0; y < side; ++y)
    for (int64_t x = 0; x < side; ++x) out.at(y, x) = g.at(y0 + y, x0 + x);
  return out;
}

Grid hflip(const Grid& g) {
  Grid out(g.h(), g.w());
  for (int64_t y = 0; y < g.h(); ++y)
    for (int64_t x = 0; x < g.w(); ++x) out.at(y, x) = g.at(y, g.w() - 1 - x);
  return out;
}

}  // namespace

void SamplePair::validate() const {
  for (const auto& p : rgb)
    if (!p.same_shape(gt)) throw ShapeError("sample " + id + ": rgb/gt size mismatch");
  if (!depth.same_shape(gt)) throw ShapeError("sample " + id + ": depth/gt size mismatch");
  if (!edge.same_shape(gt)) throw ShapeError("sample " + id + ": edge/gt size mismatch");
  for (const auto& p : rgb) check_unit_range(p, "rgb");
  check_unit_range(depth, "depth");
  check_binary(gt, "gt");
  check_binary(edge, "edge");
}

Grid derive_edge_map(const Grid& gt, int band) {
  if (band < 1) throw ConfigError("edge band must be >= 1");
  Grid dil = gt, ero = gt;
  for (int i = 0; i < band; ++i) {
    dil = morph_cross(dil, true);
    ero = morph_cross(ero, false);
  }
  Grid edge(gt.h(), gt.w());
  for (int64_t i = 0; i < gt.size(); ++i) edge[i] = dil[i] != ero[i] ? 1.0 : 0.0;
  return edge;
}

std::vector<SamplePair> load_dataset(const fs::path& root, int64_t resize_to) {
  auto rgb_files = stems_of(root / "rgb");
  auto depth_files = stems_of(root / "depth");
  auto gt_files = stems_of(root / "gt");

  for (const auto& [stem, p] : rgb_files)
    if (!depth_files.count(stem) || !gt_files.count(stem))
      throw DataError("dataset stem '" + stem + "' lacks a depth or gt counterpart");
  for (const auto& [stem, p] : depth_files)
    if (!rgb_files.count(stem)) throw DataError("dataset stem '" + stem + "' lacks an rgb counterpart");
  for (const auto& [stem, p] : gt_files)
    if (!rgb_files.count(stem)) throw DataError("dataset stem '" + stem + "' lacks an rgb counterpart");

  std::vector<SamplePair> out;
  out.reserve(rgb_files.size());
  for (const auto& [stem, rgb_path] : rgb_files) {  // std::map keeps stems sorted
    SamplePair s;
    s.id = stem;
    s.rgb = u8_to_rgb(read_pnm(rgb_path));
    s.depth = u8_to_gray(read_pnm(depth_files[stem]));
    s.gt = binarize_loaded(u8_to_gray(read_pnm(gt_files[stem])));
    if (!s.depth.same_shape(s.rgb[0]) || !s.gt.same_shape(s.rgb[0]))
      throw DataError("dataset stem '" + stem + "' has mismatched plane sizes");
    if (resize_to > 0) {
      for (auto& p : s.rgb) p = resize_bilinear(p, resize_to, resize_to);
      s.depth = resize_bilinear(s.depth, resize_to, resize_to);
      s.gt = resize_nearest(s.gt, resize_to, resize_to);
    }
    s.edge = derive_edge_map(s.gt);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

void save_dataset(const fs::path& root, const std::vector<SamplePair>& samples) {
  fs::create_directories(root / "rgb");
  fs::create_directories(root / "depth");
  fs::create_directories(root / "gt");
  for (const auto& s : samples) {
    write_pnm(root / "rgb" / (s.id + ".ppm"), rgb_to_u8(s.rgb));
    write_pnm(root / "depth" / (s.id + ".pgm"), gray_to_u8(s.depth));
    write_pnm(root / "gt" / (s.id + ".pgm"), gray_to_u8(s.gt));
  }
}

std::vector<SamplePair> generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const int64_t S = spec.image_size;
  Rng base(spec.seed);
  std::vector<SamplePair> out;
  out.reserve(static_cast<size_t>(spec.n_samples));

  for (int64_t i = 0; i < spec.n_samples; ++i) {
    Rng rng = base.fork(static_cast<uint64_t>(i));
    SamplePair s;
    s.id = "s" + std::string(4 - std::min<size_t>(4, std::to_string(i).size()), '0') +
           std::to_string(i);

    const int64_t n_shapes = 1 + rng.uniform_int(3);
    std::vector<Shape> shapes;
    std::vector<Color> colors;
    std::vector<double> depths;
    for (int64_t k = 0; k < n_shapes; ++k) {
      shapes.push_back(random_shape(rng, static_cast<double>(S)));
      colors.push_back(palette_color(rng));
      depths.push_back(0.15 + 0.1 * static_cast<double>(k) + rng.uniform(0.0, 0.05));
    }

    // Background: smooth two-corner gradient in muted tones.
    Color c0{rng.uniform(0.3, 0.6), rng.uniform(0.3, 0.6), rng.uniform(0.3, 0.6)};
    Color c1{rng.uniform(0.3, 0.6), rng.uniform(0.3, 0.6), rng.uniform(0.3, 0.6)};

    std::vector<Shape> distractors;
    std::vector<Color> distractor_colors;
    if (spec.rgb_mode == RgbMode::cluttered) {
      const int64_t n_d = 2 + rng.uniform_int(3);
      for (int64_t k = 0; k < n_d; ++k) {
        distractors.push_back(random_shape(rng, static_cast<double>(S)));
        distractor_colors.push_back(palette_color(rng));
      }
    }

    for (auto& p : s.rgb) p = Grid(S, S);
    s.depth = Grid(S, S);
    s.gt = Grid(S, S);

    for (int64_t y = 0; y < S; ++y)
      for (int64_t x = 0; x < S; ++x) {
        const double fx = static_cast<double>(x) / static_cast<double>(S - 1);
        const double fy = static_cast<double>(y) / static_cast<double>(S - 1);
        const double t = 0.5 * (fx + fy);
        Color px{c0.r + t * (c1.r - c0.r), c0.g + t * (c1.g - c0.g), c0.b + t * (c1.b - c0.b)};
        double depth_v = 0.85;
        double gt_v = 0.0;

        for (size_t k = 0; k < distractors.size(); ++k)
          if (distractors[k].contains(static_cast<double>(x), static_cast<double>(y)))
            px = distractor_colors[k];
        for (size_t k = 0; k < shapes.size(); ++k)
          if (shapes[k].contains(static_cast<double>(x), static_cast<double>(y))) {
            px = colors[k];
            depth_v = depths[k];
            gt_v = 1.0;
          }

        s.rgb[0].at(y, x) = px.r;
        s.rgb[1].at(y, x) = px.g;
        s.rgb[2].at(y, x) = px.b;
        s.gt.at(y, x) = gt_v;
        s.depth.at(y, x) = depth_v;
      }

    if (spec.depth_mode == DepthMode::flat) {
      s.depth.fill(0.5);
    } else if (spec.depth_mode == DepthMode::noise) {
      Rng drng = rng.fork(0x5eed);
      for (int64_t j = 0; j < s.depth.size(); ++j) s.depth[j] = drng.uniform();
    }

    s.edge = derive_edge_map(s.gt);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

SamplePair augment(const SamplePair& sample, int64_t target, uint64_t seed) {
  const int64_t h = sample.h(), w = sample.w();
  if (target < 1 || target > std::min(h, w))
    throw ConfigError("augment crop " + std::to_string(target) + " exceeds sample size");
  Rng rng(seed);
  const bool flip = rng.bernoulli(0.5);
  const int64_t y0 = rng.uniform_int(h - target + 1);
  const int64_t x0 = rng.uniform_int(w - target + 1);

  SamplePair out;
  out.id = sample.id;
  auto geom = [&](const Grid& g, bool mask) {
    Grid v = flip ? hflip(g) : g;
    v = crop(v, y0, x0, target);
    return mask ? resize_nearest(v, h, w) : resize_bilinear(v, h, w);
  };
  for (int c = 0; c < 3; ++c)
    out.rgb[static_cast<size_t>(c)] = geom(sample.rgb[static_cast<size_t>(c)], false);
  out.depth = geom(sample.depth, false);
  out.gt = geom(sample.gt, true);
  out.edge = geom(sample.edge, true);
  out.validate();
  return out;
}

Batch make_batch(const std::vector<SamplePair>& samples, const std::vector<int64_t>& indices) {
  if (indices.empty()) throw DataError("empty batch");
  const int64_t n = static_cast<int64_t>(indices.size());
  const int64_t h = samples[static_cast<size_t>(indices[0])].h();
  const int64_t w = samples[static_cast<size_t>(indices[0])].w();
  Batch b{Tensor(n, 3, h, w), Tensor(n, 1, h, w), Tensor(n, 1, h, w), Tensor(n, 1, h, w), {}};
  for (int64_t i = 0; i < n; ++i) {
    const SamplePair& s = samples[static_cast<size_t>(indices[static_cast<size_t>(i)])];
    if (s.h() != h || s.w() != w) throw ShapeError("batch mixes sample sizes");
    b.ids.push_back(s.id);
    for (int c = 0; c < 3; ++c)
      for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x)
          b.rgb.at(i, c, y, x) = s.rgb[static_cast<size_t>(c)].at(y, x);
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) {
        b.depth.at(i, 0, y, x) = s.depth.at(y, x);
        b.gt.at(i, 0, y, x) = s.gt.at(y, x);
        b.edge.at(i, 0, y, x) = s.edge.at(y, x);
      }
  }
  return b;
}

}  // namespace grnet
