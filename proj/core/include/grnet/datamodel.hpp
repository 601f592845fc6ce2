// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "grnet/config.hpp"
#include "grnet/rng.hpp"
#include "grnet/tensor.hpp"

namespace grnet {

/// One RGB-D training/eval pair. All planes share one size; gt and edge are
/// strictly binary.
struct SamplePair {
  std::array<Grid, 3> rgb;
  Grid depth;
  Grid gt;
  Grid edge;
  std::string id;

  int64_t h() const { return gt.h(); }
  int64_t w() const { return gt.w(); }
  void validate() const;
};

/// Morphological gradient of a binary mask: dilation(band) XOR erosion(band)
/// with a 3x3 cross structuring element applied `band` times.
Grid derive_edge_map(const Grid& gt, int band = 1);

/// Reads <root>/{rgb,depth,gt}/<stem>.* (binary PGM/PPM), lexicographic stem
/// order. resize_to > 0 resizes all planes (bilinear images, nearest masks).
std::vector<SamplePair> load_dataset(const std::filesystem::path& root, int64_t resize_to = 0);

/// Writes samples back to the on-disk layout (rgb/*.ppm, depth/*.pgm, gt/*.pgm).
void save_dataset(const std::filesystem::path& root, const std::vector<SamplePair>& samples);

std::vector<SamplePair> generate_synthetic(const SynthSpec& spec);

/// Seeded horizontal flip (p = 0.5) + random crop to target, resized back to
/// the original size. Masks stay binary via nearest-neighbor resizing.
SamplePair augment(const SamplePair& sample, int64_t target, uint64_t seed);

/// Batch assembly for the network: rgb (n,3,S,S), depth (n,1,S,S),
/// gt/edge (n,1,S,S).
struct Batch {
  Tensor rgb, depth, gt, edge;
  std::vector<std::string> ids;
};
Batch make_batch(const std::vector<SamplePair>& samples, const std::vector<int64_t>& indices);

}  // namespace grnet
