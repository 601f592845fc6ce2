// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "grnet/tensor.hpp"

namespace grnet {

/// 8-bit raster, channel-interleaved rows.
struct ImageU8 {
  int64_t h = 0, w = 0;
  int channels = 1;  // 1 or 3
  std::vector<uint8_t> data;

  uint8_t at(int64_t y, int64_t x, int c) const {
    return data[static_cast<size_t>((y * w + x) * channels + c)];
  }
  uint8_t& at(int64_t y, int64_t x, int c) {
    return data[static_cast<size_t>((y * w + x) * channels + c)];
  }
};

/// Binary PNM (P5 grayscale / P6 color, maxval <= 255).
ImageU8 read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const ImageU8& img);

/// [0,1] grid <-> 8-bit grayscale.
ImageU8 gray_to_u8(const Grid& g);
Grid u8_to_gray(const ImageU8& img);  // channel-averages color input

ImageU8 rgb_to_u8(const std::array<Grid, 3>& rgb);
std::array<Grid, 3> u8_to_rgb(const ImageU8& img);  // replicates grayscale input

}  // namespace grnet
