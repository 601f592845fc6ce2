// SPDX-License-Identifier: Apache-2.0
#include "grnet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace grnet {

Grid resize_bilinear(const Grid& in, int64_t oh, int64_t ow) {
  if (in.h() == oh && in.w() == ow) return in;
  Grid out(oh, ow);
  const double sy = static_cast<double>(in.h()) / static_cast<double>(oh);
  const double sx = static_cast<double>(in.w()) / static_cast<double>(ow);
  for (int64_t y = 0; y < oh; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    int64_t y0 = static_cast<int64_t>(std::floor(fy));
    const double wy = fy - std::floor(fy);
    int64_t y1 = std::clamp<int64_t>(y0 + 1, 0, in.h() - 1);
    y0 = std::clamp<int64_t>(y0, 0, in.h() - 1);
    for (int64_t x = 0; x < ow; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      int64_t x0 = static_cast<int64_t>(std::floor(fx));
      const double wx = fx - std::floor(fx);
      int64_t x1 = std::clamp<int64_t>(x0 + 1, 0, in.w() - 1);
      x0 = std::clamp<int64_t>(x0, 0, in.w() - 1);
      out.at(y, x) = (1.0 - wy) * ((1.0 - wx) * in.at(y0, x0) + wx * in.at(y0, x1)) +
                     wy * ((1.0 - wx) * in.at(y1, x0) + wx * in.at(y1, x1));
    }
  }
  return out;
}

Grid resize_nearest(const Grid& in, int64_t oh, int64_t ow) {
  if (in.h() == oh && in.w() == ow) return in;
  Grid out(oh, ow);
  const double sy = static_cast<double>(in.h()) / static_cast<double>(oh);
  const double sx = static_cast<double>(in.w()) / static_cast<double>(ow);
  for (int64_t y = 0; y < oh; ++y) {
    const int64_t iy = std::min<int64_t>(static_cast<int64_t>((y + 0.5) * sy), in.h() - 1);
    for (int64_t x = 0; x < ow; ++x) {
      const int64_t ix = std::min<int64_t>(static_cast<int64_t>((x + 0.5) * sx), in.w() - 1);
      out.at(y, x) = in.at(iy, ix);
    }
  }
  return out;
}

}  // namespace grnet
