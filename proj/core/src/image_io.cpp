// SPDX-License-Identifier: Apache-2.0
#include "grnet/image_io.hpp"

#include <cmath>
#include <fstream>

#include "grnet/common.hpp"

namespace grnet {

namespace {

// Reads the next PNM header token, skipping whitespace and # comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int64_t parse_int(const std::string& tok, const std::filesystem::path& path) {
  try {
    size_t pos = 0;
    int64_t v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError("malformed PNM header in " + path.string());
  }
}

uint8_t quantize(double v) {
  double c = std::min(1.0, std::max(0.0, v));
  return static_cast<uint8_t>(std::lround(c * 255.0));
}

}  // namespace

ImageU8 read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic = next_token(in);
  ImageU8 img;
  if (magic == "P5")
    img.channels = 1;
  else if (magic == "P6")
    img.channels = 3;
  else
    throw DataError("unsupported raster format in " + path.string() + " (want binary PGM/PPM)");

  img.w = parse_int(next_token(in), path);
  img.h = parse_int(next_token(in), path);
  int64_t maxval = parse_int(next_token(in), path);
  if (img.w < 1 || img.h < 1) throw DataError("bad raster size in " + path.string());
  if (maxval < 1 || maxval > 255)
    throw DataError("unsupported maxval " + std::to_string(maxval) + " in " + path.string());
  // header ends with exactly one whitespace byte, already consumed by next_token

  size_t bytes = static_cast<size_t>(img.w * img.h * img.channels);
  img.data.resize(bytes);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<size_t>(in.gcount()) != bytes)
    throw DataError("truncated raster data in " + path.string());
  if (maxval != 255) {
    for (auto& b : img.data)
      b = static_cast<uint8_t>(std::lround(255.0 * b / static_cast<double>(maxval)));
  }
  return img;
}

void write_pnm(const std::filesystem::path& path, const ImageU8& img) {
  if (img.channels != 1 && img.channels != 3)
    throw DataError("raster must have 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.w << " " << img.h << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw DataError("short write to " + path.string());
}

ImageU8 gray_to_u8(const Grid& g) {
  ImageU8 img;
  img.h = g.h();
  img.w = g.w();
  img.channels = 1;
  img.data.resize(static_cast<size_t>(g.size()));
  for (int64_t i = 0; i < g.size(); ++i) img.data[static_cast<size_t>(i)] = quantize(g[i]);
  return img;
}

Grid u8_to_gray(const ImageU8& img) {
  Grid g(img.h, img.w);
  for (int64_t y = 0; y < img.h; ++y)
    for (int64_t x = 0; x < img.w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < img.channels; ++c) acc += img.at(y, x, c);
      g.at(y, x) = acc / (img.channels * 255.0);
    }
  return g;
}

ImageU8 rgb_to_u8(const std::array<Grid, 3>& rgb) {
  for (int c = 1; c < 3; ++c)
    if (!rgb[0].same_shape(rgb[static_cast<size_t>(c)]))
      throw ShapeError("color planes differ in size");
  ImageU8 img;
  img.h = rgb[0].h();
  img.w = rgb[0].w();
  img.channels = 3;
  img.data.resize(static_cast<size_t>(img.h * img.w * 3));
  for (int64_t y = 0; y < img.h; ++y)
    for (int64_t x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = quantize(rgb[static_cast<size_t>(c)].at(y, x));
  return img;
}

std::array<Grid, 3> u8_to_rgb(const ImageU8& img) {
  std::array<Grid, 3> rgb{Grid(img.h, img.w), Grid(img.h, img.w), Grid(img.h, img.w)};
  for (int64_t y = 0; y < img.h; ++y)
    for (int64_t x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c)
        rgb[static_cast<size_t>(c)].at(y, x) =
            img.at(y, x, img.channels == 3 ? c : 0) / 255.0;
  return rgb;
}

}  // namespace grnet
