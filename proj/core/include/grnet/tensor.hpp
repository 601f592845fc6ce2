// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <new>
#include <string>
#include <vector>

#include "grnet/common.hpp"

namespace grnet {

/// STL allocator pinning every buffer to one fixed 64-byte alignment.
/// SIMD kernels split their scalar prologue from the vector body based on the
/// runtime pointer, so reduction grouping — and the last bits of the result —
/// would otherwise depend on heap layout rather than on the data alone.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), std::align_val_t{kAlign}));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{kAlign}); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
  template <typename U>
  bool operator!=(const AlignedAllocator<U>&) const noexcept {
    return false;
  }
};

using AlignedVec = std::vector<double, AlignedAllocator<double>>;

/// Dense 4-D array in NCHW layout, double precision.
/// Lower-rank data (masks, gate vectors, scalars) uses size-1 axes.
class Tensor {
 public:
  Tensor() : dims_{0, 0, 0, 0} {}
  Tensor(int64_t n, int64_t c, int64_t h, int64_t w)
      : dims_{n, c, h, w}, data_(static_cast<size_t>(n * c * h * w), 0.0) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1, 1, 1);
    t.data_[0] = v;
    return t;
  }
  static Tensor zeros_like(const Tensor& o) {
    return Tensor(o.n(), o.c(), o.h(), o.w());
  }
  static Tensor full(int64_t n, int64_t c, int64_t h, int64_t w, double v) {
    Tensor t(n, c, h, w);
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  int64_t n() const { return dims_[0]; }
  int64_t c() const { return dims_[1]; }
  int64_t h() const { return dims_[2]; }
  int64_t w() const { return dims_[3]; }
  const std::array<int64_t, 4>& dims() const { return dims_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  AlignedVec& vec() { return data_; }
  const AlignedVec& vec() const { return data_; }

  double& at(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data_[static_cast<size_t>(((n * dims_[1] + c) * dims_[2] + h) * dims_[3] + w)];
  }
  double at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data_[static_cast<size_t>(((n * dims_[1] + c) * dims_[2] + h) * dims_[3] + w)];
  }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  /// Value of a (1,1,1,1) tensor.
  double item() const {
    if (size() != 1) throw ShapeError("item() on tensor of size " + std::to_string(size()));
    return data_[0];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shape_str() const {
    return "(" + std::to_string(dims_[0]) + "," + std::to_string(dims_[1]) + "," +
           std::to_string(dims_[2]) + "," + std::to_string(dims_[3]) + ")";
  }

 private:
  std::array<int64_t, 4> dims_;
  AlignedVec data_;
};

/// 2-D grid of doubles (images, masks, depth planes outside the network).
class Grid {
 public:
  Grid() : h_(0), w_(0) {}
  Grid(int64_t h, int64_t w, double v = 0.0)
      : h_(h), w_(w), data_(static_cast<size_t>(h * w), v) {}

  int64_t h() const { return h_; }
  int64_t w() const { return w_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool same_shape(const Grid& o) const { return h_ == o.h_ && w_ == o.w_; }

  double& at(int64_t y, int64_t x) { return data_[static_cast<size_t>(y * w_ + x)]; }
  double at(int64_t y, int64_t x) const { return data_[static_cast<size_t>(y * w_ + x)]; }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& vec() const { return data_; }
  std::vector<double>& vec() { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  int64_t h_, w_;
  std::vector<double> data_;
};

// Out-of-graph resampling helpers shared by the data pipeline.
Grid resize_bilinear(const Grid& in, int64_t oh, int64_t ow);
Grid resize_nearest(const Grid& in, int64_t oh, int64_t ow);

}  // namespace grnet
