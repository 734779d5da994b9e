#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mfdepth {

/// Dense row-major H x W grid of scalars. (0,0) is the top-left pixel.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(height) * width, fill) {
    if (height <= 0 || width <= 0)
      throw std::invalid_argument("Grid: dimensions must be positive");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int y, int x) {
    assert(contains(y, x));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int y, int x) const {
    assert(contains(y, x));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  bool contains(int y, int x) const {
    return y >= 0 && y < height_ && x >= 0 && x < width_;
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using GridF = Grid<float>;
using GridB = Grid<unsigned char>;
using GridI = Grid<int>;

/// H x W x 3 image with intensities in [0,1], row-major, channel-innermost.
class Image {
 public:
  Image() = default;
  Image(int height, int width, float fill = 0.0f)
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(height) * width * 3, fill) {
    if (height <= 0 || width <= 0)
      throw std::invalid_argument("Image: dimensions must be positive");
  }

  int height() const { return height_; }
  int width() const { return width_; }

  float& at(int y, int x, int c) {
    assert(y >= 0 && y < height_ && x >= 0 && x < width_ && c >= 0 && c < 3);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }
  float at(int y, int x, int c) const {
    assert(y >= 0 && y < height_ && x >= 0 && x < width_ && c >= 0 && c < 3);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }

  float gray(int y, int x) const {
    return (at(y, x, 0) + at(y, x, 1) + at(y, x, 2)) / 3.0f;
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Bilinear sample of a scalar grid at continuous (x, y). The sample is
/// defined on [0, W-1] x [0, H-1]; the caller checks bounds.
template <typename T>
inline double bilinear(const Grid<T>& g, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = g(y0, x0), v01 = g(y0, x1);
  const double v10 = g(y1, x0), v11 = g(y1, x1);
  return (1 - fy) * ((1 - fx) * v00 + fx * v01) +
         fy * ((1 - fx) * v10 + fx * v11);
}

inline bool sampleable(int height, int width, double x, double y) {
  return x >= 0.0 && x <= width - 1.0 && y >= 0.0 && y <= height - 1.0;
}

}  // namespace mfdepth
