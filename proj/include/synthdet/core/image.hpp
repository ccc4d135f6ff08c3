// Copyright 2026 The synthdet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "synthdet/core/error.hpp"
#include "synthdet/core/math.hpp"

namespace synthdet {

/// Row-major single-channel raster.
template <typename T>
class Map {
 public:
  Map() = default;
  Map(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 0 || height < 0) throw ConfigError("negative map dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  friend bool operator==(const Map&, const Map&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using InstanceMap = Map<std::uint16_t>;
using DepthMap = Map<float>;

/// Three-channel float image, interleaved RGB, nominal range [0, 1].
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, float fill = 0.0f)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height * kChannels, fill) {
    if (width < 0 || height < 0) throw ConfigError("negative image dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  float& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  float at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  Vec3 rgb(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }
  void set_rgb(int x, int y, Vec3 v) {
    at(x, y, 0) = static_cast<float>(v.x);
    at(x, y, 1) = static_cast<float>(v.y);
    at(x, y, 2) = static_cast<float>(v.z);
  }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  void clamp() {
    for (float& v : data_) v = std::clamp(v, 0.0f, 1.0f);
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Rec. 709 luma of a linear RGB triple.
inline double luminance(Vec3 c) { return 0.2126 * c.x + 0.7152 * c.y + 0.0722 * c.z; }

/// Bilinear lookup at continuous pixel coordinates (pixel centers at +0.5
/// offsets already removed, i.e. (0,0) is the center of the first pixel).
/// Coordinates are clamped to the border.
inline Vec3 sample_bilinear(const Image& img, double x, double y) {
  const int w = img.width(), h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
    const double bot = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
    out[c] = top * (1.0 - fy) + bot * fy;
  }
  return out;
}

/// Resamples to the requested size: box filter when shrinking an axis,
/// bilinear otherwise.
inline Image resize(const Image& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  if (src.empty()) throw ConfigError("cannot resize an empty image");
  Image out(width, height);
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Vec3 v;
      if (sx > 1.0 || sy > 1.0) {
        const int x0 = static_cast<int>(std::floor(x * sx));
        const int x1 = std::max(x0 + 1, static_cast<int>(std::floor((x + 1) * sx)));
        const int y0 = static_cast<int>(std::floor(y * sy));
        const int y1 = std::max(y0 + 1, static_cast<int>(std::floor((y + 1) * sy)));
        int n = 0;
        for (int yy = y0; yy < std::min(y1, src.height()); ++yy)
          for (int xx = x0; xx < std::min(x1, src.width()); ++xx, ++n) v += src.rgb(xx, yy);
        v = n > 0 ? v / n : src.rgb(std::min(x0, src.width() - 1), std::min(y0, src.height() - 1));
      } else {
        v = sample_bilinear(src, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
      }
      out.set_rgb(x, y, v);
    }
  }
  return out;
}

/// Mean absolute per-value difference of two equally sized images.
inline double mean_abs_diff(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw ConfigError("mean_abs_diff: size mismatch");
  double s = 0.0;
  const auto va = a.values(), vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) s += std::abs(static_cast<double>(va[i]) - vb[i]);
  return va.empty() ? 0.0 : s / static_cast<double>(va.size());
}

}  // namespace synthdet
