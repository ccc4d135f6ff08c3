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
#include <cstdint>
#include <optional>

#include "synthdet/core/image.hpp"

namespace synthdet {

/// Axis-aligned box in pixel units, COCO convention: (x, y) is the top-left
/// corner, w and h are extents.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  static BBox from_corners(double x0, double y0, double x1, double y1) {
    return {x0, y0, x1 - x0, y1 - y0};
  }

  /// Clips to [0, width] x [0, height]; extents never go negative.
  BBox clipped(double width, double height) const {
    const double x0 = std::clamp(x, 0.0, width), x1 = std::clamp(right(), 0.0, width);
    const double y0 = std::clamp(y, 0.0, height), y1 = std::clamp(bottom(), 0.0, height);
    return from_corners(x0, y0, std::max(x0, x1), std::max(y0, y1));
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Tight pixel extent of every pixel labelled `id`: x = min column,
/// w = max column - min column + 1. Also returns the pixel count.
struct MaskExtent {
  BBox box;
  std::int64_t pixel_count = 0;
};

inline std::optional<MaskExtent> mask_extent(const InstanceMap& map, std::uint16_t id) {
  int x0 = map.width(), y0 = map.height(), x1 = -1, y1 = -1;
  std::int64_t n = 0;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (map.at(x, y) != id) continue;
      ++n;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (n == 0) return std::nullopt;
  return MaskExtent{BBox{static_cast<double>(x0), static_cast<double>(y0),
                         static_cast<double>(x1 - x0 + 1), static_cast<double>(y1 - y0 + 1)},
                    n};
}

}  // namespace synthdet
