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

#include <cmath>
#include <optional>

#include "synthdet/core/math.hpp"
#include "synthdet/render/bvh.hpp"
#include "synthdet/scenegen/scene.hpp"

namespace synthdet::render {

struct PixelPoint {
  double x = 0.0;  // continuous pixel coordinates, (0,0) is the image corner
  double y = 0.0;
  double depth = 0.0;  // distance along the optical axis
};

/// Pinhole camera frame derived from a CameraSpec. The principal point is
/// the image centre; pixels are square.
class PinholeCamera {
 public:
  explicit PinholeCamera(const scene::CameraSpec& spec) : spec_(spec) {
    forward_ = normalized(spec.look_at - spec.position);
    Vec3 up{0, 0, 1};
    if (std::abs(dot(forward_, up)) > 1.0 - 1e-9) up = {0, 1, 0};
    right_ = normalized(cross(forward_, up));
    up_ = cross(right_, forward_);
    tan_half_ = std::tan(spec.vertical_fov / 2);
    aspect_ = static_cast<double>(spec.width) / spec.height;
  }

  int width() const { return spec_.width; }
  int height() const { return spec_.height; }
  Vec3 position() const { return spec_.position; }
  Vec3 forward() const { return forward_; }

  /// Ray through continuous pixel coordinates (px, py); pixel centres sit at
  /// half-integer coordinates.
  Ray ray(double px, double py) const {
    const double sx = (2.0 * px / spec_.width - 1.0) * tan_half_ * aspect_;
    const double sy = (1.0 - 2.0 * py / spec_.height) * tan_half_;
    return {spec_.position, normalized(forward_ + right_ * sx + up_ * sy)};
  }

  /// Projection of a world point; empty when the point is not in front of
  /// the camera.
  std::optional<PixelPoint> project(Vec3 p) const {
    const Vec3 d = p - spec_.position;
    const double z = dot(d, forward_);
    if (z <= 1e-9) return std::nullopt;
    const double x = dot(d, right_) / z, y = dot(d, up_) / z;
    return PixelPoint{(x / (tan_half_ * aspect_) + 1.0) / 2.0 * spec_.width,
                      (1.0 - y / tan_half_) / 2.0 * spec_.height, z};
  }

 private:
  scene::CameraSpec spec_;
  Vec3 forward_, right_, up_;
  double tan_half_ = 1.0;
  double aspect_ = 1.0;
};

}  // namespace synthdet::render
