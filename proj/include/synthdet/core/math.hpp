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
#include <cmath>
#include <limits>
#include <numbers>

namespace synthdet {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  Vec3& operator+=(Vec3 b) {
    x += b.x;
    y += b.y;
    z += b.z;
    return *this;
  }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

/// Component-wise (Hadamard) product.
constexpr Vec3 hadamard(Vec3 a, Vec3 b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  return n > 0.0 ? a / n : a;
}
inline Vec3 clamp01(Vec3 a) {
  return {std::clamp(a.x, 0.0, 1.0), std::clamp(a.y, 0.0, 1.0), std::clamp(a.z, 0.0, 1.0)};
}
inline Vec3 vmin(Vec3 a, Vec3 b) { return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)}; }
inline Vec3 vmax(Vec3 a, Vec3 b) { return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}; }

/// Unit quaternion (w, x, y, z) representing a rotation.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr bool operator==(Quat, Quat) = default;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  static Quat axis_angle(Vec3 axis, double angle) {
    const Vec3 a = normalized(axis);
    const double s = std::sin(angle / 2.0);
    return {std::cos(angle / 2.0), a.x * s, a.y * s, a.z * s};
  }

  Quat conjugate() const { return {w, -x, -y, -z}; }

  friend Quat operator*(Quat a, Quat b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }

  Vec3 rotate(Vec3 v) const {
    // v' = v + 2w(q x v) + 2 q x (q x v)
    const Vec3 q{x, y, z};
    const Vec3 t = 2.0 * cross(q, v);
    return v + w * t + cross(q, t);
  }
};

/// Rigid transform applied as R*p + t.
struct Pose3 {
  Vec3 position;
  Quat orientation;

  Vec3 apply(Vec3 p) const { return orientation.rotate(p) + position; }
  Vec3 apply_inverse(Vec3 p) const { return orientation.conjugate().rotate(p - position); }
  Vec3 rotate(Vec3 v) const { return orientation.rotate(v); }
  Vec3 rotate_inverse(Vec3 v) const { return orientation.conjugate().rotate(v); }
};

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }
  void extend(Vec3 p) {
    lo = vmin(lo, p);
    hi = vmax(hi, p);
  }
  void extend(const Aabb& b) {
    lo = vmin(lo, b.lo);
    hi = vmax(hi, b.hi);
  }
  Vec3 center() const { return (lo + hi) * 0.5; }
  Vec3 extent() const { return hi - lo; }

  /// Slab test. Returns true when the ray [t_min, t_max] touches the box.
  bool hit(Vec3 origin, Vec3 inv_dir, double t_min, double t_max) const {
    for (int a = 0; a < 3; ++a) {
      double t0 = (lo[a] - origin[a]) * inv_dir[a];
      double t1 = (hi[a] - origin[a]) * inv_dir[a];
      if (t0 > t1) std::swap(t0, t1);
      // NaN from 0*inf is treated as a hit on that axis.
      if (t0 > t_min) t_min = t0;
      if (t1 < t_max) t_max = t1;
      if (t_max < t_min) return false;
    }
    return true;
  }
};

inline constexpr double kPi = std::numbers::pi;

}  // namespace synthdet
