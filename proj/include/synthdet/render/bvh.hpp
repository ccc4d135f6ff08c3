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
#include <limits>
#include <numeric>
#include <vector>

#include "synthdet/core/math.hpp"
#include "synthdet/core/mesh.hpp"

namespace synthdet::render {

struct Ray {
  Vec3 origin;
  Vec3 dir;
};

struct TriangleHit {
  double t = std::numeric_limits<double>::infinity();
  std::uint32_t triangle = 0;
  double u = 0.0;  // barycentric weight of vertex 1
  double v = 0.0;  // barycentric weight of vertex 2
};

/// Möller-Trumbore, two-sided. Returns true for hits in (t_min, best.t).
inline bool intersect_triangle(const Ray& ray, Vec3 a, Vec3 b, Vec3 c, double t_min,
                               TriangleHit& best, std::uint32_t index) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = cross(ray.dir, e2);
  const double det = dot(e1, p);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Vec3 s = ray.origin - a;
  const double u = dot(s, p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = cross(s, e1);
  const double v = dot(ray.dir, q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = dot(e2, q) * inv;
  if (t <= t_min || t >= best.t) return false;
  best = {t, index, u, v};
  return true;
}

/// Binary bounding-volume hierarchy over the triangles of one mesh, built
/// with a median split on the longest centroid axis.
class Bvh {
 public:
  Bvh() = default;
  explicit Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
    const std::size_t n = mesh.triangles.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    centroids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = mesh.triangles[i];
      centroids_[i] = (mesh.positions[t[0]] + mesh.positions[t[1]] + mesh.positions[t[2]]) / 3.0;
    }
    if (n > 0) {
      nodes_.emplace_back();
      build_into(0, 0, static_cast<std::uint32_t>(n));
    }
    centroids_.clear();
    centroids_.shrink_to_fit();
  }

  const Aabb& bounds() const { return nodes_.front().box; }
  bool empty() const { return nodes_.empty(); }

  /// Closest hit with t in (t_min, hit.t). `hit.t` acts as the far bound.
  bool intersect(const Ray& ray, double t_min, TriangleHit& hit) const {
    if (nodes_.empty()) return false;
    const Vec3 inv{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    bool any = false;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!node.box.hit(ray.origin, inv, t_min, hit.t)) continue;
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const auto& tri = mesh_->triangles[order_[i]];
          any |= intersect_triangle(ray, mesh_->positions[tri[0]], mesh_->positions[tri[1]],
                                    mesh_->positions[tri[2]], t_min, hit, order_[i]);
        }
      } else {
        stack[top++] = node.first;
        stack[top++] = node.first + 1;
      }
    }
    return any;
  }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // child index (inner) or first triangle (leaf)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  void build_into(std::uint32_t slot, std::uint32_t begin, std::uint32_t end) {
    Aabb box, cbox;
    for (std::uint32_t i = begin; i < end; ++i) {
      const auto& t = mesh_->triangles[order_[i]];
      for (auto v : t) box.extend(mesh_->positions[v]);
      cbox.extend(centroids_[order_[i]]);
    }
    nodes_[slot].box = box;
    const std::uint32_t count = end - begin;
    const Vec3 ext = cbox.extent();
    const int axis = ext.x > ext.y ? (ext.x > ext.z ? 0 : 2) : (ext.y > ext.z ? 1 : 2);
    if (count <= 4 || ext[axis] <= 0.0) {
      nodes_[slot].first = begin;
      nodes_[slot].count = count;
      return;
    }
    const std::uint32_t mid = begin + count / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return centroids_[a][axis] < centroids_[b][axis];
                     });
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.resize(nodes_.size() + 2);
    nodes_[slot].first = left;
    nodes_[slot].count = 0;
    build_into(left, begin, mid);
    build_into(left + 1, mid, end);
  }

  const TriangleMesh* mesh_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> centroids_;
};

}  // namespace synthdet::render
