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

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "synthdet/core/error.hpp"
#include "synthdet/core/image.hpp"
#include "synthdet/core/math.hpp"

namespace synthdet {

struct UV {
  double u = 0.0;
  double v = 0.0;
};

/// Indexed triangle mesh with optional per-vertex normals and UVs and one
/// albedo texture. Attribute arrays are either empty or sized like
/// `positions`.
struct TriangleMesh {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<UV> uvs;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  Image texture;
  Vec3 base_color{0.6, 0.6, 0.6};

  Aabb bounds() const {
    Aabb b;
    for (const auto& p : positions) b.extend(p);
    return b;
  }

  /// Throws LoadError if an index is out of range or a vertex is not finite.
  void validate(const std::string& name) const {
    for (const auto& p : positions)
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
        throw LoadError("mesh '" + name + "': non-finite vertex");
    for (const auto& t : triangles)
      for (auto i : t)
        if (i >= positions.size())
          throw LoadError("mesh '" + name + "': triangle index " + std::to_string(i) +
                          " out of range (" + std::to_string(positions.size()) + " vertices)");
    if (!normals.empty() && normals.size() != positions.size())
      throw LoadError("mesh '" + name + "': normal count differs from vertex count");
    if (!uvs.empty() && uvs.size() != positions.size())
      throw LoadError("mesh '" + name + "': uv count differs from vertex count");
    if (triangles.empty()) throw LoadError("mesh '" + name + "': no triangles");
  }
};

/// Axis-aligned box centred on the origin, 24 vertices so faces stay flat.
inline TriangleMesh make_box(Vec3 size) {
  TriangleMesh m;
  const Vec3 h = size * 0.5;
  const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int a = 0; a < 3; ++a) {
    for (int s = -1; s <= 1; s += 2) {
      const Vec3 n = axes[a] * static_cast<double>(s);
      const Vec3 u = axes[(a + 1) % 3], v = axes[(a + 2) % 3];
      const auto base = static_cast<std::uint32_t>(m.positions.size());
      for (int k = 0; k < 4; ++k) {
        const double du = (k == 1 || k == 2) ? 1.0 : -1.0;
        const double dv = (k >= 2) ? 1.0 : -1.0;
        const Vec3 p = hadamard(n + u * du + v * dv, h);
        m.positions.push_back(p);
        m.normals.push_back(n);
        m.uvs.push_back({(du + 1) / 2, (dv + 1) / 2});
      }
      if (s > 0) {
        m.triangles.push_back({base, base + 1, base + 2});
        m.triangles.push_back({base, base + 2, base + 3});
      } else {
        m.triangles.push_back({base, base + 2, base + 1});
        m.triangles.push_back({base, base + 3, base + 2});
      }
    }
  }
  return m;
}

/// UV sphere centred on the origin.
inline TriangleMesh make_sphere(double radius, int rings = 24, int segments = 48) {
  TriangleMesh m;
  for (int r = 0; r <= rings; ++r) {
    const double theta = kPi * r / rings;
    for (int s = 0; s <= segments; ++s) {
      const double phi = 2 * kPi * s / segments;
      const Vec3 n{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                   std::cos(theta)};
      m.positions.push_back(n * radius);
      m.normals.push_back(n);
      m.uvs.push_back({static_cast<double>(s) / segments, static_cast<double>(r) / rings});
    }
  }
  const auto stride = static_cast<std::uint32_t>(segments + 1);
  for (std::uint32_t r = 0; r < static_cast<std::uint32_t>(rings); ++r) {
    for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(segments); ++s) {
      const std::uint32_t a = r * stride + s, b = a + stride;
      if (r != 0) m.triangles.push_back({a, b, a + 1});
      if (r + 1 != static_cast<std::uint32_t>(rings)) m.triangles.push_back({a + 1, b, b + 1});
    }
  }
  return m;
}

/// Closed cylinder along z, centred on the origin.
inline TriangleMesh make_cylinder(double radius, double height, int segments = 32) {
  TriangleMesh m;
  const double hz = height / 2;
  for (int s = 0; s <= segments; ++s) {
    const double phi = 2 * kPi * s / segments;
    const Vec3 n{std::cos(phi), std::sin(phi), 0};
    for (int k = 0; k < 2; ++k) {
      m.positions.push_back({n.x * radius, n.y * radius, k ? hz : -hz});
      m.normals.push_back(n);
      m.uvs.push_back({static_cast<double>(s) / segments, static_cast<double>(k)});
    }
  }
  for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(segments); ++s) {
    const std::uint32_t a = 2 * s;
    m.triangles.push_back({a, a + 2, a + 1});
    m.triangles.push_back({a + 1, a + 2, a + 3});
  }
  for (int k = 0; k < 2; ++k) {
    const double z = k ? hz : -hz;
    const Vec3 n{0, 0, k ? 1.0 : -1.0};
    const auto center = static_cast<std::uint32_t>(m.positions.size());
    m.positions.push_back({0, 0, z});
    m.normals.push_back(n);
    m.uvs.push_back({0.5, 0.5});
    for (int s = 0; s <= segments; ++s) {
      const double phi = 2 * kPi * s / segments;
      m.positions.push_back({std::cos(phi) * radius, std::sin(phi) * radius, z});
      m.normals.push_back(n);
      m.uvs.push_back({0.5 + 0.5 * std::cos(phi), 0.5 + 0.5 * std::sin(phi)});
    }
    for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(segments); ++s) {
      if (k)
        m.triangles.push_back({center, center + 1 + s, center + 2 + s});
      else
        m.triangles.push_back({center, center + 2 + s, center + 1 + s});
    }
  }
  return m;
}

/// Two-colour checkerboard texture.
inline Image make_checker_texture(int size, int cells, Vec3 a, Vec3 b) {
  Image t(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      t.set_rgb(x, y, (((x * cells) / size + (y * cells) / size) % 2) ? a : b);
  return t;
}

/// Wavefront OBJ subset: v, vt, vn and polygonal f records (fan
/// triangulated). Vertices are split per unique (v, vt, vn) corner.
inline TriangleMesh parse_obj(std::istream& in, const std::string& name) {
  std::vector<Vec3> pos, nrm;
  std::vector<UV> tex;
  TriangleMesh m;
  std::vector<std::array<long, 3>> corner_keys;
  std::vector<std::uint32_t> corner_index;
  auto resolve = [&](long i, std::size_t n, int line) -> long {
    const long r = i > 0 ? i - 1 : static_cast<long>(n) + i;
    if (r < 0 || r >= static_cast<long>(n))
      throw LoadError("mesh '" + name + "': line " + std::to_string(line) + ": index " +
                      std::to_string(i) + " out of range");
    return r;
  };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z))
        throw LoadError("mesh '" + name + "': line " + std::to_string(line_no) + ": bad vertex");
      pos.push_back(p);
    } else if (tag == "vt") {
      UV t;
      ls >> t.u >> t.v;
      tex.push_back(t);
    } else if (tag == "vn") {
      Vec3 n;
      ls >> n.x >> n.y >> n.z;
      nrm.push_back(normalized(n));
    } else if (tag == "f") {
      std::vector<std::uint32_t> face;
      std::string tok;
      while (ls >> tok) {
        long vi = 0, ti = 0, ni = 0;
        const auto s1 = tok.find('/');
        vi = std::stol(tok.substr(0, s1));
        if (s1 != std::string::npos) {
          const auto s2 = tok.find('/', s1 + 1);
          const std::string t = tok.substr(s1 + 1, s2 == std::string::npos ? std::string::npos
                                                                          : s2 - s1 - 1);
          if (!t.empty()) ti = std::stol(t);
          if (s2 != std::string::npos && s2 + 1 < tok.size()) ni = std::stol(tok.substr(s2 + 1));
        }
        std::array<long, 3> key{resolve(vi, pos.size(), line_no),
                                ti ? resolve(ti, tex.size(), line_no) : -1,
                                ni ? resolve(ni, nrm.size(), line_no) : -1};
        std::uint32_t idx = 0;
        bool found = false;
        // Linear probe over recent corners keeps memory small for typical
        // scans where corners are shared locally.
        for (std::size_t k = corner_keys.size(); k-- > 0 && corner_keys.size() - k < 64;) {
          if (corner_keys[k] == key) {
            idx = corner_index[k];
            found = true;
            break;
          }
        }
        if (!found) {
          idx = static_cast<std::uint32_t>(m.positions.size());
          m.positions.push_back(pos[static_cast<std::size_t>(key[0])]);
          m.uvs.push_back(key[1] >= 0 ? tex[static_cast<std::size_t>(key[1])] : UV{});
          m.normals.push_back(key[2] >= 0 ? nrm[static_cast<std::size_t>(key[2])] : Vec3{});
          corner_keys.push_back(key);
          corner_index.push_back(idx);
        }
        face.push_back(idx);
      }
      for (std::size_t k = 2; k < face.size(); ++k) m.triangles.push_back({face[0], face[k - 1], face[k]});
    }
  }
  // Drop attribute arrays that the file never supplied.
  if (tex.empty()) m.uvs.clear();
  if (nrm.empty()) m.normals.clear();
  m.validate(name);
  return m;
}

inline TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open mesh file: " + path);
  return parse_obj(in, path);
}

}  // namespace synthdet
