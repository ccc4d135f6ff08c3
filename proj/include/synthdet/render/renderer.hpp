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
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "synthdet/core/assets.hpp"
#include "synthdet/core/error.hpp"
#include "synthdet/core/image.hpp"
#include "synthdet/core/mesh.hpp"
#include "synthdet/core/rng.hpp"
#include "synthdet/render/bvh.hpp"
#include "synthdet/render/camera.hpp"
#include "synthdet/render/hdri.hpp"
#include "synthdet/render/postfx.hpp"
#include "synthdet/render/shade.hpp"
#include "synthdet/scenegen/scene.hpp"

namespace synthdet::render {

inline constexpr double kHiddenZ = 1e6;

/// Moves an object far outside any view frustum. Cheaper than removing it
/// from the scene since nothing has to be rebuilt.
inline scene::ObjectPose hide_offscreen(scene::ObjectPose pose) {
  if (!pose.stashed_z) pose.stashed_z = pose.position.z;
  pose.position.z = kHiddenZ;
  return pose;
}

inline scene::ObjectPose unhide(scene::ObjectPose pose) {
  if (pose.stashed_z) {
    pose.position.z = *pose.stashed_z;
    pose.stashed_z.reset();
  }
  return pose;
}

struct RenderSettings {
  int subframe_count = 1;
  int rays_per_pixel = 1;
  bool enable_secondary_bounce = false;
  bool jitter = true;  // sub-pixel jitter of shading rays
  std::uint64_t seed = 0;

  void validate() const {
    if (subframe_count < 1) throw ConfigError("subframe_count must be >= 1");
    if (rays_per_pixel < 1) throw ConfigError("rays_per_pixel must be >= 1");
  }
};

struct RenderOutput {
  Image rgb;
  InstanceMap instance_map;  // 1-based index into object_poses, 0 = background
  DepthMap depth;            // ray distance in meters, +inf on background
};

/// One placed mesh. Static room geometry carries instance id 0.
struct RenderInstance {
  const TriangleMesh* mesh = nullptr;
  const Bvh* bvh = nullptr;
  Pose3 pose;
  Aabb world;
  const scene::MaterialParams* material = nullptr;
  std::uint16_t id = 0;
};

struct SceneHit {
  double t = std::numeric_limits<double>::infinity();
  const RenderInstance* instance = nullptr;
  TriangleHit tri;
};

/// Flattened, ray-traceable view of a SceneConfig. Holds pointers into the
/// scene, so the scene must outlive it.
class RenderScene {
 public:
  RenderScene(const scene::SceneConfig& cfg, const AssetStore& assets,
              std::optional<std::size_t> solo = std::nullopt, bool include_static = true)
      : cfg_(&cfg), assets_(&assets) {
    if (cfg.object_poses.size() > 0xFFFF) throw ConfigError("too many objects for 16-bit ids");
    if (cfg.room && include_static) build_room(*cfg.room);
    for (std::size_t i = 0; i < cfg.object_poses.size(); ++i) {
      if (solo && *solo != i) continue;
      const auto& p = cfg.object_poses[i];
      const MeshAsset& a = assets.mesh(p.asset_id);
      add(*a.mesh, *a.bvh, p.pose(), &scene::material_for(cfg, p.asset_id),
          static_cast<std::uint16_t>(i + 1));
    }
    if (include_static && !assets.hdris().empty()) {
      if (cfg.lighting.hdri_id >= assets.hdris().size())
        throw LoadError("HDRI index " + std::to_string(cfg.lighting.hdri_id) + " out of range");
      env_ = &assets.hdris()[cfg.lighting.hdri_id].env;
    }
  }

  const scene::SceneConfig& config() const { return *cfg_; }
  const Image* environment() const { return env_; }

  bool intersect(const Ray& ray, double t_min, double t_max, SceneHit& best) const {
    best.t = t_max;
    best.instance = nullptr;
    const Vec3 inv{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
    for (const auto& inst : instances_) {
      if (!inst.world.hit(ray.origin, inv, t_min, best.t)) continue;
      const Ray local{inst.pose.apply_inverse(ray.origin), inst.pose.rotate_inverse(ray.dir)};
      TriangleHit h;
      h.t = best.t;
      if (inst.bvh->intersect(local, t_min, h)) {
        best.t = h.t;
        best.instance = &inst;
        best.tri = h;
      }
    }
    return best.instance != nullptr;
  }

  bool occluded(Vec3 from, Vec3 to) const {
    const Vec3 d = to - from;
    const double dist = norm(d);
    SceneHit h;
    return intersect({from, d / dist}, 1e-6, dist * (1 - 1e-6), h);
  }

  /// Geometric attributes at a hit: world position, shading normal facing the
  /// ray and the albedo from texture or base colour.
  SurfaceHit surface(const Ray& ray, const SceneHit& hit) const {
    const TriangleMesh& m = *hit.instance->mesh;
    const auto& tri = m.triangles[hit.tri.triangle];
    const double u = hit.tri.u, v = hit.tri.v, w = 1.0 - u - v;
    SurfaceHit s;
    s.position = ray.origin + ray.dir * hit.t;
    Vec3 n;
    if (!m.normals.empty())
      n = m.normals[tri[0]] * w + m.normals[tri[1]] * u + m.normals[tri[2]] * v;
    if (dot(n, n) < 1e-20)
      n = cross(m.positions[tri[1]] - m.positions[tri[0]], m.positions[tri[2]] - m.positions[tri[0]]);
    n = normalized(hit.instance->pose.rotate(n));
    if (dot(n, ray.dir) > 0) n = -n;
    s.normal = n;
    s.view = -ray.dir;
    s.albedo = m.base_color;
    if (!m.texture.empty() && !m.uvs.empty()) {
      const UV a = m.uvs[tri[0]], b = m.uvs[tri[1]], c = m.uvs[tri[2]];
      double tu = a.u * w + b.u * u + c.u * v, tv = a.v * w + b.v * u + c.v * v;
      tu -= std::floor(tu);
      tv -= std::floor(tv);
      s.albedo = sample_bilinear(m.texture, tu * m.texture.width() - 0.5,
                                 (1.0 - tv) * m.texture.height() - 0.5);
    }
    return s;
  }

 private:
  void add(const TriangleMesh& mesh, const Bvh& bvh, const Pose3& pose,
           const scene::MaterialParams* material, std::uint16_t id) {
    RenderInstance inst{&mesh, &bvh, pose, {}, material, id};
    const Aabb b = bvh.bounds();
    for (int k = 0; k < 8; ++k)
      inst.world.extend(pose.apply({k & 1 ? b.hi.x : b.lo.x, k & 2 ? b.hi.y : b.lo.y,
                                    k & 4 ? b.hi.z : b.lo.z}));
    // Pad so rays grazing flat geometry still enter the box.
    inst.world.lo = inst.world.lo - Vec3{1e-9, 1e-9, 1e-9};
    inst.world.hi = inst.world.hi + Vec3{1e-9, 1e-9, 1e-9};
    instances_.push_back(inst);
  }

  void add_owned(TriangleMesh mesh, const Pose3& pose, const scene::MaterialParams* material) {
    owned_meshes_.push_back(std::make_unique<TriangleMesh>(std::move(mesh)));
    owned_bvhs_.push_back(std::make_unique<Bvh>(*owned_meshes_.back()));
    add(*owned_meshes_.back(), *owned_bvhs_.back(), pose, material, 0);
  }

  void build_room(const scene::RoomSpec& room) {
    const auto& floor_mat = scene::material_for(*cfg_, scene::kFloorMaterial);
    const auto& wall_mat = scene::material_for(*cfg_, scene::kWallMaterial);
    const auto& table_mat = scene::material_for(*cfg_, scene::kTableMaterial);
    const double hx = room.width / 2, hy = room.length / 2, wh = scene::kWallHeight;
    // Floor and walls are thin boxes just outside the room volume.
    constexpr double kThick = 0.02;
    TriangleMesh floor = make_box({room.width, room.length, kThick});
    floor.texture = make_checker_texture(64, 8, {0.45, 0.4, 0.35}, {0.3, 0.27, 0.24});
    add_owned(std::move(floor), {{0, 0, -kThick / 2}, {}}, &floor_mat);
    const Vec3 wall_color{0.8, 0.78, 0.72};
    auto wall = [&](Vec3 size, Vec3 center) {
      TriangleMesh m = make_box(size);
      m.base_color = wall_color;
      add_owned(std::move(m), {center, {}}, &wall_mat);
    };
    wall({room.width, kThick, wh}, {0, -hy - kThick / 2, wh / 2});
    wall({room.width, kThick, wh}, {0, hy + kThick / 2, wh / 2});
    wall({kThick, room.length, wh}, {-hx - kThick / 2, 0, wh / 2});
    wall({kThick, room.length, wh}, {hx + kThick / 2, 0, wh / 2});
    TriangleMesh table = make_box({2 * room.table_half_extent, 2 * room.table_half_extent,
                                   room.table_height});
    table.base_color = {0.5, 0.33, 0.2};
    add_owned(std::move(table),
              {room.table_pose.position + Vec3{0, 0, room.table_height / 2}, room.table_pose.orientation},
              &table_mat);
    for (const auto& f : room.furniture_placements) {
      const MeshAsset& a = assets_->mesh(f.asset_id);
      add(*a.mesh, *a.bvh, f.pose, &scene::material_for(*cfg_, f.asset_id), 0);
    }
  }

  const scene::SceneConfig* cfg_;
  const AssetStore* assets_;
  const Image* env_ = nullptr;
  std::vector<RenderInstance> instances_;
  std::vector<std::unique_ptr<TriangleMesh>> owned_meshes_;
  std::vector<std::unique_ptr<Bvh>> owned_bvhs_;
};

/// Instance ids and depth from one ray through each pixel centre.
/// `region` limits the work to a pixel rectangle (x0, y0, x1, y1), exclusive
/// upper bounds; pixels outside stay background.
inline void trace_ids(const RenderScene& rs, const PinholeCamera& cam, InstanceMap& ids,
                      DepthMap* depth, std::optional<std::array<int, 4>> region = std::nullopt) {
  const auto r = region.value_or(std::array<int, 4>{0, 0, cam.width(), cam.height()});
  for (int y = std::max(0, r[1]); y < std::min(cam.height(), r[3]); ++y)
    for (int x = std::max(0, r[0]); x < std::min(cam.width(), r[2]); ++x) {
      const Ray ray = cam.ray(x + 0.5, y + 0.5);
      SceneHit hit;
      if (rs.intersect(ray, 0.0, std::numeric_limits<double>::infinity(), hit) &&
          hit.instance->id != 0) {
        ids.at(x, y) = hit.instance->id;
        if (depth) depth->at(x, y) = static_cast<float>(hit.t);
      }
    }
}

/// Radiance along one camera ray.
inline Vec3 trace_radiance(const RenderScene& rs, const Ray& ray, const RenderSettings& settings,
                           Rng& rng) {
  SceneHit hit;
  if (!rs.intersect(ray, 0.0, std::numeric_limits<double>::infinity(), hit))
    return rs.environment() ? sample_hdri(*rs.environment(), ray.dir) : Vec3{};
  const auto& lighting = rs.config().lighting;
  const SurfaceHit s = rs.surface(ray, hit);
  const Vec3 lift = s.position + s.normal * 1e-6;
  const auto shadow = [&](Vec3, Vec3 to) { return rs.occluded(lift, to); };
  const scene::MaterialParams& m = *hit.instance->material;
  Vec3 out = shade(s, m, lighting, shadow);
  if (settings.enable_secondary_bounce && m.metallic < 1.0) {
    // One cosine-weighted diffuse bounce with direct lighting at the
    // secondary hit.
    const double r1 = rng.uniform(), r2 = rng.uniform();
    const double sr = std::sqrt(r1), phi = 2 * kPi * r2;
    const Vec3 n = s.normal;
    const Vec3 t = normalized(std::abs(n.x) > 0.5 ? cross(n, {0, 1, 0}) : cross(n, {1, 0, 0}));
    const Vec3 b = cross(n, t);
    const Vec3 dir = normalized(t * (sr * std::cos(phi)) + b * (sr * std::sin(phi)) +
                                n * std::sqrt(std::max(0.0, 1 - r1)));
    const Ray bounce{lift, dir};
    SceneHit h2;
    Vec3 incoming;
    if (rs.intersect(bounce, 0.0, std::numeric_limits<double>::infinity(), h2)) {
      const SurfaceHit s2 = rs.surface(bounce, h2);
      const Vec3 lift2 = s2.position + s2.normal * 1e-6;
      incoming = shade(s2, *h2.instance->material, lighting,
                       [&](Vec3, Vec3 to) { return rs.occluded(lift2, to); });
    } else if (rs.environment()) {
      incoming = sample_hdri(*rs.environment(), dir);
    }
    out += hadamard(effective_albedo(s.albedo, m), incoming) * (1.0 - m.metallic);
  }
  return out;
}

/// One stochastic subframe: rays_per_pixel jittered rays per pixel, averaged.
inline Image render_subframe(const RenderScene& rs, const PinholeCamera& cam,
                             const RenderSettings& settings, int subframe) {
  Rng rng(derive_seed(settings.seed, static_cast<std::uint64_t>(subframe), "subframe"));
  Image img(cam.width(), cam.height());
  const double inv = 1.0 / settings.rays_per_pixel;
  for (int y = 0; y < cam.height(); ++y)
    for (int x = 0; x < cam.width(); ++x) {
      Vec3 sum;
      for (int k = 0; k < settings.rays_per_pixel; ++k) {
        const double jx = settings.jitter ? rng.uniform() : 0.5;
        const double jy = settings.jitter ? rng.uniform() : 0.5;
        sum += trace_radiance(rs, cam.ray(x + jx, y + jy), settings, rng);
      }
      img.set_rgb(x, y, sum * inv);
    }
  return img;
}

/// Pixel-wise mean of subframe_count independent subframes, clamped.
inline Image accumulate_subframes(const RenderScene& rs, const PinholeCamera& cam,
                                  const RenderSettings& settings) {
  settings.validate();
  Image acc = render_subframe(rs, cam, settings, 0);
  if (settings.subframe_count > 1) {
    std::vector<double> sum(acc.values().begin(), acc.values().end());
    for (int s = 1; s < settings.subframe_count; ++s) {
      const Image f = render_subframe(rs, cam, settings, s);
      const auto v = f.values();
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    }
    auto out = acc.values();
    for (std::size_t i = 0; i < sum.size(); ++i)
      out[i] = static_cast<float>(sum[i] / settings.subframe_count);
  }
  acc.clamp();
  return acc;
}

/// Renders RGB (before post-processing), instance ids and depth.
inline RenderOutput render(const scene::SceneConfig& cfg, const AssetStore& assets,
                           const RenderSettings& settings) {
  settings.validate();
  const RenderScene rs(cfg, assets);
  const PinholeCamera cam(cfg.camera);
  RenderOutput out;
  out.rgb = accumulate_subframes(rs, cam, settings);
  out.instance_map = InstanceMap(cam.width(), cam.height(), 0);
  out.depth = DepthMap(cam.width(), cam.height(), std::numeric_limits<float>::infinity());
  trace_ids(rs, cam, out.instance_map, &out.depth);
  return out;
}

/// Full frame: render followed by the scene's post-processing, with the
/// noise stream derived from the render seed and frame index.
inline RenderOutput render_frame(const scene::SceneConfig& cfg, const AssetStore& assets,
                                 const RenderSettings& settings) {
  RenderOutput out = render(cfg, assets, settings);
  Rng fx(derive_seed(settings.seed, static_cast<std::uint64_t>(cfg.frame_index), "postfx-noise"));
  out.rgb = apply_postfx(out.rgb, cfg.postfx, fx);
  return out;
}

/// Instance map of a render that contains only object `index` (0-based),
/// without room geometry, optionally restricted to a pixel rectangle.
inline InstanceMap render_solo_ids(const scene::SceneConfig& cfg, const AssetStore& assets,
                                   std::size_t index,
                                   std::optional<std::array<int, 4>> region = std::nullopt) {
  const RenderScene rs(cfg, assets, index, false);
  const PinholeCamera cam(cfg.camera);
  InstanceMap ids(cam.width(), cam.height(), 0);
  trace_ids(rs, cam, ids, nullptr, region);
  return ids;
}

}  // namespace synthdet::render
