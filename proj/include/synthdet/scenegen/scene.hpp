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

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthdet/core/assets.hpp"
#include "synthdet/core/error.hpp"
#include "synthdet/core/hash.hpp"
#include "synthdet/core/math.hpp"
#include "synthdet/core/rng.hpp"
#include "synthdet/scenegen/randomization.hpp"

namespace synthdet::scene {

enum class SceneMode { kTable, kHdriDrop };

inline const char* to_string(SceneMode m) { return m == SceneMode::kTable ? "table" : "hdri_drop"; }

// Fixed room furniture dimensions (meters).
inline constexpr double kTableHalfExtent = 0.5;
inline constexpr double kTableHeight = 0.75;
inline constexpr double kWallClearance = 0.1;
inline constexpr double kWallHeight = 2.8;
inline constexpr double kDropHalfExtent = 0.5;
inline constexpr double kMaxPileHeight = 1.5;
inline constexpr int kMaxPlacementAttempts = 100;

/// Axis-aligned rectangle in the floor plane.
struct Rect2 {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double overlap_area(const Rect2& o) const {
    const double w = std::min(x1, o.x1) - std::max(x0, o.x0);
    const double h = std::min(y1, o.y1) - std::max(y0, o.y0);
    return w > 0 && h > 0 ? w * h : 0.0;
  }
  bool operator==(const Rect2&) const = default;
};

struct FurniturePlacement {
  std::string asset_id;
  Pose3 pose;
  Rect2 footprint;
  int wall = 0;  // 0: -y, 1: +x, 2: +y, 3: -x
};

struct RoomSpec {
  double width = 0;
  double length = 0;
  std::vector<FurniturePlacement> furniture_placements;
  Pose3 table_pose;  // centre of the table footprint on the floor
  double table_half_extent = kTableHalfExtent;
  double table_height = kTableHeight;

  Rect2 table_footprint() const {
    const Vec3 c = table_pose.position;
    return {c.x - table_half_extent, c.y - table_half_extent, c.x + table_half_extent,
            c.y + table_half_extent};
  }
  Vec3 table_top_center() const { return table_pose.position + Vec3{0, 0, table_height}; }
};

struct ObjectPose {
  std::string asset_id;
  Vec3 position;
  Quat orientation;
  bool is_distractor = false;
  std::optional<double> stashed_z;  // set while hidden off screen

  Pose3 pose() const { return {position, orientation}; }
};

struct CameraSpec {
  Vec3 position;
  Vec3 look_at;
  double vertical_fov = 60.0 * kPi / 180.0;
  int width = 640;
  int height = 480;
};

struct MaterialParams {
  double albedo_desaturation = 0.0;
  double albedo_add = 0.0;
  double albedo_brightness = 1.0;
  Vec3 diffuse_tint{1, 1, 1};
  double roughness = 0.5;
  double metallic = 0.0;
  double specular_level = 0.0;
  Vec3 emissive_color{0, 0, 0};
};

struct PostFxParams {
  bool tv_noise = false;
  bool scan_lines = false;
  double scan_line_spread = 0.1;
  bool vertical_lines = false;
  bool splotches = false;
  bool film_grain = false;
  double grain_amount = 0.0;
  double grain_size = 0.7;
  double color_amount = 0.0;
  bool vignetting = false;

  bool any() const {
    return tv_noise || scan_lines || vertical_lines || splotches || film_grain || vignetting;
  }
};

struct PointLight {
  Vec3 position;
  double intensity = 1.0;
  Vec3 color{1, 1, 1};
};

struct LightingSpec {
  double ambient_intensity = 0.0;
  std::size_t hdri_id = 0;
  std::vector<PointLight> point_lights;
};

struct SceneConfig {
  SceneMode mode = SceneMode::kHdriDrop;
  std::optional<RoomSpec> room;
  std::vector<ObjectPose> object_poses;
  CameraSpec camera;
  std::map<std::string, MaterialParams> materials;  // keyed by asset id
  LightingSpec lighting;
  PostFxParams postfx;
  std::int64_t frame_index = 0;
  std::vector<std::string> discarded;  // assets dropped by settling

  /// Throws ValidationError if a structural invariant is broken.
  void validate() const {
    if ((mode == SceneMode::kTable) != room.has_value())
      throw ValidationError("scene mode and room presence disagree");
    for (const auto& p : object_poses)
      if (std::abs(p.orientation.norm() - 1.0) > 1e-9)
        throw ValidationError("non-unit orientation for '" + p.asset_id + "'");
    if (camera.width <= 0 || camera.height <= 0) throw ValidationError("empty camera resolution");
  }
};

/// Material lookup with a neutral fallback for surfaces that were not sampled.
inline const MaterialParams& material_for(const SceneConfig& scene, const std::string& id) {
  static const MaterialParams kNeutral{};
  const auto it = scene.materials.find(id);
  return it == scene.materials.end() ? kNeutral : it->second;
}

// Room surfaces get their own material keys.
inline const std::string kFloorMaterial = "room:floor";
inline const std::string kWallMaterial = "room:walls";
inline const std::string kTableMaterial = "room:table";

// ---------------------------------------------------------------------------
// Sampling.

/// Orientation-dependent collision proxy: the axis-aligned box of the
/// rotated mesh vertices, relative to the object origin.
inline Aabb rotated_bounds(const TriangleMesh& mesh, Quat q) {
  Aabb b;
  for (const auto& p : mesh.positions) b.extend(q.rotate(p));
  return b;
}

inline RoomSpec sample_room(Rng& rng, std::span<const MeshAsset> furniture,
                            const SceneRandomization& cfg = {}) {
  if (furniture.empty()) throw ConfigError("room sampling needs at least one furniture asset");
  RoomSpec room;
  room.width = cfg.room_width.sample(rng);
  room.length = room.width * cfg.room_length_ratio.sample(rng);
  const double hx = room.width / 2, hy = room.length / 2;
  const Rect2 table = room.table_footprint();
  const auto count = cfg.furniture_count.sample(rng);
  for (long long n = 0; n < count; ++n) {
    const MeshAsset& asset =
        furniture[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(furniture.size()) - 1))];
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      const int wall = static_cast<int>(rng.uniform_int(0, 3));
      const Quat q = Quat::axis_angle({0, 0, 1}, wall * kPi / 2);
      const Aabb b = rotated_bounds(*asset.mesh, q);
      const double u = rng.uniform();
      // Footprint extents after rotation; the piece backs onto its wall.
      const double ex = b.hi.x - b.lo.x, ey = b.hi.y - b.lo.y;
      double cx = 0, cy = 0;
      if (wall == 0 || wall == 2) {
        const double span = 2 * (hx - kWallClearance) - ex;
        if (span < 0) continue;
        cx = -hx + kWallClearance + u * span - b.lo.x;
        cy = wall == 0 ? -hy + kWallClearance - b.lo.y : hy - kWallClearance - b.hi.y;
      } else {
        const double span = 2 * (hy - kWallClearance) - ey;
        if (span < 0) continue;
        cy = -hy + kWallClearance + u * span - b.lo.y;
        cx = wall == 3 ? -hx + kWallClearance - b.lo.x : hx - kWallClearance - b.hi.x;
      }
      const Rect2 fp{cx + b.lo.x, cy + b.lo.y, cx + b.hi.x, cy + b.hi.y};
      bool clash = fp.overlap_area(table) > 0.0;
      for (const auto& other : room.furniture_placements) clash |= fp.overlap_area(other.footprint) > 0.0;
      if (clash) continue;
      room.furniture_placements.push_back({asset.id, {{cx, cy, -b.lo.z}, q}, fp, wall});
      break;
    }
  }
  return room;
}

struct DropItem {
  std::string asset_id;
  bool distractor = false;
};

/// Region objects are dropped into and confined to while settling.
struct DropRegion {
  Rect2 bounds{-kDropHalfExtent, -kDropHalfExtent, kDropHalfExtent, kDropHalfExtent};
  double support_height = 0.0;

  static DropRegion for_mode(SceneMode mode, const RoomSpec* room) {
    DropRegion r;
    if (mode == SceneMode::kTable) {
      if (room == nullptr) throw ConfigError("table mode needs a room");
      r.bounds = room->table_footprint();
      r.support_height = room->table_top_center().z;
    }
    return r;
  }
};

/// Initial poses: uniform in the region's footprint, at a drop height above
/// the support, uniformly random orientation.
inline std::vector<ObjectPose> sample_drop_placements(Rng& rng, std::span<const DropItem> items,
                                                      const DropRegion& region,
                                                      const UniformRange& height = {1.0, 5.0}) {
  if (items.empty()) throw ConfigError("no assets to drop");
  std::vector<ObjectPose> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    ObjectPose p;
    p.asset_id = item.asset_id;
    p.is_distractor = item.distractor;
    p.position = {rng.uniform(region.bounds.x0, region.bounds.x1),
                  rng.uniform(region.bounds.y0, region.bounds.y1),
                  region.support_height + height.sample(rng)};
    p.orientation = rng.unit_quaternion();
    out.push_back(std::move(p));
  }
  return out;
}

using ProxyFn = std::function<Aabb(const std::string& asset_id, Quat orientation)>;

inline ProxyFn store_proxy(const AssetStore& store) {
  return [&store](const std::string& id, Quat q) { return rotated_bounds(*store.mesh(id).mesh, q); };
}

struct SettleResult {
  std::vector<ObjectPose> poses;      // settled, in input order minus discards
  std::vector<std::string> discarded;
};

/// Kinematic settling. Objects fall in order of initial height and come to
/// rest on the support or on the highest proxy below them. Piles taller than
/// kMaxPileHeight are rejected and the object is re-dropped at a new
/// in-plane position; after kMaxPlacementAttempts it is discarded.
inline SettleResult settle(const std::vector<ObjectPose>& poses, const DropRegion& region,
                           const ProxyFn& proxy, Rng& rng) {
  std::vector<std::size_t> order(poses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return poses[a].position.z < poses[b].position.z;
  });
  struct Placed {
    Rect2 footprint;
    double top;
  };
  std::vector<Placed> placed;
  std::vector<std::optional<ObjectPose>> result(poses.size());
  SettleResult out;
  for (const std::size_t i : order) {
    ObjectPose p = poses[i];
    const Aabb b = proxy(p.asset_id, p.orientation);
    bool ok = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !ok; ++attempt) {
      if (attempt > 0) {
        p.position.x = rng.uniform(region.bounds.x0, region.bounds.x1);
        p.position.y = rng.uniform(region.bounds.y0, region.bounds.y1);
      }
      // Invisible walls: keep the footprint inside the region.
      auto confine = [](double c, double lo, double hi, double r0, double r1) {
        if (hi - lo >= r1 - r0) return (r0 + r1) / 2 - (lo + hi) / 2;
        return std::clamp(c, r0 - lo, r1 - hi);
      };
      p.position.x = confine(p.position.x, b.lo.x, b.hi.x, region.bounds.x0, region.bounds.x1);
      p.position.y = confine(p.position.y, b.lo.y, b.hi.y, region.bounds.y0, region.bounds.y1);
      const Rect2 fp{p.position.x + b.lo.x, p.position.y + b.lo.y, p.position.x + b.hi.x,
                     p.position.y + b.hi.y};
      double base = region.support_height;
      for (const auto& q : placed)
        if (fp.overlap_area(q.footprint) > 1e-12) base = std::max(base, q.top);
      const double top = base + (b.hi.z - b.lo.z);
      if (top - region.support_height > kMaxPileHeight) continue;
      p.position.z = base - b.lo.z;
      placed.push_back({fp, top});
      ok = true;
    }
    if (ok)
      result[i] = std::move(p);
    else
      out.discarded.push_back(poses[i].asset_id);
  }
  for (auto& r : result)
    if (r) out.poses.push_back(std::move(*r));
  return out;
}

/// Unit vector uniform on the upper hemisphere (z >= 0).
inline Vec3 sample_upper_hemisphere(Rng& rng) {
  const double z = rng.uniform();
  const double phi = rng.uniform(0.0, 2 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

inline CameraSpec sample_camera(Rng& rng, Vec3 orbit_center, double radius,
                                double vertical_fov = 60.0 * kPi / 180.0, int width = 640,
                                int height = 480) {
  if (!(radius > 0)) throw ConfigError("camera orbit radius must be positive");
  CameraSpec c;
  c.position = orbit_center + sample_upper_hemisphere(rng) * radius;
  c.look_at = orbit_center;
  c.vertical_fov = vertical_fov;
  c.width = width;
  c.height = height;
  return c;
}

inline MaterialParams sample_materials(Rng& rng, const MaterialRandomization& cfg = {}) {
  MaterialParams m;
  m.albedo_desaturation = cfg.albedo_desaturation.sample(rng);
  m.albedo_add = cfg.albedo_add.sample(rng);
  m.albedo_brightness = cfg.albedo_brightness.sample(rng);
  m.diffuse_tint = cfg.diffuse_tint.sample(rng);
  m.roughness = cfg.roughness.sample(rng);
  m.metallic = cfg.metallic.sample(rng);
  m.specular_level = cfg.specular_level.sample(rng);
  m.emissive_color = cfg.emissive_color.sample(rng);
  return m;
}

/// Every flag and every continuous parameter is drawn on every call so the
/// stream position does not depend on which effects fire.
inline PostFxParams sample_postfx(Rng& rng, const PostFxRandomization& cfg = {}) {
  PostFxParams p;
  p.tv_noise = cfg.tv_noise.sample(rng);
  p.scan_lines = cfg.scan_lines.sample(rng);
  p.scan_line_spread = cfg.scan_line_spread.sample(rng);
  p.vertical_lines = cfg.vertical_lines.sample(rng);
  p.splotches = cfg.splotches.sample(rng);
  p.film_grain = cfg.film_grain.sample(rng);
  p.grain_amount = cfg.grain_amount.sample(rng);
  p.grain_size = cfg.grain_size.sample(rng);
  p.color_amount = cfg.color_amount.sample(rng);
  p.vignetting = cfg.vignetting.sample(rng);
  return p;
}

/// Ambient level, HDRI choice and point lights. Lights sit on the upper
/// hemisphere around `center`.
inline LightingSpec sample_lighting(Rng& rng, std::size_t hdri_count,
                                    const LightingRandomization& cfg = {}, Vec3 center = {}) {
  if (hdri_count == 0) throw ConfigError("lighting needs at least one HDRI");
  LightingSpec l;
  l.ambient_intensity = cfg.ambient_intensity.sample(rng);
  l.hdri_id = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(hdri_count) - 1));
  const auto n = cfg.point_light_count.sample(rng);
  for (long long i = 0; i < n; ++i) {
    PointLight p;
    p.position = center + sample_upper_hemisphere(rng) * cfg.point_light_distance.sample(rng);
    p.intensity = cfg.point_light_intensity.sample(rng);
    p.color = cfg.point_light_color.sample(rng);
    l.point_lights.push_back(p);
  }
  return l;
}

// ---------------------------------------------------------------------------
// Schedule.

struct RefreshEvents {
  bool scene = false;
  bool hdri = false;
  bool materials = false;
};

struct GeneratorOptions {
  std::uint64_t seed = 0;
  int width = 640;
  int height = 480;
  std::optional<SceneMode> force_mode;
};

/// Produces the scene for any frame index as a pure function of the seed,
/// the randomization config and the asset set. Refresh periods follow the
/// config: scenes, HDRIs and materials are held fixed over their epochs,
/// while ambient light, point lights, post-processing and the camera are
/// drawn fresh for every frame.
class SceneGenerator {
 public:
  SceneGenerator(std::shared_ptr<const AssetStore> assets, RandomizationConfig config,
                 GeneratorOptions options)
      : assets_(std::move(assets)), config_(std::move(config)), options_(options) {
    config_.validate();
    if (!assets_) throw ConfigError("scene generator needs an asset store");
    if (assets_->hdris().empty()) throw ConfigError("asset set has no HDRI backgrounds");
    for (const auto& o : assets_->objects()) (o.distractor ? distractors_ : targets_).push_back(o.id);
    if (targets_.empty()) throw ConfigError("asset set has no labelled target objects");
    if (options_.width <= 0 || options_.height <= 0) throw ConfigError("resolution must be positive");
  }

  const RandomizationConfig& config() const { return config_; }
  const GeneratorOptions& options() const { return options_; }
  const AssetStore& assets() const { return *assets_; }

  RefreshEvents refresh_events(std::int64_t frame) const {
    return {frame % config_.configuration.scene_period == 0,
            frame % config_.lighting.hdri_period == 0, frame % config_.materials.period == 0};
  }

  SceneConfig config_at(std::int64_t frame) const {
    if (frame < 0) throw ConfigError("frame index must be non-negative");
    SceneConfig s;
    build_scene(frame - frame % config_.configuration.scene_period, s);
    fill_frame(frame, s);
    return s;
  }

  /// Same result as config_at(frame); reuses the geometry of `prev` when it
  /// belongs to the same scene epoch.
  SceneConfig schedule(std::int64_t frame, const SceneConfig* prev) const {
    if (frame < 0) throw ConfigError("frame index must be non-negative");
    const std::int64_t epoch = frame - frame % config_.configuration.scene_period;
    if (prev == nullptr || prev->frame_index < epoch || prev->frame_index > frame ||
        prev->frame_index - prev->frame_index % config_.configuration.scene_period != epoch)
      return config_at(frame);
    SceneConfig s;
    s.mode = prev->mode;
    s.room = prev->room;
    s.object_poses = prev->object_poses;
    s.discarded = prev->discarded;
    fill_frame(frame, s);
    return s;
  }

  Vec3 orbit_center(const SceneConfig& s) const {
    return s.room ? s.room->table_top_center() : Vec3{0, 0, 0};
  }

 private:
  std::uint64_t stream(std::int64_t index, std::string_view tag) const {
    return derive_seed(options_.seed, static_cast<std::uint64_t>(index), tag);
  }

  void build_scene(std::int64_t epoch, SceneConfig& s) const {
    Rng rng(stream(epoch, "scene"));
    const auto& c = config_.configuration;
    const bool table = c.table_mode.sample(rng);
    s.mode = options_.force_mode.value_or(table ? SceneMode::kTable : SceneMode::kHdriDrop);
    if (s.mode == SceneMode::kTable) {
      if (assets_->furniture().empty()) {
        // Without furniture assets the room is just floor, walls and table.
        RoomSpec room;
        room.width = c.room_width.sample(rng);
        room.length = room.width * c.room_length_ratio.sample(rng);
        s.room = room;
      } else {
        s.room = sample_room(rng, assets_->furniture(), c);
      }
    }
    std::vector<DropItem> items;
    const auto n_targets = c.target_count.sample(rng);
    for (long long i = 0; i < n_targets; ++i)
      items.push_back({pick(rng, targets_), false});
    const auto n_distractors = c.distractor_count.sample(rng);
    if (!distractors_.empty())
      for (long long i = 0; i < n_distractors; ++i) items.push_back({pick(rng, distractors_), true});
    const DropRegion region = DropRegion::for_mode(s.mode, s.room ? &*s.room : nullptr);
    const auto drops = sample_drop_placements(rng, items, region, c.object_height);
    auto settled = settle(drops, region, store_proxy(*assets_), rng);
    s.object_poses = std::move(settled.poses);
    s.discarded = std::move(settled.discarded);
  }

  void fill_frame(std::int64_t frame, SceneConfig& s) const {
    s.frame_index = frame;
    const std::int64_t mat_epoch = frame - frame % config_.materials.period;
    const std::int64_t hdri_epoch = frame - frame % config_.lighting.hdri_period;
    s.materials.clear();
    auto add_material = [&](const std::string& id) {
      if (s.materials.count(id)) return;
      Rng r(stream(mat_epoch, "materials:" + id));
      s.materials.emplace(id, sample_materials(r, config_.materials));
    };
    for (const auto& p : s.object_poses) add_material(p.asset_id);
    if (s.room) {
      for (const auto& f : s.room->furniture_placements) add_material(f.asset_id);
      add_material(kFloorMaterial);
      add_material(kWallMaterial);
      add_material(kTableMaterial);
    }
    const Vec3 center = orbit_center(s);
    Rng light_rng(stream(frame, "lighting"));
    s.lighting = sample_lighting(light_rng, assets_->hdris().size(), config_.lighting, center);
    if (s.room) {
      // Keep lights inside the walls so they are not shadowed by them.
      const double mx = s.room->width / 2 - 0.2, my = s.room->length / 2 - 0.2;
      for (auto& l : s.lighting.point_lights) {
        l.position.x = std::clamp(l.position.x, -mx, mx);
        l.position.y = std::clamp(l.position.y, -my, my);
      }
    }
    Rng hdri_rng(stream(hdri_epoch, "hdri"));
    s.lighting.hdri_id = static_cast<std::size_t>(
        hdri_rng.uniform_int(0, static_cast<long long>(assets_->hdris().size()) - 1));
    Rng fx_rng(stream(frame, "postfx"));
    s.postfx = sample_postfx(fx_rng, config_.postfx);
    Rng cam_rng(stream(frame, "camera"));
    s.camera = sample_camera(cam_rng, center, config_.configuration.camera_radius.sample(cam_rng),
                             config_.configuration.camera_vertical_fov_deg * kPi / 180.0,
                             options_.width, options_.height);
  }

  static const std::string& pick(Rng& rng, const std::vector<std::string>& ids) {
    return ids[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(ids.size()) - 1))];
  }

  std::shared_ptr<const AssetStore> assets_;
  RandomizationConfig config_;
  GeneratorOptions options_;
  std::vector<std::string> targets_;
  std::vector<std::string> distractors_;
};

// ---------------------------------------------------------------------------
// Serialization, used for digests and debugging dumps.

inline nlohmann::json vec_json(Vec3 v) { return {v.x, v.y, v.z}; }
inline nlohmann::json quat_json(Quat q) { return {q.w, q.x, q.y, q.z}; }

inline nlohmann::json to_json(const MaterialParams& m) {
  return {{"albedo_desaturation", m.albedo_desaturation},
          {"albedo_add", m.albedo_add},
          {"albedo_brightness", m.albedo_brightness},
          {"diffuse_tint", vec_json(m.diffuse_tint)},
          {"roughness", m.roughness},
          {"metallic", m.metallic},
          {"specular_level", m.specular_level},
          {"emissive_color", vec_json(m.emissive_color)}};
}

inline nlohmann::json to_json(const PostFxParams& p) {
  return {{"tv_noise", p.tv_noise},         {"scan_lines", p.scan_lines},
          {"scan_line_spread", p.scan_line_spread}, {"vertical_lines", p.vertical_lines},
          {"splotches", p.splotches},       {"film_grain", p.film_grain},
          {"grain_amount", p.grain_amount}, {"grain_size", p.grain_size},
          {"color_amount", p.color_amount}, {"vignetting", p.vignetting}};
}

inline nlohmann::json to_json(const SceneConfig& s) {
  nlohmann::json j;
  j["mode"] = to_string(s.mode);
  j["frame_index"] = s.frame_index;
  if (s.room) {
    auto& r = j["room"];
    r["width"] = s.room->width;
    r["length"] = s.room->length;
    r["table_center"] = vec_json(s.room->table_pose.position);
    r["furniture"] = nlohmann::json::array();
    for (const auto& f : s.room->furniture_placements)
      r["furniture"].push_back({{"asset_id", f.asset_id},
                                {"position", vec_json(f.pose.position)},
                                {"orientation", quat_json(f.pose.orientation)},
                                {"wall", f.wall}});
  }
  j["objects"] = nlohmann::json::array();
  for (const auto& p : s.object_poses)
    j["objects"].push_back({{"asset_id", p.asset_id},
                            {"position", vec_json(p.position)},
                            {"orientation", quat_json(p.orientation)},
                            {"distractor", p.is_distractor}});
  j["discarded"] = s.discarded;
  j["camera"] = {{"position", vec_json(s.camera.position)},
                 {"look_at", vec_json(s.camera.look_at)},
                 {"vertical_fov", s.camera.vertical_fov},
                 {"resolution", {s.camera.width, s.camera.height}}};
  for (const auto& [id, m] : s.materials) j["materials"][id] = to_json(m);
  auto& l = j["lighting"];
  l["ambient_intensity"] = s.lighting.ambient_intensity;
  l["hdri_id"] = s.lighting.hdri_id;
  l["point_lights"] = nlohmann::json::array();
  for (const auto& p : s.lighting.point_lights)
    l["point_lights"].push_back({{"position", vec_json(p.position)},
                                 {"intensity", p.intensity},
                                 {"color", vec_json(p.color)}});
  j["postfx"] = to_json(s.postfx);
  return j;
}

inline std::string digest(const SceneConfig& s) { return sha256_hex(to_json(s).dump()); }

}  // namespace synthdet::scene
