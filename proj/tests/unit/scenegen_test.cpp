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


#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "synthdet/scenegen/randomization.hpp"
#include "synthdet/scenegen/scene.hpp"
#include "test_assets.hpp"

namespace synthdet::scene {
namespace {

double overlap_volume(const Aabb& a, const Aabb& b) {
  double v = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double d = std::min(a.hi[k], b.hi[k]) - std::max(a.lo[k], b.lo[k]);
    if (d <= 0) return 0.0;
    v *= d;
  }
  return v;
}

Aabb world_box(const TriangleMesh& mesh, const ObjectPose& p) {
  Aabb b;
  for (const auto& v : mesh.positions) b.extend(p.pose().apply(v));
  return b;
}

TEST(RandomizationConfig, DefaultsMatchTable) {
  const RandomizationConfig c;
  EXPECT_EQ(c.materials.albedo_desaturation.lo, 0.0);
  EXPECT_EQ(c.materials.albedo_desaturation.hi, 0.4);
  EXPECT_EQ(c.materials.albedo_add.lo, -0.03);
  EXPECT_EQ(c.materials.albedo_add.hi, 0.5);
  EXPECT_EQ(c.materials.albedo_brightness.lo, 3.0);
  EXPECT_EQ(c.materials.albedo_brightness.hi, 4.0);
  EXPECT_EQ(c.materials.diffuse_tint.lo.x, 0.2);
  EXPECT_EQ(c.materials.roughness.lo, 0.5);
  EXPECT_EQ(c.materials.roughness.hi, 0.7);
  EXPECT_EQ(c.materials.metallic.lo, 0.5);
  EXPECT_EQ(c.materials.metallic.hi, 0.55);
  EXPECT_EQ(c.materials.emissive_color.hi.y, 0.3);
  EXPECT_EQ(c.materials.period, 20);
  EXPECT_EQ(c.postfx.film_grain.p, 0.1);
  EXPECT_EQ(c.postfx.color_amount.hi, 0.15);
  EXPECT_EQ(c.lighting.ambient_intensity.lo, 0.1);
  EXPECT_EQ(c.lighting.ambient_intensity.hi, 0.5);
  EXPECT_EQ(c.lighting.hdri_period, 2000);
  EXPECT_EQ(c.configuration.object_height.lo, 1.0);
  EXPECT_EQ(c.configuration.object_height.hi, 5.0);
  EXPECT_EQ(c.configuration.camera_radius.lo, 1.0);
  EXPECT_EQ(c.configuration.scene_period, 3000);
}

TEST(RandomizationConfig, JsonRoundTrip) {
  RandomizationConfig c;
  c.materials.metallic = {0.9, 1.0};
  c.postfx.vignetting.p = 0.7;
  c.lighting.point_light_color.lo = {0.1, 0.2, 0.3};
  c.configuration.scene_period = 17;
  const auto back = RandomizationConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.digest(), c.digest());
  EXPECT_NE(back.digest(), RandomizationConfig{}.digest());
}

TEST(RandomizationConfig, PartialDocumentKeepsDefaults) {
  const auto c = RandomizationConfig::from_json(
      nlohmann::json::parse(R"({"materials": {"metallic": {"dist": "uniform", "lo": 1, "hi": 1}}})"));
  EXPECT_EQ(c.materials.metallic.lo, 1.0);
  EXPECT_EQ(c.materials.roughness.hi, 0.7);
  EXPECT_EQ(c.lighting.hdri_period, 2000);
}

TEST(RandomizationConfig, RejectsMalformedEntries) {
  using nlohmann::json;
  EXPECT_THROW(RandomizationConfig::from_json(json::parse(R"({"colour": {}})")), ConfigError);
  EXPECT_THROW(RandomizationConfig::from_json(
                   json::parse(R"({"postfx": {"tv_noise": {"dist": "uniform", "lo": 0, "hi": 1}}})")),
               ConfigError);
  EXPECT_THROW(RandomizationConfig::from_json(
                   json::parse(R"({"materials": {"metallic": {"dist": "uniform", "lo": 1, "hi": 0}}})")),
               ConfigError);
  EXPECT_THROW(RandomizationConfig::from_json(
                   json::parse(R"({"postfx": {"tv_noise": {"dist": "bernoulli", "p": 1.5}}})")),
               ConfigError);
  EXPECT_THROW(RandomizationConfig::from_json(json::parse(R"({"materials": {"period": 0}})")),
               ConfigError);
  EXPECT_THROW(RandomizationConfig::from_json(
                   json::parse(R"({"materials": {"metallic": {"dist": "uniform", "lo": "a", "hi": 1}}})")),
               ConfigError);
}

TEST(SampleRoom, DeterministicForSeed) {
  const auto store = testgen::small_store();
  Rng a(42), b(42);
  const RoomSpec r1 = sample_room(a, store->furniture());
  const RoomSpec r2 = sample_room(b, store->furniture());
  EXPECT_EQ(r1.width, r2.width);
  EXPECT_EQ(r1.length, r2.length);
  ASSERT_EQ(r1.furniture_placements.size(), r2.furniture_placements.size());
  for (std::size_t i = 0; i < r1.furniture_placements.size(); ++i) {
    EXPECT_EQ(r1.furniture_placements[i].asset_id, r2.furniture_placements[i].asset_id);
    EXPECT_EQ(r1.furniture_placements[i].footprint, r2.furniture_placements[i].footprint);
  }
}

TEST(SampleRoom, RangesAndFootprints) {
  const auto store = testgen::small_store();
  Rng rng(7);
  double sum = 0;
  constexpr int kN = 10000;
  std::set<std::string> used;
  for (int i = 0; i < kN; ++i) {
    const RoomSpec r = sample_room(rng, store->furniture());
    ASSERT_GE(r.width, 4.5);
    ASSERT_LE(r.width, 5.0);
    ASSERT_GE(r.length / r.width, 1.0 - 1e-12);
    ASSERT_LE(r.length / r.width, 1.1 + 1e-12);
    sum += r.width;
    const Rect2 table = r.table_footprint();
    for (std::size_t k = 0; k < r.furniture_placements.size(); ++k) {
      const auto& f = r.furniture_placements[k];
      used.insert(f.asset_id);
      ASSERT_EQ(f.footprint.overlap_area(table), 0.0);
      ASSERT_GE(f.footprint.x0, -r.width / 2 + kWallClearance - 1e-9);
      ASSERT_LE(f.footprint.x1, r.width / 2 - kWallClearance + 1e-9);
      ASSERT_GE(f.footprint.y0, -r.length / 2 + kWallClearance - 1e-9);
      ASSERT_LE(f.footprint.y1, r.length / 2 - kWallClearance + 1e-9);
      // Rests on the floor.
      const Aabb b = world_box(*store->mesh(f.asset_id).mesh,
                               {f.asset_id, f.pose.position, f.pose.orientation});
      ASSERT_NEAR(b.lo.z, 0.0, 1e-9);
      for (std::size_t m = 0; m < k; ++m)
        ASSERT_EQ(f.footprint.overlap_area(r.furniture_placements[m].footprint), 0.0);
    }
  }
  // Mean of U(4.5, 5.0).
  EXPECT_NEAR(sum / kN, 4.75, 0.01);
  EXPECT_EQ(used.size(), 2u);
}

TEST(SampleRoom, EmptyFurnitureSetIsConfigError) {
  Rng rng(1);
  EXPECT_THROW(sample_room(rng, {}), ConfigError);
}

TEST(DropPlacements, HdriModeBounds) {
  Rng rng(3);
  const std::vector<DropItem> items(10, DropItem{"cube", false});
  const DropRegion region = DropRegion::for_mode(SceneMode::kHdriDrop, nullptr);
  for (int i = 0; i < 100; ++i) {
    for (const auto& p : sample_drop_placements(rng, items, region)) {
      ASSERT_GE(p.position.z, 1.0);
      ASSERT_LE(p.position.z, 5.0);
      ASSERT_LE(std::abs(p.position.x), 0.5);
      ASSERT_LE(std::abs(p.position.y), 0.5);
      ASSERT_NEAR(p.orientation.norm(), 1.0, 1e-9);
    }
  }
}

TEST(DropPlacements, TableModeWithinTable) {
  Rng rng(4);
  RoomSpec room;
  room.width = room.length = 4.8;
  room.table_pose.position = {0.3, -0.2, 0};
  const DropRegion region = DropRegion::for_mode(SceneMode::kTable, &room);
  const std::vector<DropItem> items(8, DropItem{"ball", true});
  for (int i = 0; i < 200; ++i) {
    for (const auto& p : sample_drop_placements(rng, items, region)) {
      ASSERT_LE(std::abs(p.position.x - 0.3), 0.5);
      ASSERT_LE(std::abs(p.position.y + 0.2), 0.5);
      ASSERT_GE(p.position.z, kTableHeight + 1.0);
      ASSERT_TRUE(p.is_distractor);
    }
  }
}

TEST(DropPlacements, DeterministicAndRejectsEmpty) {
  const std::vector<DropItem> items{{"cube", false}, {"ball", false}, {"slab", true}};
  Rng a(9), b(9);
  const auto p1 = sample_drop_placements(a, items, {});
  const auto p2 = sample_drop_placements(b, items, {});
  ASSERT_EQ(p1.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(p1[i].position, p2[i].position);
    EXPECT_EQ(p1[i].orientation.w, p2[i].orientation.w);
  }
  Rng c(1);
  EXPECT_THROW(sample_drop_placements(c, {}, {}), ConfigError);
}

ProxyFn unit_cube_proxy() {
  return [](const std::string&, Quat q) { return rotated_bounds(make_box({1, 1, 1}), q); };
}

TEST(Settle, SingleCubeRestsOnSupport) {
  Rng rng(1);
  std::vector<ObjectPose> poses{{"c", {0, 0, 3}, Quat{}, false, {}}};
  DropRegion region{{-5, -5, 5, 5}, 0.25};
  const auto r = settle(poses, region, unit_cube_proxy(), rng);
  ASSERT_EQ(r.poses.size(), 1u);
  EXPECT_EQ(r.poses[0].position.z, 0.75);
  EXPECT_EQ(r.poses[0].position.x, 0.0);
  EXPECT_EQ(r.poses[0].position.y, 0.0);
}

TEST(Settle, SecondCubeStacksExactlyOnFirst) {
  Rng rng(1);
  const ProxyFn half_cube = [](const std::string&, Quat q) {
    return rotated_bounds(make_box({0.5, 0.5, 0.5}), q);
  };
  std::vector<ObjectPose> poses{{"b", {0.1, 0.2, 4}, Quat{}, false, {}},
                                {"a", {0.1, 0.2, 2}, Quat{}, false, {}}};
  DropRegion region{{-5, -5, 5, 5}, 0.0};
  const auto r = settle(poses, region, half_cube, rng);
  ASSERT_EQ(r.poses.size(), 2u);
  EXPECT_EQ(r.poses[1].position.z, 0.25);  // lower drop lands first
  EXPECT_EQ(r.poses[0].position.z, 0.75);
  EXPECT_EQ(r.poses[0].position.x, 0.1);
  EXPECT_EQ(r.poses[0].position.y, 0.2);
}

TEST(Settle, TwentyObjectsDoNotInterpenetrate) {
  const auto store = testgen::small_store();
  const std::vector<std::string> ids{"cube", "ball", "can", "slab", "pebble"};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    std::vector<DropItem> items;
    for (int i = 0; i < 20; ++i) items.push_back({ids[i % ids.size()], false});
    const DropRegion region;
    const auto drops = sample_drop_placements(rng, items, region);
    const auto r = settle(drops, region, store_proxy(*store), rng);
    ASSERT_EQ(r.poses.size() + r.discarded.size(), 20u);
    std::vector<Aabb> boxes;
    for (const auto& p : r.poses) {
      const Aabb b = world_box(*store->mesh(p.asset_id).mesh, p);
      ASSERT_GE(b.lo.z, -1e-9);
      ASSERT_GE(b.lo.x, -0.5 - 1e-9);
      ASSERT_LE(b.hi.y, 0.5 + 1e-9);
      boxes.push_back(b);
    }
    for (std::size_t i = 0; i < boxes.size(); ++i)
      for (std::size_t j = i + 1; j < boxes.size(); ++j)
        ASSERT_LE(overlap_volume(boxes[i], boxes[j]), 1e-12) << "seed " << seed;
  }
}

TEST(Settle, TallPilesAreDiscarded) {
  Rng rng(5);
  const ProxyFn slab = [](const std::string&, Quat q) {
    return rotated_bounds(make_box({1, 1, 0.6}), q);
  };
  std::vector<ObjectPose> poses;
  for (int i = 0; i < 3; ++i) poses.push_back({"s", {0, 0, 1.0 + i}, Quat{}, false, {}});
  const DropRegion region;  // 1 x 1 m: every slab covers the whole region
  const auto r = settle(poses, region, slab, rng);
  EXPECT_EQ(r.poses.size(), 2u);
  ASSERT_EQ(r.discarded.size(), 1u);
}

TEST(SampleCamera, SphereHemisphereAndMeanDirection) {
  Rng rng(11);
  const Vec3 center{0.2, -0.1, 0.75};
  Vec3 sum;
  constexpr int kN = 100000;
  for (int i = 0; i < kN; ++i) {
    const CameraSpec c = sample_camera(rng, center, 1.0);
    ASSERT_NEAR(norm(c.position - center), 1.0, 1e-6);
    ASSERT_GE(c.position.z, center.z);
    ASSERT_EQ(c.look_at, center);
    ASSERT_EQ(c.width, 640);
    ASSERT_EQ(c.height, 480);
    sum += c.position - center;
  }
  // Uniform upper hemisphere has mean direction (0, 0, 1/2).
  const Vec3 mean = sum / kN;
  EXPECT_LE(norm(mean - Vec3{0, 0, 0.5}), 0.02 * 0.5);
  EXPECT_THROW(sample_camera(rng, center, 0.0), ConfigError);
}

TEST(SampleMaterials, RangesHold) {
  Rng rng(12);
  const MaterialRandomization cfg;
  for (int i = 0; i < 100000; ++i) {
    const MaterialParams m = sample_materials(rng);
    ASSERT_GE(m.metallic, 0.5);
    ASSERT_LE(m.metallic, 0.55);
    ASSERT_TRUE(cfg.albedo_desaturation.contains(m.albedo_desaturation));
    ASSERT_TRUE(cfg.albedo_add.contains(m.albedo_add));
    ASSERT_TRUE(cfg.albedo_brightness.contains(m.albedo_brightness));
    ASSERT_TRUE(cfg.diffuse_tint.contains(m.diffuse_tint));
    ASSERT_TRUE(cfg.roughness.contains(m.roughness));
    ASSERT_TRUE(cfg.specular_level.contains(m.specular_level));
    ASSERT_TRUE(cfg.emissive_color.contains(m.emissive_color));
  }
}

TEST(SamplePostFx, FlagRatesAndRanges) {
  Rng rng(13);
  const PostFxRandomization cfg;
  constexpr int kN = 10000;
  int grain = 0, vignette = 0, tv = 0;
  for (int i = 0; i < kN; ++i) {
    const PostFxParams p = sample_postfx(rng);
    grain += p.film_grain;
    vignette += p.vignetting;
    tv += p.tv_noise;
    ASSERT_TRUE(cfg.scan_line_spread.contains(p.scan_line_spread));
    ASSERT_TRUE(cfg.grain_amount.contains(p.grain_amount));
    ASSERT_TRUE(cfg.grain_size.contains(p.grain_size));
    ASSERT_TRUE(cfg.color_amount.contains(p.color_amount));
  }
  EXPECT_NEAR(static_cast<double>(grain) / kN, 0.1, 0.01);
  EXPECT_NEAR(static_cast<double>(vignette) / kN, 0.1, 0.01);
  EXPECT_NEAR(static_cast<double>(tv) / kN, 0.1, 0.01);
}

TEST(SampleLighting, RangesAndErrors) {
  Rng rng(14);
  const LightingRandomization cfg;
  std::set<std::size_t> ids;
  for (int i = 0; i < 10000; ++i) {
    const LightingSpec l = sample_lighting(rng, 50);
    ASSERT_GE(l.ambient_intensity, 0.1);
    ASSERT_LE(l.ambient_intensity, 0.5);
    ASSERT_LT(l.hdri_id, 50u);
    ids.insert(l.hdri_id);
    ASSERT_GE(l.point_lights.size(), 1u);
    ASSERT_LE(l.point_lights.size(), 3u);
    for (const auto& p : l.point_lights) {
      ASSERT_TRUE(cfg.point_light_distance.contains(norm(p.position)));
      ASSERT_GE(p.position.z, 0.0);
      ASSERT_TRUE(cfg.point_light_intensity.contains(p.intensity));
    }
  }
  EXPECT_EQ(ids.size(), 50u);
  EXPECT_THROW(sample_lighting(rng, 0), ConfigError);
}

SceneGenerator make_generator(std::uint64_t seed, std::optional<SceneMode> mode = {}) {
  GeneratorOptions o;
  o.seed = seed;
  o.force_mode = mode;
  return SceneGenerator(testgen::small_store(), RandomizationConfig{}, o);
}

std::string geometry_digest(const SceneConfig& s) {
  auto j = to_json(s);
  return sha256_hex(j["objects"].dump() + (s.room ? j["room"].dump() : "") + j["mode"].dump());
}

TEST(Schedule, SceneRebuildsEvery3000Frames) {
  const auto gen = make_generator(21);
  int events = 0, changes = 0;
  SceneConfig prev;
  std::string prev_digest;
  for (std::int64_t f = 0; f < 6000; ++f) {
    events += gen.refresh_events(f).scene;
    SceneConfig s = gen.schedule(f, f ? &prev : nullptr);
    const std::string d = geometry_digest(s);
    if (f == 0 || d != prev_digest) ++changes;
    prev_digest = d;
    prev = std::move(s);
  }
  EXPECT_EQ(events, 2);
  EXPECT_EQ(changes, 2);
}

TEST(Schedule, HdriSwitchesEvery2000Frames) {
  const auto gen = make_generator(22);
  int events = 0;
  std::set<std::size_t> per_epoch[2];
  SceneConfig prev;
  for (std::int64_t f = 0; f < 4000; ++f) {
    events += gen.refresh_events(f).hdri;
    SceneConfig s = gen.schedule(f, f ? &prev : nullptr);
    per_epoch[f / 2000].insert(s.lighting.hdri_id);
    prev = std::move(s);
  }
  EXPECT_EQ(events, 2);
  EXPECT_EQ(per_epoch[0].size(), 1u);
  EXPECT_EQ(per_epoch[1].size(), 1u);
}

TEST(Schedule, MaterialsRefreshEvery20Frames) {
  const auto gen = make_generator(23);
  int events = 0, changes = 0, ambient_changes = 0, camera_changes = 0;
  SceneConfig prev;
  for (std::int64_t f = 0; f < 100; ++f) {
    events += gen.refresh_events(f).materials;
    SceneConfig s = gen.schedule(f, f ? &prev : nullptr);
    if (f == 0) {
      ++changes;
    } else {
      const auto& id = s.object_poses.front().asset_id;
      if (to_json(s.materials.at(id)) != to_json(prev.materials.at(id))) ++changes;
      ambient_changes += s.lighting.ambient_intensity != prev.lighting.ambient_intensity;
      camera_changes += !(s.camera.position == prev.camera.position);
    }
    prev = std::move(s);
  }
  EXPECT_EQ(events, 5);
  EXPECT_EQ(changes, 5);
  EXPECT_EQ(ambient_changes, 99);
  EXPECT_EQ(camera_changes, 99);
}

TEST(Schedule, IncrementalEqualsDirectAndIsDeterministic) {
  const auto gen = make_generator(24);
  const auto again = make_generator(24);
  SceneConfig prev;
  for (std::int64_t f = 2990; f < 3010; ++f) {
    SceneConfig s = gen.schedule(f, f > 2990 ? &prev : nullptr);
    ASSERT_EQ(digest(s), digest(gen.config_at(f)));
    ASSERT_EQ(digest(s), digest(again.config_at(f)));
    prev = std::move(s);
  }
  // Out-of-order evaluation gives the same frames.
  EXPECT_EQ(digest(gen.config_at(7)), digest(gen.schedule(7, &prev)));
  EXPECT_NE(digest(make_generator(25).config_at(7)), digest(gen.config_at(7)));
}

TEST(Schedule, GeneratedScenesRespectInvariants) {
  for (const auto mode : {SceneMode::kTable, SceneMode::kHdriDrop}) {
    const auto gen = make_generator(26, mode);
    const auto store = testgen::small_store();
    const RandomizationConfig cfg;
    for (std::int64_t f = 0; f < 40; ++f) {
      const SceneConfig s = gen.config_at(f * 1500 + f);
      ASSERT_NO_THROW(s.validate());
      EXPECT_EQ(s.room.has_value(), mode == SceneMode::kTable);
      const Vec3 center = gen.orbit_center(s);
      EXPECT_NEAR(norm(s.camera.position - center), 1.0, 1e-6);
      std::size_t targets = 0, distractors = 0;
      for (const auto& p : s.object_poses) (p.is_distractor ? distractors : targets)++;
      EXPECT_LE(targets, 10u);
      EXPECT_LE(distractors, 12u);
      EXPECT_GE(targets + distractors + s.discarded.size(), 7u);
      for (const auto& [id, m] : s.materials) EXPECT_TRUE(cfg.materials.metallic.contains(m.metallic));
      EXPECT_TRUE(cfg.lighting.ambient_intensity.contains(s.lighting.ambient_intensity));
      EXPECT_LT(s.lighting.hdri_id, 2u);
      if (s.room) {
        EXPECT_TRUE(s.materials.count(kFloorMaterial));
        for (const auto& p : s.object_poses) {
          const Aabb b = world_box(*store->mesh(p.asset_id).mesh, p);
          EXPECT_GE(b.lo.z, kTableHeight - 1e-9);
        }
      }
    }
  }
}

}  // namespace
}  // namespace synthdet::scene
