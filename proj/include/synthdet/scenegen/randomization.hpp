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

// Randomization parameters and their file format. Defaults are the rendering
// randomization table used for the large-scale runs: material refresh every
// 20 frames, post-processing and ambient light every frame, HDRI every 2000
// frames, a new scene every 3000 frames.

#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <fstream>
#include <string>

#include "synthdet/core/error.hpp"
#include "synthdet/core/hash.hpp"
#include "synthdet/core/math.hpp"
#include "synthdet/core/rng.hpp"

namespace synthdet::scene {

struct UniformRange {
  double lo = 0.0;
  double hi = 0.0;

  double sample(Rng& rng) const { return rng.uniform(lo, hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Per-channel independent uniform over a box in RGB space.
struct UniformRange3 {
  Vec3 lo;
  Vec3 hi;

  Vec3 sample(Rng& rng) const {
    Vec3 v;
    for (int c = 0; c < 3; ++c) v[c] = rng.uniform(lo[c], hi[c]);
    return v;
  }
  bool contains(Vec3 v) const {
    for (int c = 0; c < 3; ++c)
      if (v[c] < lo[c] || v[c] > hi[c]) return false;
    return true;
  }
};

struct IntRange {
  long long lo = 0;
  long long hi = 0;

  long long sample(Rng& rng) const { return rng.uniform_int(lo, hi); }
};

struct Bernoulli {
  double p = 0.0;

  bool sample(Rng& rng) const { return rng.bernoulli(p); }
};

struct MaterialRandomization {
  UniformRange albedo_desaturation{0.0, 0.4};
  UniformRange albedo_add{-0.03, 0.5};
  UniformRange albedo_brightness{3.0, 4.0};
  UniformRange3 diffuse_tint{{0.2, 0.2, 0.2}, {1.0, 1.0, 1.0}};
  UniformRange roughness{0.5, 0.7};
  UniformRange metallic{0.5, 0.55};
  UniformRange specular_level{0.0, 1.0};
  UniformRange3 emissive_color{{0.0, 0.0, 0.0}, {0.3, 0.3, 0.3}};
  int period = 20;
};

struct PostFxRandomization {
  Bernoulli tv_noise{0.1};
  Bernoulli scan_lines{0.1};
  UniformRange scan_line_spread{0.1, 0.2};
  Bernoulli vertical_lines{0.1};
  Bernoulli splotches{0.1};
  Bernoulli film_grain{0.1};
  UniformRange grain_amount{0.0, 0.1};
  UniformRange grain_size{0.7, 1.0};
  UniformRange color_amount{0.0, 0.15};
  Bernoulli vignetting{0.1};
};

struct LightingRandomization {
  UniformRange ambient_intensity{0.1, 0.5};
  int hdri_period = 2000;
  IntRange point_light_count{1, 3};
  UniformRange point_light_intensity{1.0, 4.0};
  UniformRange point_light_distance{1.5, 3.0};
  UniformRange3 point_light_color{{0.8, 0.8, 0.8}, {1.0, 1.0, 1.0}};
};

struct SceneRandomization {
  UniformRange object_height{1.0, 5.0};
  UniformRange camera_radius{1.0, 1.0};
  double camera_vertical_fov_deg = 60.0;
  int scene_period = 3000;
  IntRange target_count{4, 10};
  IntRange distractor_count{3, 12};
  IntRange furniture_count{3, 6};
  UniformRange room_width{4.5, 5.0};
  UniformRange room_length_ratio{1.0, 1.1};
  Bernoulli table_mode{0.5};
};

struct RandomizationConfig {
  MaterialRandomization materials;
  PostFxRandomization postfx;
  LightingRandomization lighting;
  SceneRandomization configuration;

  void validate() const;
  nlohmann::json to_json() const;
  static RandomizationConfig from_json(const nlohmann::json& j);
  static RandomizationConfig load(const std::string& path);
  std::string digest() const { return sha256_hex(to_json().dump()); }
};

namespace detail {

inline nlohmann::json entry(const UniformRange& r) {
  return {{"dist", "uniform"}, {"lo", r.lo}, {"hi", r.hi}};
}
inline nlohmann::json entry(const UniformRange3& r) {
  return {{"dist", "uniform"},
          {"lo", {r.lo.x, r.lo.y, r.lo.z}},
          {"hi", {r.hi.x, r.hi.y, r.hi.z}}};
}
inline nlohmann::json entry(const IntRange& r) {
  return {{"dist", "uniform"}, {"lo", r.lo}, {"hi", r.hi}};
}
inline nlohmann::json entry(const Bernoulli& b) { return {{"dist", "bernoulli"}, {"p", b.p}}; }

inline const nlohmann::json* find(const nlohmann::json& section, const char* key,
                                  const char* dist) {
  const auto it = section.find(key);
  if (it == section.end()) return nullptr;
  if (!it->is_object()) throw ConfigError(std::string("entry '") + key + "' must be an object");
  const auto d = it->find("dist");
  if (d == it->end() || !d->is_string() || d->get<std::string>() != dist)
    throw ConfigError(std::string("entry '") + key + "' must have dist: " + dist);
  return &*it;
}

inline void read(const nlohmann::json& s, const char* key, UniformRange& r) {
  if (const auto* e = find(s, key, "uniform")) {
    r.lo = e->at("lo").get<double>();
    r.hi = e->at("hi").get<double>();
  }
}
inline void read(const nlohmann::json& s, const char* key, UniformRange3& r) {
  if (const auto* e = find(s, key, "uniform")) {
    auto vec = [&](const char* k) {
      const auto& a = e->at(k);
      if (a.is_number()) {
        const double v = a.get<double>();
        return Vec3{v, v, v};
      }
      if (!a.is_array() || a.size() != 3)
        throw ConfigError(std::string("entry '") + key + "': " + k + " must be a 3-vector");
      return Vec3{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
    };
    r.lo = vec("lo");
    r.hi = vec("hi");
  }
}
inline void read(const nlohmann::json& s, const char* key, IntRange& r) {
  if (const auto* e = find(s, key, "uniform")) {
    r.lo = e->at("lo").get<long long>();
    r.hi = e->at("hi").get<long long>();
  }
}
inline void read(const nlohmann::json& s, const char* key, Bernoulli& b) {
  if (const auto* e = find(s, key, "bernoulli")) b.p = e->at("p").get<double>();
}
template <typename T>
void read_scalar(const nlohmann::json& s, const char* key, T& v) {
  if (const auto it = s.find(key); it != s.end()) v = it->get<T>();
}

inline void check(const UniformRange& r, const char* name) {
  if (!(r.lo <= r.hi)) throw ConfigError(std::string(name) + ": lo > hi");
}
inline void check(const UniformRange3& r, const char* name) {
  for (int c = 0; c < 3; ++c)
    if (!(r.lo[c] <= r.hi[c])) throw ConfigError(std::string(name) + ": lo > hi");
}
inline void check(const IntRange& r, const char* name) {
  if (r.lo > r.hi || r.lo < 0) throw ConfigError(std::string(name) + ": invalid integer range");
}
inline void check(const Bernoulli& b, const char* name) {
  if (!(b.p >= 0.0 && b.p <= 1.0)) throw ConfigError(std::string(name) + ": p outside [0,1]");
}

}  // namespace detail

// Each field is listed once per section; the macros keep serialization,
// parsing and validation in sync.
#define SYNTHDET_MATERIAL_FIELDS(X)                                                   \
  X(albedo_desaturation) X(albedo_add) X(albedo_brightness) X(diffuse_tint) X(roughness) \
  X(metallic) X(specular_level) X(emissive_color)
#define SYNTHDET_POSTFX_FIELDS(X)                                                  \
  X(tv_noise) X(scan_lines) X(scan_line_spread) X(vertical_lines) X(splotches)     \
  X(film_grain) X(grain_amount) X(grain_size) X(color_amount) X(vignetting)
#define SYNTHDET_LIGHTING_FIELDS(X)                                                 \
  X(ambient_intensity) X(point_light_count) X(point_light_intensity)                \
  X(point_light_distance) X(point_light_color)
#define SYNTHDET_SCENE_FIELDS(X)                                                      \
  X(object_height) X(camera_radius) X(target_count) X(distractor_count) X(furniture_count) \
  X(room_width) X(room_length_ratio) X(table_mode)

inline nlohmann::json RandomizationConfig::to_json() const {
  nlohmann::json j;
#define X(f) j["materials"][#f] = detail::entry(materials.f);
  SYNTHDET_MATERIAL_FIELDS(X)
#undef X
  j["materials"]["period"] = materials.period;
#define X(f) j["postfx"][#f] = detail::entry(postfx.f);
  SYNTHDET_POSTFX_FIELDS(X)
#undef X
#define X(f) j["lighting"][#f] = detail::entry(lighting.f);
  SYNTHDET_LIGHTING_FIELDS(X)
#undef X
  j["lighting"]["hdri_period"] = lighting.hdri_period;
#define X(f) j["configuration"][#f] = detail::entry(configuration.f);
  SYNTHDET_SCENE_FIELDS(X)
#undef X
  j["configuration"]["scene_period"] = configuration.scene_period;
  j["configuration"]["camera_vertical_fov_deg"] = configuration.camera_vertical_fov_deg;
  return j;
}

/// Parses a config document. Missing sections or entries keep their
/// defaults; unknown sections are rejected.
inline RandomizationConfig RandomizationConfig::from_json(const nlohmann::json& j) {
  RandomizationConfig c;
  if (!j.is_object()) throw ConfigError("randomization config must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "materials" && key != "postfx" && key != "lighting" && key != "configuration")
      throw ConfigError("unknown randomization section '" + key + "'");
  static const nlohmann::json kEmpty = nlohmann::json::object();
  auto section = [&](const char* name) -> const nlohmann::json& {
    const auto it = j.find(name);
    return it == j.end() ? kEmpty : *it;
  };
  try {
    const auto& m = section("materials");
#define X(f) detail::read(m, #f, c.materials.f);
    SYNTHDET_MATERIAL_FIELDS(X)
#undef X
    detail::read_scalar(m, "period", c.materials.period);
    const auto& p = section("postfx");
#define X(f) detail::read(p, #f, c.postfx.f);
    SYNTHDET_POSTFX_FIELDS(X)
#undef X
    const auto& l = section("lighting");
#define X(f) detail::read(l, #f, c.lighting.f);
    SYNTHDET_LIGHTING_FIELDS(X)
#undef X
    detail::read_scalar(l, "hdri_period", c.lighting.hdri_period);
    const auto& s = section("configuration");
#define X(f) detail::read(s, #f, c.configuration.f);
    SYNTHDET_SCENE_FIELDS(X)
#undef X
    detail::read_scalar(s, "scene_period", c.configuration.scene_period);
    detail::read_scalar(s, "camera_vertical_fov_deg", c.configuration.camera_vertical_fov_deg);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("randomization config: ") + e.what());
  }
  c.validate();
  return c;
}

inline void RandomizationConfig::validate() const {
#define X(f) detail::check(materials.f, "materials." #f);
  SYNTHDET_MATERIAL_FIELDS(X)
#undef X
#define X(f) detail::check(postfx.f, "postfx." #f);
  SYNTHDET_POSTFX_FIELDS(X)
#undef X
#define X(f) detail::check(lighting.f, "lighting." #f);
  SYNTHDET_LIGHTING_FIELDS(X)
#undef X
#define X(f) detail::check(configuration.f, "configuration." #f);
  SYNTHDET_SCENE_FIELDS(X)
#undef X
  if (materials.period < 1 || lighting.hdri_period < 1 || configuration.scene_period < 1)
    throw ConfigError("refresh periods must be >= 1");
  if (configuration.camera_radius.lo <= 0.0) throw ConfigError("camera radius must be positive");
  if (!(configuration.camera_vertical_fov_deg > 0.0 && configuration.camera_vertical_fov_deg < 180.0))
    throw ConfigError("camera field of view must be in (0, 180) degrees");
}

inline RandomizationConfig RandomizationConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open randomization config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
  return from_json(j);
}

}  // namespace synthdet::scene
