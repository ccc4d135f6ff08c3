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


// Asset manifest: the meshes, HDRIs and image corpora a run draws from.
//
//   {
//     "objects":   [{"id": "mug", "mesh": "meshes/mug.obj", "category_id": 1,
//                    "category_name": "mug"},
//                   {"id": "pebble", "builtin": {"shape": "sphere", "radius": 0.03},
//                    "distractor": true}],
//     "furniture": [{"id": "sofa", "builtin": {"shape": "box", "size": [2, 0.9, 0.8]}}],
//     "hdris":     [{"id": "studio", "image": "hdri/studio.pfm"},
//                   {"id": "sky", "builtin": {"kind": "procedural_sky", "height": 64, "seed": 3}}],
//     "backgrounds": "backgrounds",
//     "reflectance": "reflectance"
//   }
//
// Relative paths resolve against the manifest's directory.

#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <set>
#include <string>

#include "synthdet/core/assets.hpp"
#include "synthdet/core/error.hpp"
#include "synthdet/core/mesh.hpp"
#include "synthdet/datasetio/coco.hpp"
#include "synthdet/datasetio/image_io.hpp"
#include "synthdet/render/hdri.hpp"

namespace synthdet::io {

struct AssetManifest {
  std::shared_ptr<AssetStore> store;
  std::string backgrounds_dir;  // empty if not given
  std::string reflectance_dir;  // empty if not given
};

namespace detail {

inline Vec3 vec3_of(const nlohmann::json& j) {
  if (j.is_number()) return Vec3{1, 1, 1} * j.get<double>();
  if (!j.is_array() || j.size() != 3) throw LoadError("expected a number or a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline void check_keys(const nlohmann::json& e, const std::set<std::string>& allowed) {
  for (const auto& [k, _] : e.items())
    if (!allowed.count(k)) throw LoadError("unknown key '" + k + "'");
}

inline TriangleMesh builtin_mesh(const nlohmann::json& b) {
  const auto shape = b.at("shape").get<std::string>();
  if (shape == "box") return make_box(vec3_of(b.at("size")));
  if (shape == "sphere") return make_sphere(b.at("radius").get<double>());
  if (shape == "cylinder") return make_cylinder(b.at("radius").get<double>(), b.at("height").get<double>());
  throw LoadError("unknown builtin shape '" + shape + "'");
}

inline Image texture_of(const nlohmann::json& t, const std::filesystem::path& base) {
  if (t.is_string()) return load_image((base / t.get<std::string>()).string());
  if (t.is_object() && t.contains("checker")) {
    const auto& c = t["checker"];
    return make_checker_texture(c.value("size", 64), c.value("cells", 8), vec3_of(c.value("a", nlohmann::json(0.9))),
                                vec3_of(c.value("b", nlohmann::json(0.2))));
  }
  throw LoadError("texture must be a path or {\"checker\": {...}}");
}

inline MeshAsset mesh_entry(const nlohmann::json& e, const std::filesystem::path& base, AssetRole role) {
  check_keys(e, {"id", "mesh", "builtin", "texture", "color", "category_id", "category_name", "distractor"});
  const auto id = e.at("id").get<std::string>();
  TriangleMesh mesh;
  if (e.contains("mesh") == e.contains("builtin")) throw LoadError("give exactly one of 'mesh' or 'builtin'");
  mesh = e.contains("mesh") ? load_obj((base / e["mesh"].get<std::string>()).string()) : builtin_mesh(e["builtin"]);
  if (e.contains("texture")) mesh.texture = texture_of(e["texture"], base);
  if (e.contains("color")) mesh.base_color = vec3_of(e["color"]);
  const bool distractor = e.value("distractor", false);
  const auto cat = e.value("category_id", static_cast<std::int64_t>(0));
  if (role == AssetRole::kObject && !distractor && cat <= 0)
    throw LoadError("labelled objects need a positive category_id");
  return MeshAsset::make(id, std::move(mesh), cat, e.value("category_name", id), distractor, role);
}

inline HdriAsset hdri_entry(const nlohmann::json& e, const std::filesystem::path& base) {
  check_keys(e, {"id", "image", "builtin", "scale"});
  HdriAsset h;
  h.id = e.at("id").get<std::string>();
  if (e.contains("image") == e.contains("builtin")) throw LoadError("give exactly one of 'image' or 'builtin'");
  if (e.contains("image")) {
    h.env = load_image((base / e["image"].get<std::string>()).string());
  } else {
    const auto& b = e["builtin"];
    if (b.value("kind", std::string()) != "procedural_sky") throw LoadError("unknown builtin HDRI kind");
    h.env = render::make_procedural_sky(b.value("height", 64), b.value("seed", static_cast<std::uint64_t>(0)));
  }
  if (e.contains("scale"))
    for (float& v : h.env.values()) v *= e["scale"].get<float>();
  return h;
}

}  // namespace detail

/// Loads and validates every asset. Any failure is a LoadError naming the
/// offending asset; malformed JSON is a ParseError.
inline AssetManifest load_asset_manifest(const std::string& path) {
  namespace fs = std::filesystem;
  const nlohmann::json j = detail::parse_file(path);
  const fs::path base = fs::path(path).parent_path();
  if (!j.is_object()) throw LoadError(path + ": asset manifest must be an object");
  detail::check_keys(j, {"objects", "furniture", "hdris", "backgrounds", "reflectance"});
  AssetManifest m;
  m.store = std::make_shared<AssetStore>();
  auto each = [&](const char* section, auto&& fn) {
    const auto it = j.find(section);
    if (it == j.end()) return;
    if (!it->is_array()) throw LoadError(path + ": '" + section + "' must be a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& e = (*it)[i];
      const std::string name = e.is_object() && e.contains("id") && e["id"].is_string()
                                   ? "'" + e["id"].get<std::string>() + "'"
                                   : std::string(section) + "[" + std::to_string(i) + "]";
      try {
        if (!e.is_object()) throw LoadError("entry must be an object");
        fn(e);
      } catch (const nlohmann::json::exception& x) {
        throw LoadError("asset " + name + ": " + x.what());
      } catch (const Error& x) {
        const std::string what = x.what();
        if (what.find(name) != std::string::npos) throw LoadError(what);
        throw LoadError("asset " + name + ": " + what);
      }
    }
  };
  each("objects", [&](const nlohmann::json& e) { m.store->add(detail::mesh_entry(e, base, AssetRole::kObject)); });
  each("furniture", [&](const nlohmann::json& e) { m.store->add(detail::mesh_entry(e, base, AssetRole::kFurniture)); });
  each("hdris", [&](const nlohmann::json& e) { m.store->add(detail::hdri_entry(e, base)); });
  if (j.contains("backgrounds")) m.backgrounds_dir = (base / j["backgrounds"].get<std::string>()).string();
  if (j.contains("reflectance")) m.reflectance_dir = (base / j["reflectance"].get<std::string>()).string();
  return m;
}

inline std::shared_ptr<AssetStore> load_assets(const std::string& path) { return load_asset_manifest(path).store; }

}  // namespace synthdet::io
