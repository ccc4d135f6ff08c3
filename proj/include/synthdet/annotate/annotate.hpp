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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthdet/core/assets.hpp"
#include "synthdet/core/bbox.hpp"
#include "synthdet/core/image.hpp"
#include "synthdet/render/camera.hpp"
#include "synthdet/render/renderer.hpp"
#include "synthdet/scenegen/scene.hpp"

namespace synthdet::annotate {

struct Annotation {
  std::uint16_t instance_id = 0;  // 1-based index into the scene's object poses
  std::int64_t category_id = 0;
  std::string asset_id;
  BBox bbox_modal;   // tight extent of the visible pixels
  BBox bbox_amodal;  // projected extent of the whole mesh, clipped
  double visibility = 0.0;
  std::int64_t pixel_count = 0;
};

struct AnnotateParams {
  double min_visibility = 0.1;
  std::int64_t min_pixels = 16;
};

/// Extents and pixel counts of every non-zero id, in one pass.
inline std::map<std::uint16_t, MaskExtent> mask_extents(const InstanceMap& map) {
  struct Acc {
    int x0, y0, x1, y1;
    std::int64_t n;
  };
  std::map<std::uint16_t, Acc> acc;
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const auto id = map.at(x, y);
      if (id == 0) continue;
      auto [it, fresh] = acc.try_emplace(id, Acc{x, y, x, y, 0});
      Acc& a = it->second;
      a.x0 = std::min(a.x0, x);
      a.x1 = std::max(a.x1, x);
      a.y0 = std::min(a.y0, y);
      a.y1 = std::max(a.y1, y);
      ++a.n;
    }
  std::map<std::uint16_t, MaskExtent> out;
  for (const auto& [id, a] : acc)
    out[id] = {BBox{static_cast<double>(a.x0), static_cast<double>(a.y0),
                    static_cast<double>(a.x1 - a.x0 + 1), static_cast<double>(a.y1 - a.y0 + 1)},
               a.n};
  return out;
}

/// Fraction of the instance's unoccluded footprint that survives occlusion.
inline double visibility(std::uint16_t id, const InstanceMap& occluded, const InstanceMap& solo) {
  if (occluded.width() != solo.width() || occluded.height() != solo.height())
    throw ConfigError("visibility: instance maps differ in size");
  std::int64_t seen = 0, total = 0;
  const auto a = occluded.pixels(), b = solo.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    seen += a[i] == id;
    total += b[i] == id;
  }
  return total == 0 ? 0.0 : static_cast<double>(seen) / static_cast<double>(total);
}

/// Extent of the projected mesh vertices, clipped to the image. Empty when
/// every vertex is behind the camera; the full image when only some are.
inline std::optional<BBox> project_amodal_bbox(const TriangleMesh& mesh, const Pose3& pose,
                                               const scene::CameraSpec& camera) {
  const render::PinholeCamera cam(camera);
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  std::size_t behind = 0;
  for (const auto& v : mesh.positions) {
    const auto p = cam.project(pose.apply(v));
    if (!p) {
      ++behind;
      continue;
    }
    x0 = std::min(x0, p->x);
    x1 = std::max(x1, p->x);
    y0 = std::min(y0, p->y);
    y1 = std::max(y1, p->y);
  }
  if (behind == mesh.positions.size()) return std::nullopt;
  if (behind > 0) return BBox{0, 0, static_cast<double>(camera.width), static_cast<double>(camera.height)};
  return BBox::from_corners(x0, y0, x1, y1).clipped(camera.width, camera.height);
}

/// Pixel rectangle (x0, y0, x1, y1) covering a continuous box.
inline std::array<int, 4> pixel_region(const BBox& b) {
  return {static_cast<int>(std::floor(b.x)), static_cast<int>(std::floor(b.y)),
          static_cast<int>(std::ceil(b.right())) + 1, static_cast<int>(std::ceil(b.bottom())) + 1};
}

/// Ground truth for one rendered frame. Visibility compares the frame's
/// instance map against a geometry-only render of each object alone,
/// restricted to its amodal box.
inline std::vector<Annotation> extract_annotations(const render::RenderOutput& out,
                                                   const scene::SceneConfig& scene,
                                                   const AssetStore& assets,
                                                   const AnnotateParams& params = {}) {
  std::vector<Annotation> result;
  for (const auto& [id, ext] : mask_extents(out.instance_map)) {
    if (id == 0 || id > scene.object_poses.size()) continue;
    const auto& pose = scene.object_poses[id - 1];
    if (pose.is_distractor) continue;
    const MeshAsset& asset = assets.mesh(pose.asset_id);
    if (asset.distractor) continue;
    if (ext.pixel_count < params.min_pixels) continue;
    const auto amodal = project_amodal_bbox(*asset.mesh, pose.pose(), scene.camera);
    const BBox amodal_box = amodal.value_or(
        BBox{0, 0, static_cast<double>(scene.camera.width), static_cast<double>(scene.camera.height)});
    const InstanceMap solo =
        render::render_solo_ids(scene, assets, id - 1u, pixel_region(amodal_box));
    const double vis = visibility(id, out.instance_map, solo);
    if (vis < params.min_visibility) continue;
    result.push_back({id, asset.category_id, asset.id, ext.box, amodal_box, vis, ext.pixel_count});
  }
  return result;
}

}  // namespace synthdet::annotate
