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


// On-disk dataset layout:
//
//   <dir>/rgb/NNNNNN.png        8-bit RGB frame
//   <dir>/instance/NNNNNN.png   16-bit instance ids (0 = background)
//   <dir>/annotations.json      COCO annotations, image id = frame index
//   <dir>/scene_gt_info.json    per-instance visibility and amodal boxes
//   <dir>/manifest.json         seed, digests, per-frame records
//
// The directory names follow the BOP convention, but the files are not
// meant to be read by BOP tooling.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "synthdet/annotate/annotate.hpp"
#include "synthdet/core/error.hpp"
#include "synthdet/core/hash.hpp"
#include "synthdet/datasetio/coco.hpp"
#include "synthdet/datasetio/image_io.hpp"

namespace synthdet::io {

/// Everything recorded about one frame except its pixels.
struct FrameEntry {
  std::int64_t frame_index = 0;
  int width = 0;
  int height = 0;
  std::string image;         // relative to the dataset root
  std::string instance_map;  // relative to the dataset root
  std::string rgb_digest;       // SHA-256 of the 8-bit pixel bytes
  std::string instance_digest;  // SHA-256 of the 16-bit id values
  std::string scene_digest;
  std::vector<std::string> discarded;
  std::vector<annotate::Annotation> annotations;
  nlohmann::json provenance = nlohmann::json::object();
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string asset_digest;
  std::map<std::int64_t, std::string> categories;
  nlohmann::json extra = nlohmann::json::object();
  std::vector<FrameEntry> frames;

  std::size_t frame_count() const { return frames.size(); }

  nlohmann::json to_json() const {
    nlohmann::json fr = nlohmann::json::array();
    for (const auto& f : frames) {
      nlohmann::json e{{"frame_index", f.frame_index},
                       {"width", f.width},
                       {"height", f.height},
                       {"image", f.image},
                       {"instance_map", f.instance_map},
                       {"rgb_sha256", f.rgb_digest},
                       {"instance_sha256", f.instance_digest},
                       {"scene_digest", f.scene_digest},
                       {"discarded", f.discarded}};
      if (!f.provenance.empty()) e["provenance"] = f.provenance;
      fr.push_back(std::move(e));
    }
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [id, name] : categories) cats[std::to_string(id)] = name;
    std::vector<std::string> discards;
    for (const auto& f : frames) discards.insert(discards.end(), f.discarded.begin(), f.discarded.end());
    return {{"seed", seed},
            {"frame_count", frames.size()},
            {"config_digest", config_digest},
            {"asset_digest", asset_digest},
            {"categories", cats},
            {"extra", extra},
            {"discarded_total", discards.size()},
            {"frames", fr}};
  }

  /// Sorted keys, two-space indent, trailing newline.
  std::string canonical() const { return to_json().dump(2) + "\n"; }
  std::string digest() const { return sha256_hex(canonical()); }

  static DatasetManifest from_json(const nlohmann::json& j) {
    DatasetManifest m;
    try {
      m.seed = j.at("seed").get<std::uint64_t>();
      m.config_digest = j.at("config_digest").get<std::string>();
      m.asset_digest = j.at("asset_digest").get<std::string>();
      for (const auto& [k, v] : j.at("categories").items()) m.categories[std::stoll(k)] = v.get<std::string>();
      m.extra = j.value("extra", nlohmann::json::object());
      for (const auto& e : j.at("frames")) {
        FrameEntry f;
        f.frame_index = e.at("frame_index").get<std::int64_t>();
        f.width = e.at("width").get<int>();
        f.height = e.at("height").get<int>();
        f.image = e.at("image").get<std::string>();
        f.instance_map = e.at("instance_map").get<std::string>();
        f.rgb_digest = e.at("rgb_sha256").get<std::string>();
        f.instance_digest = e.at("instance_sha256").get<std::string>();
        f.scene_digest = e.at("scene_digest").get<std::string>();
        f.discarded = e.at("discarded").get<std::vector<std::string>>();
        f.provenance = e.value("provenance", nlohmann::json::object());
        m.frames.push_back(std::move(f));
      }
      if (j.at("frame_count").get<std::size_t>() != m.frames.size())
        throw SchemaError("manifest: frame_count does not match the frame list");
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("manifest: ") + e.what());
    }
    return m;
  }
};

inline std::string frame_stem(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(index));
  return buf;
}

inline std::string rgb_digest(const Image& img) {
  std::vector<std::uint8_t> bytes(img.values().size());
  std::transform(img.values().begin(), img.values().end(), bytes.begin(), to_u8);
  return Sha256().update(bytes).hex();
}

inline std::string instance_digest(const InstanceMap& m) {
  return Sha256().update_pod(m.pixels()).hex();
}

inline void ensure_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory '" + p.string() + "': " + ec.message());
}

/// Writes one frame's image files and fills in paths, size and digests.
/// Safe to call concurrently for different frames.
inline FrameEntry write_frame(const std::string& dir, FrameEntry entry, const Image& rgb,
                              const InstanceMap& instance) {
  if (rgb.width() != instance.width() || rgb.height() != instance.height())
    throw ValidationError("frame " + std::to_string(entry.frame_index) + ": instance map size differs from image");
  namespace fs = std::filesystem;
  const std::string stem = frame_stem(entry.frame_index);
  entry.image = "rgb/" + stem + ".png";
  entry.instance_map = "instance/" + stem + ".png";
  ensure_dir(fs::path(dir) / "rgb");
  ensure_dir(fs::path(dir) / "instance");
  write_png_rgb8((fs::path(dir) / entry.image).string(), rgb);
  write_png_gray16((fs::path(dir) / entry.instance_map).string(), instance);
  entry.width = rgb.width();
  entry.height = rgb.height();
  entry.rgb_digest = rgb_digest(rgb);
  entry.instance_digest = instance_digest(instance);
  return entry;
}

inline nlohmann::json bbox_json(const BBox& b) { return {b.x, b.y, b.w, b.h}; }

/// COCO view of the manifest's annotations. Annotation ids are assigned
/// sequentially in frame order.
inline CocoDataset to_coco(const DatasetManifest& m) {
  CocoDataset d;
  d.categories = m.categories;
  std::int64_t next = 1;
  for (const auto& f : m.frames) {
    d.images.push_back({f.frame_index, f.image, f.width, f.height});
    for (const auto& a : f.annotations)
      d.annotations.push_back({next++, f.frame_index, a.category_id, a.bbox_modal,
                               static_cast<double>(a.pixel_count), 0});
  }
  return d;
}

inline nlohmann::json scene_gt_info(const DatasetManifest& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : m.frames) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& a : f.annotations)
      list.push_back({{"instance_id", a.instance_id},
                      {"category_id", a.category_id},
                      {"asset_id", a.asset_id},
                      {"bbox_visib", bbox_json(a.bbox_modal)},
                      {"bbox_obj", bbox_json(a.bbox_amodal)},
                      {"px_count_visib", a.pixel_count},
                      {"visib_fract", a.visibility}});
    j[std::to_string(f.frame_index)] = std::move(list);
  }
  return j;
}

/// Writes the index files once every frame is on disk. Frames are sorted by
/// index; duplicate indices are rejected.
inline DatasetManifest write_index(const std::string& dir, DatasetManifest m) {
  std::sort(m.frames.begin(), m.frames.end(),
            [](const FrameEntry& a, const FrameEntry& b) { return a.frame_index < b.frame_index; });
  for (std::size_t i = 1; i < m.frames.size(); ++i)
    if (m.frames[i].frame_index == m.frames[i - 1].frame_index)
      throw ValidationError("duplicate frame index " + std::to_string(m.frames[i].frame_index));
  for (const auto& f : m.frames)
    for (const auto& a : f.annotations)
      if (!m.categories.count(a.category_id))
        throw ValidationError("frame " + std::to_string(f.frame_index) + ": category " +
                              std::to_string(a.category_id) + " has no name");
  namespace fs = std::filesystem;
  ensure_dir(dir);
  write_coco((fs::path(dir) / "annotations.json").string(), to_coco(m));
  write_text((fs::path(dir) / "scene_gt_info.json").string(), scene_gt_info(m).dump(2) + "\n");
  write_text((fs::path(dir) / "manifest.json").string(), m.canonical());
  return m;
}

struct Frame {
  FrameEntry entry;
  Image rgb;
  InstanceMap instance;
};

/// Writes a whole dataset held in memory. `header` supplies seed, digests
/// and categories; its frame list is replaced.
inline DatasetManifest write_dataset(const std::string& dir, DatasetManifest header,
                                     const std::vector<Frame>& frames) {
  header.frames.clear();
  ensure_dir(dir);
  for (const auto& f : frames) header.frames.push_back(write_frame(dir, f.entry, f.rgb, f.instance));
  return write_index(dir, std::move(header));
}

struct Dataset {
  std::string root;
  DatasetManifest manifest;
  CocoDataset coco;

  /// Reads one frame's pixels back.
  Frame load_frame(std::size_t i) const {
    namespace fs = std::filesystem;
    const auto& e = manifest.frames.at(i);
    return {e, read_png_rgb((fs::path(root) / e.image).string()),
            read_png_gray16((fs::path(root) / e.instance_map).string())};
  }
};

inline Dataset read_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset d;
  d.root = dir;
  d.manifest = DatasetManifest::from_json(detail::parse_file((fs::path(dir) / "manifest.json").string()));
  d.coco = read_coco((fs::path(dir) / "annotations.json").string());
  const auto info = detail::parse_file((fs::path(dir) / "scene_gt_info.json").string());
  try {
    for (auto& f : d.manifest.frames) {
      const auto it = info.find(std::to_string(f.frame_index));
      if (it == info.end()) continue;
      for (const auto& a : *it) {
        annotate::Annotation ann;
        ann.instance_id = a.at("instance_id").get<std::uint16_t>();
        ann.category_id = a.at("category_id").get<std::int64_t>();
        ann.asset_id = a.at("asset_id").get<std::string>();
        ann.bbox_modal = detail::read_bbox(a.at("bbox_visib"), "scene_gt_info");
        ann.bbox_amodal = detail::read_bbox(a.at("bbox_obj"), "scene_gt_info");
        ann.pixel_count = a.at("px_count_visib").get<std::int64_t>();
        ann.visibility = a.at("visib_fract").get<double>();
        f.annotations.push_back(std::move(ann));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(dir + "/scene_gt_info.json: " + e.what());
  }
  return d;
}

}  // namespace synthdet::io
