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


// COCO-style annotation files and COCO results arrays.

#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "synthdet/core/bbox.hpp"
#include "synthdet/core/error.hpp"
#include "synthdet/evaluate/metrics.hpp"

namespace synthdet::io {

struct CocoImage {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct CocoAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox bbox;
  double area = 0.0;
  int iscrowd = 0;
};

struct CocoDataset {
  std::vector<CocoImage> images;
  std::vector<CocoAnnotation> annotations;
  std::map<std::int64_t, std::string> categories;

  nlohmann::json to_json() const {
    nlohmann::json imgs = nlohmann::json::array(), anns = nlohmann::json::array(),
                   cats = nlohmann::json::array();
    for (const auto& i : images)
      imgs.push_back({{"id", i.id}, {"file_name", i.file_name}, {"width", i.width}, {"height", i.height}});
    for (const auto& a : annotations)
      anns.push_back({{"id", a.id},
                      {"image_id", a.image_id},
                      {"category_id", a.category_id},
                      {"bbox", {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h}},
                      {"area", a.area},
                      {"iscrowd", a.iscrowd}});
    for (const auto& [id, name] : categories) cats.push_back({{"id", id}, {"name", name}});
    return {{"images", imgs}, {"annotations", anns}, {"categories", cats}};
  }

  /// Sorted keys, two-space indent, trailing newline.
  std::string canonical() const { return to_json().dump(2) + "\n"; }

  std::vector<std::int64_t> image_ids() const {
    std::vector<std::int64_t> ids;
    for (const auto& i : images) ids.push_back(i.id);
    return ids;
  }

  /// Non-crowd annotations as evaluation ground truth.
  std::vector<eval::GroundTruth> ground_truth() const {
    std::vector<eval::GroundTruth> out;
    for (const auto& a : annotations)
      if (!a.iscrowd) out.push_back({a.image_id, a.category_id, a.bbox, a.area});
    return out;
  }
};

namespace detail {

inline nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
}

inline BBox read_bbox(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4)
    throw SchemaError(where + ": bbox must be an array of 4 numbers");
  for (const auto& v : j)
    if (!v.is_number()) throw SchemaError(where + ": bbox must be an array of 4 numbers");
  const BBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (b.w < 0 || b.h < 0) throw SchemaError(where + ": negative bbox extent");
  return b;
}

template <typename T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + ": missing '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(where + ": '" + key + "' has the wrong type");
  }
}

inline const nlohmann::json& array_field(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) throw SchemaError(std::string("'") + key + "' must be an array");
  return *it;
}

}  // namespace detail

/// Parses and checks a COCO document: field types, bbox shape, unique ids
/// and that every annotation resolves to a known image and category.
inline CocoDataset coco_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("COCO document must be an object");
  CocoDataset d;
  std::set<std::int64_t> image_ids, ann_ids;
  const auto& imgs = detail::array_field(j, "images");
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const std::string where = "images[" + std::to_string(i) + "]";
    if (!imgs[i].is_object()) throw SchemaError(where + ": must be an object");
    CocoImage im{detail::field<std::int64_t>(imgs[i], "id", where),
                 detail::field<std::string>(imgs[i], "file_name", where),
                 detail::field<int>(imgs[i], "width", where), detail::field<int>(imgs[i], "height", where)};
    if (!image_ids.insert(im.id).second) throw SchemaError(where + ": duplicate image id " + std::to_string(im.id));
    d.images.push_back(std::move(im));
  }
  const auto& cats = detail::array_field(j, "categories");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string where = "categories[" + std::to_string(i) + "]";
    if (!cats[i].is_object()) throw SchemaError(where + ": must be an object");
    const auto id = detail::field<std::int64_t>(cats[i], "id", where);
    if (!d.categories.emplace(id, detail::field<std::string>(cats[i], "name", where)).second)
      throw SchemaError(where + ": duplicate category id " + std::to_string(id));
  }
  const auto& anns = detail::array_field(j, "annotations");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    std::string where = "annotations[" + std::to_string(i) + "]";
    if (!anns[i].is_object()) throw SchemaError(where + ": must be an object");
    CocoAnnotation a;
    a.id = detail::field<std::int64_t>(anns[i], "id", where);
    where += " (id " + std::to_string(a.id) + ")";
    a.image_id = detail::field<std::int64_t>(anns[i], "image_id", where);
    a.category_id = detail::field<std::int64_t>(anns[i], "category_id", where);
    a.bbox = detail::read_bbox(anns[i].contains("bbox") ? anns[i]["bbox"] : nlohmann::json(), where);
    a.area = anns[i].contains("area") ? detail::field<double>(anns[i], "area", where) : a.bbox.area();
    a.iscrowd = anns[i].contains("iscrowd") ? detail::field<int>(anns[i], "iscrowd", where) : 0;
    if (!ann_ids.insert(a.id).second) throw SchemaError(where + ": duplicate annotation id");
    if (!image_ids.count(a.image_id))
      throw SchemaError(where + ": unknown image_id " + std::to_string(a.image_id));
    if (!d.categories.count(a.category_id))
      throw SchemaError(where + ": unknown category_id " + std::to_string(a.category_id));
    d.annotations.push_back(a);
  }
  return d;
}

inline CocoDataset read_coco(const std::string& path) {
  try {
    return coco_from_json(detail::parse_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed: '" + path + "'");
}

inline void write_coco(const std::string& path, const CocoDataset& d) { write_text(path, d.canonical()); }

/// COCO results array: [{image_id, category_id, bbox, score}, ...].
inline std::vector<eval::Detection> detections_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaError("detections must be a JSON array");
  std::vector<eval::Detection> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "detections[" + std::to_string(i) + "]";
    if (!j[i].is_object()) throw SchemaError(where + ": must be an object");
    eval::Detection d;
    d.image_id = detail::field<std::int64_t>(j[i], "image_id", where);
    d.category_id = detail::field<std::int64_t>(j[i], "category_id", where);
    d.bbox = detail::read_bbox(j[i].contains("bbox") ? j[i]["bbox"] : nlohmann::json(), where);
    d.score = detail::field<double>(j[i], "score", where);
    if (!(d.score >= 0.0 && d.score <= 1.0))
      throw ValidationError(where + ": score " + std::to_string(d.score) + " outside [0, 1]");
    out.push_back(d);
  }
  return out;
}

inline std::vector<eval::Detection> read_detections(const std::string& path) {
  try {
    return detections_from_json(detail::parse_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline nlohmann::json detections_to_json(const std::vector<eval::Detection>& dets) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : dets)
    out.push_back({{"image_id", d.image_id},
                   {"category_id", d.category_id},
                   {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}},
                   {"score", d.score}});
  return out;
}

}  // namespace synthdet::io
