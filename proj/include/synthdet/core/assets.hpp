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

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "synthdet/core/error.hpp"
#include "synthdet/core/hash.hpp"
#include "synthdet/core/image.hpp"
#include "synthdet/core/mesh.hpp"
#include "synthdet/render/bvh.hpp"

namespace synthdet {

enum class AssetRole { kObject, kFurniture };

/// A renderable mesh plus its labels. Mesh and BVH are shared and immutable
/// so an AssetStore can be copied cheaply and read from many workers.
struct MeshAsset {
  std::string id;
  AssetRole role = AssetRole::kObject;
  std::int64_t category_id = 0;
  std::string category_name;
  bool distractor = false;
  std::shared_ptr<const TriangleMesh> mesh;
  std::shared_ptr<const render::Bvh> bvh;
  std::string digest;

  static MeshAsset make(std::string id, TriangleMesh mesh, std::int64_t category_id = 0,
                        std::string category_name = {}, bool distractor = false,
                        AssetRole role = AssetRole::kObject, std::string digest = {}) {
    MeshAsset a;
    a.id = std::move(id);
    a.role = role;
    a.category_id = category_id;
    a.category_name = std::move(category_name);
    a.distractor = distractor;
    mesh.validate(a.id);
    auto m = std::make_shared<const TriangleMesh>(std::move(mesh));
    a.bvh = std::make_shared<const render::Bvh>(*m);
    a.mesh = std::move(m);
    if (digest.empty()) {
      Sha256 h;
      h.update_pod(std::span<const Vec3>(a.mesh->positions));
      h.update_pod(std::span<const std::array<std::uint32_t, 3>>(a.mesh->triangles));
      h.update_pod(std::span<const float>(a.mesh->texture.values()));
      digest = h.hex();
    }
    a.digest = std::move(digest);
    return a;
  }
};

/// Equirectangular environment image.
struct HdriAsset {
  std::string id;
  Image env;
  std::string digest;
};

class AssetStore {
 public:
  void add(MeshAsset asset) {
    check_unique(asset.id);
    auto& list = asset.role == AssetRole::kFurniture ? furniture_ : objects_;
    index_[asset.id] = {asset.role == AssetRole::kFurniture ? 1 : 0, list.size()};
    list.push_back(std::move(asset));
  }

  void add(HdriAsset hdri) {
    check_unique(hdri.id);
    if (hdri.env.empty()) throw LoadError("HDRI '" + hdri.id + "' is empty");
    if (std::abs(hdri.env.width() - 2 * hdri.env.height()) > 1)
      throw LoadError("HDRI '" + hdri.id + "' is not equirectangular: " +
                      std::to_string(hdri.env.width()) + "x" + std::to_string(hdri.env.height()));
    if (hdri.digest.empty()) hdri.digest = Sha256().update_pod(std::span<const float>(hdri.env.values())).hex();
    index_[hdri.id] = {2, hdris_.size()};
    hdris_.push_back(std::move(hdri));
  }

  const std::vector<MeshAsset>& objects() const { return objects_; }
  const std::vector<MeshAsset>& furniture() const { return furniture_; }
  const std::vector<HdriAsset>& hdris() const { return hdris_; }
  std::size_t size() const { return index_.size(); }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  const MeshAsset& mesh(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end() || it->second.first == 2)
      throw LoadError("unknown mesh asset '" + id + "'");
    return it->second.first == 1 ? furniture_[it->second.second] : objects_[it->second.second];
  }

  /// category id -> name over all labelled (non-distractor) objects.
  std::map<std::int64_t, std::string> categories() const {
    std::map<std::int64_t, std::string> out;
    for (const auto& o : objects_)
      if (!o.distractor) out.emplace(o.category_id, o.category_name);
    return out;
  }

  /// Digest over every asset's content digest, in id order.
  std::string digest() const {
    Sha256 h;
    for (const auto& [id, where] : index_) {
      h.update(id).update("\n");
      if (where.first == 2)
        h.update(hdris_[where.second].digest);
      else
        h.update(mesh(id).digest);
      h.update("\n");
    }
    return h.hex();
  }

 private:
  void check_unique(const std::string& id) const {
    if (id.empty()) throw LoadError("asset with empty id");
    if (index_.count(id)) throw LoadError("duplicate asset id '" + id + "'");
  }

  std::vector<MeshAsset> objects_;
  std::vector<MeshAsset> furniture_;
  std::vector<HdriAsset> hdris_;
  std::map<std::string, std::pair<int, std::size_t>> index_;
};

}  // namespace synthdet
