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
#include <vector>

#include "synthdet/core/rng.hpp"
#include "synthdet/evaluate/metrics.hpp"

namespace testgen {

struct Instance {
  std::vector<synthdet::eval::Detection> dets;
  std::vector<synthdet::eval::GroundTruth> gts;
};

/// Small random evaluation problem: up to 5 images, up to 6 GT and 6
/// detection boxes per image, up to 3 classes. Detections are jittered
/// copies of GT boxes or free boxes so every IoU regime shows up; scores are
/// drawn from a coarse grid so ties occur.
inline Instance random_instance(synthdet::Rng& rng) {
  using synthdet::BBox;
  Instance inst;
  const int images = static_cast<int>(rng.uniform_int(1, 5));
  const int classes = static_cast<int>(rng.uniform_int(1, 3));
  for (int img = 0; img < images; ++img) {
    const int n_gt = static_cast<int>(rng.uniform_int(0, 6));
    std::vector<synthdet::eval::GroundTruth> local;
    for (int g = 0; g < n_gt; ++g) {
      BBox b{rng.uniform(0, 80), rng.uniform(0, 80), rng.uniform(5, 30), rng.uniform(5, 30)};
      local.push_back({img, rng.uniform_int(1, classes), b, -1.0});
    }
    const int n_det = static_cast<int>(rng.uniform_int(0, 6));
    for (int d = 0; d < n_det; ++d) {
      synthdet::eval::Detection det;
      det.image_id = img;
      det.category_id = rng.uniform_int(1, classes);
      if (!local.empty() && rng.bernoulli(0.7)) {
        const auto& g = local[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<long long>(local.size()) - 1))];
        if (rng.bernoulli(0.8)) det.category_id = g.category_id;
        const double j = rng.uniform(0.0, 0.5);
        det.bbox = {g.bbox.x + rng.uniform(-j, j) * g.bbox.w, g.bbox.y + rng.uniform(-j, j) * g.bbox.h,
                    g.bbox.w * rng.uniform(1 - j, 1 + j), g.bbox.h * rng.uniform(1 - j, 1 + j)};
      } else {
        det.bbox = {rng.uniform(0, 80), rng.uniform(0, 80), rng.uniform(5, 30), rng.uniform(5, 30)};
      }
      det.score = static_cast<double>(rng.uniform_int(0, 10)) / 10.0;
      inst.dets.push_back(det);
    }
    inst.gts.insert(inst.gts.end(), local.begin(), local.end());
  }
  return inst;
}

}  // namespace testgen
