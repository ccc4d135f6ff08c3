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

#include <algorithm>
#include <cmath>
#include <functional>

#include "synthdet/core/image.hpp"
#include "synthdet/core/math.hpp"
#include "synthdet/scenegen/scene.hpp"

namespace synthdet::render {

/// Surface sample handed to the shader. `normal` faces the viewer.
struct SurfaceHit {
  Vec3 position;
  Vec3 normal;
  Vec3 view;    // unit vector from the surface towards the eye
  Vec3 albedo;  // texture or base colour before the material pipeline
};

inline Vec3 desaturate(Vec3 albedo, double amount) {
  const double y = luminance(albedo);
  return albedo * (1.0 - amount) + Vec3{y, y, y} * amount;
}

/// Material albedo pipeline: desaturate, multiply by brightness, add, tint,
/// then clamp to [0, 1].
inline Vec3 effective_albedo(Vec3 albedo, const scene::MaterialParams& m) {
  const Vec3 a = desaturate(albedo, m.albedo_desaturation) * m.albedo_brightness +
                 Vec3{m.albedo_add, m.albedo_add, m.albedo_add};
  return clamp01(hadamard(m.diffuse_tint, a));
}

inline double specular_exponent(double roughness) {
  const double r2 = roughness * roughness;
  const double e = r2 > 0 ? 2.0 / (r2 * r2) - 2.0 : 1e4;
  return std::clamp(e, 1.0, 1e4);
}

/// Returns true when the segment from `from` to the light is blocked.
using ShadowTest = std::function<bool(Vec3 from, Vec3 to)>;

struct ShadeTerms {
  Vec3 emissive;
  Vec3 ambient;
  Vec3 diffuse;
  Vec3 specular;

  Vec3 total() const { return emissive + ambient + diffuse + specular; }
};

/// Direct lighting: emission + ambient + per light a Lambert term scaled by
/// (1 - metallic) and a normalised Blinn-Phong lobe whose colour moves from
/// white to the albedo as metallic goes to 1. Lights fall off with 1/d^2.
inline ShadeTerms shade_terms(const SurfaceHit& hit, const scene::MaterialParams& m,
                              const scene::LightingSpec& lighting,
                              const ShadowTest& occluded = {}) {
  const Vec3 albedo = effective_albedo(hit.albedo, m);
  ShadeTerms t;
  t.emissive = m.emissive_color;
  t.ambient = albedo * lighting.ambient_intensity;
  const double n_exp = specular_exponent(m.roughness);
  const double spec_norm = m.specular_level * (n_exp + 8.0) / (8.0 * kPi);
  const Vec3 spec_color = Vec3{1, 1, 1} * (1.0 - m.metallic) + albedo * m.metallic;
  for (const auto& light : lighting.point_lights) {
    const Vec3 to_light = light.position - hit.position;
    const double d2 = dot(to_light, to_light);
    if (d2 <= 0) continue;
    const Vec3 l = to_light / std::sqrt(d2);
    const double ndl = dot(hit.normal, l);
    if (ndl <= 0) continue;
    if (occluded && occluded(hit.position, light.position)) continue;
    const Vec3 li = light.color * (light.intensity / d2);
    t.diffuse += hadamard(albedo, li) * ((1.0 - m.metallic) * ndl);
    if (spec_norm > 0) {
      const Vec3 h = normalized(l + hit.view);
      const double ndh = std::max(0.0, dot(hit.normal, h));
      t.specular += hadamard(spec_color, li) * (spec_norm * std::pow(ndh, n_exp) * ndl);
    }
  }
  return t;
}

inline Vec3 shade(const SurfaceHit& hit, const scene::MaterialParams& m,
                  const scene::LightingSpec& lighting, const ShadowTest& occluded = {}) {
  return shade_terms(hit, m, lighting, occluded).total();
}

}  // namespace synthdet::render
