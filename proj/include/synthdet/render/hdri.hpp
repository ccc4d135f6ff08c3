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

#include <cmath>

#include "synthdet/core/image.hpp"
#include "synthdet/core/math.hpp"
#include "synthdet/core/rng.hpp"

namespace synthdet::render {

/// Equirectangular lookup: u = atan2(dy, dx) / 2pi + 1/2 wraps around the
/// horizon, v = acos(dz) / pi runs from the zenith (top row) to the nadir.
inline Vec3 sample_hdri(const Image& env, Vec3 dir) {
  const double u = std::atan2(dir.y, dir.x) / (2 * kPi) + 0.5;
  const double v = std::acos(std::clamp(dir.z, -1.0, 1.0)) / kPi;
  const int w = env.width(), h = env.height();
  double x = u * w - 0.5;
  const double y = std::clamp(v * h - 0.5, 0.0, static_cast<double>(h - 1));
  x -= std::floor(x / w) * w;  // wrap into [0, w)
  const int x0 = std::min(static_cast<int>(x), w - 1);
  const int x1 = (x0 + 1) % w;
  const int y0 = static_cast<int>(y);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    const double top = env.at(x0, y0, c) * (1 - fx) + env.at(x1, y0, c) * fx;
    const double bot = env.at(x0, y1, c) * (1 - fx) + env.at(x1, y1, c) * fx;
    out[c] = top * (1 - fy) + bot * fy;
  }
  return out;
}

/// Procedural outdoor environment: zenith-to-horizon gradient, a darker
/// ground hemisphere, a soft sun disc and low-frequency cloud variation.
/// Deterministic in `seed`.
inline Image make_procedural_sky(int height, std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 zenith{rng.uniform(0.1, 0.4), rng.uniform(0.2, 0.5), rng.uniform(0.5, 0.9)};
  const Vec3 horizon{rng.uniform(0.6, 0.95), rng.uniform(0.6, 0.95), rng.uniform(0.6, 0.95)};
  const Vec3 ground{rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.35), rng.uniform(0.05, 0.3)};
  const double sun_phi = rng.uniform(0, 2 * kPi), sun_el = rng.uniform(0.1, 1.2);
  const Vec3 sun{std::cos(sun_el) * std::cos(sun_phi), std::cos(sun_el) * std::sin(sun_phi),
                 std::sin(sun_el)};
  double wave[4][3];
  for (auto& w : wave) {
    w[0] = rng.uniform(1, 6);
    w[1] = rng.uniform(1, 4);
    w[2] = rng.uniform(0, 2 * kPi);
  }
  const int width = 2 * height;
  Image env(width, height);
  for (int y = 0; y < height; ++y) {
    const double theta = (y + 0.5) / height * kPi;
    for (int x = 0; x < width; ++x) {
      const double phi = ((x + 0.5) / width - 0.5) * 2 * kPi;
      const Vec3 d{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                   std::cos(theta)};
      Vec3 c;
      if (d.z >= 0) {
        const double t = std::pow(1.0 - d.z, 3.0);
        c = zenith * (1 - t) + horizon * t;
        double cloud = 0;
        for (const auto& w : wave) cloud += std::sin(w[0] * phi + w[1] * theta * 4 + w[2]);
        c = c + Vec3{1, 1, 1} * (0.04 * cloud * d.z);
      } else {
        const double t = std::min(1.0, -d.z * 4);
        c = horizon * (1 - t) * 0.6 + ground * t;
      }
      const double s = dot(d, sun);
      if (s > 0.995) c = c + Vec3{1.5, 1.4, 1.2} * ((s - 0.995) / 0.005);
      env.set_rgb(x, y, vmax(c, Vec3{0, 0, 0}));
    }
  }
  return env;
}

}  // namespace synthdet::render
