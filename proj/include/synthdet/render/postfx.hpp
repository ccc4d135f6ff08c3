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
#include <vector>

#include "synthdet/core/image.hpp"
#include "synthdet/core/rng.hpp"
#include "synthdet/scenegen/scene.hpp"

namespace synthdet::render {

namespace postfx_detail {

inline constexpr double kTvNoiseSigma = 0.05;
inline constexpr double kScanLineDarkening = 0.25;
inline constexpr double kVignetteCore = 0.25;  // fraction of the corner radius left untouched
inline constexpr double kVignetteStrength = 0.5;

/// Separable Gaussian blur of a single-channel field, normalised back to
/// unit variance assuming white input.
inline void correlate(std::vector<double>& field, int w, int h, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> k(2 * r + 1);
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  double energy = 0;
  for (auto& v : k) {
    v /= sum;
    energy += v * v;
  }
  std::vector<double> tmp(field.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * field[y * w + std::clamp(x + i, 0, w - 1)];
      tmp[y * w + x] = s;
    }
  const double gain = 1.0 / energy;  // 2-D energy is energy^2; sqrt gives energy
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp[std::clamp(y + i, 0, h - 1) * w + x];
      field[y * w + x] = s * gain;
    }
}

}  // namespace postfx_detail

/// Camera post-processing, applied in a fixed order: TV noise, scan lines,
/// vertical lines, splotches, film grain, vignetting. The result is clamped
/// to [0, 1]; with every effect disabled the input is returned as is.
inline Image apply_postfx(const Image& rgb, const scene::PostFxParams& fx, Rng& rng) {
  using namespace postfx_detail;
  Image out = rgb;
  if (!fx.any()) return out;
  const int w = out.width(), h = out.height();
  auto scale_pixel = [&](int x, int y, double f) {
    for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(out.at(x, y, c) * f);
  };
  if (fx.tv_noise) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double n = rng.normal(0.0, kTvNoiseSigma);
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(out.at(x, y, c) + n);
      }
  }
  if (fx.scan_lines) {
    // Band period grows with the spread: 2 px at 0.1, 4 px at 0.2.
    const int period = std::max(2, static_cast<int>(std::lround(fx.scan_line_spread * 20)));
    for (int y = 0; y < h; ++y)
      if (y % period < period / 2)
        for (int x = 0; x < w; ++x) scale_pixel(x, y, 1.0 - kScanLineDarkening);
  }
  if (fx.vertical_lines) {
    const auto n = rng.uniform_int(1, 5);
    for (long long i = 0; i < n; ++i) {
      const int x = static_cast<int>(rng.uniform_int(0, w - 1));
      const double f = rng.bernoulli(0.5) ? 0.6 : 1.4;
      for (int y = 0; y < h; ++y) scale_pixel(x, y, f);
    }
  }
  if (fx.splotches) {
    const auto n = rng.uniform_int(1, 5);
    for (long long i = 0; i < n; ++i) {
      const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
      const double rx = rng.uniform(0.02, 0.08) * w, ry = rng.uniform(0.02, 0.08) * w;
      const double depth = rng.uniform(0.3, 0.7);
      for (int y = std::max(0, static_cast<int>(cy - ry)); y < std::min(h, static_cast<int>(cy + ry) + 1); ++y)
        for (int x = std::max(0, static_cast<int>(cx - rx)); x < std::min(w, static_cast<int>(cx + rx) + 1); ++x) {
          const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
          const double r2 = dx * dx + dy * dy;
          if (r2 < 1.0) scale_pixel(x, y, 1.0 - depth * (1.0 - r2));
        }
    }
  }
  if (fx.film_grain && fx.grain_amount > 0) {
    // Monochrome grain plus a chroma share per channel, each a Gaussian
    // field with correlation length grain_size pixels.
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<std::vector<double>> fields(4, std::vector<double>(n));
    for (auto& f : fields) {
      for (auto& v : f) v = rng.normal();
      correlate(f, w, h, fx.grain_size);
    }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        for (int c = 0; c < 3; ++c) {
          const double g = (1.0 - fx.color_amount) * fields[0][i] + fx.color_amount * fields[c + 1][i];
          out.at(x, y, c) = static_cast<float>(out.at(x, y, c) + fx.grain_amount * g);
        }
      }
  }
  if (fx.vignetting) {
    const double cx = w / 2.0, cy = h / 2.0, rmax = std::hypot(cx, cy);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double r = std::hypot(x + 0.5 - cx, y + 0.5 - cy) / rmax;
        if (r <= kVignetteCore) continue;
        const double t = (r - kVignetteCore) / (1.0 - kVignetteCore);
        scale_pixel(x, y, 1.0 - kVignetteStrength * t * t);
      }
  }
  out.clamp();
  return out;
}

}  // namespace synthdet::render
