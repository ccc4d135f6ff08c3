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


// Image corruptions for robustness evaluation and the per-severity grid.

#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "synthdet/core/error.hpp"
#include "synthdet/core/image.hpp"
#include "synthdet/core/rng.hpp"
#include "synthdet/evaluate/metrics.hpp"

namespace synthdet::eval {

enum class CorruptionKind { kGammaContrast, kGlassBlur, kImpulseNoise, kMotionBlur, kCoarseDropout, kImageScale };

inline constexpr std::array<CorruptionKind, 6> kAllCorruptions{
    CorruptionKind::kGammaContrast, CorruptionKind::kGlassBlur,     CorruptionKind::kImpulseNoise,
    CorruptionKind::kMotionBlur,    CorruptionKind::kCoarseDropout, CorruptionKind::kImageScale};

inline std::string to_string(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::kGammaContrast: return "gamma_contrast";
    case CorruptionKind::kGlassBlur: return "glass_blur";
    case CorruptionKind::kImpulseNoise: return "impulse_noise";
    case CorruptionKind::kMotionBlur: return "motion_blur";
    case CorruptionKind::kCoarseDropout: return "coarse_dropout";
    case CorruptionKind::kImageScale: return "image_scale";
  }
  return "?";
}

inline CorruptionKind corruption_from_string(const std::string& s) {
  for (auto k : kAllCorruptions)
    if (to_string(k) == s) return k;
  throw ConfigError("unknown corruption kind '" + s + "'");
}

struct GlassParams {
  double sigma;
  int max_delta;
  int iterations;
};

// Severity tables, index = severity - 1. Every parameter grows with
// severity, so the distortion does too.
inline constexpr std::array<double, 5> kGamma{1.5, 2.0, 2.5, 3.0, 3.5};
inline constexpr std::array<GlassParams, 5> kGlass{
    {{0.7, 1, 1}, {0.9, 1, 2}, {1.0, 2, 2}, {1.1, 2, 3}, {1.5, 3, 3}}};
inline constexpr std::array<double, 5> kImpulseFraction{0.03, 0.06, 0.09, 0.17, 0.27};
inline constexpr std::array<int, 5> kMotionLength{9, 15, 21, 31, 41};
inline constexpr std::array<double, 5> kDropoutFraction{0.05, 0.10, 0.20, 0.30, 0.40};
inline constexpr std::array<double, 5> kScaleFactor{0.8, 0.6, 0.4, 0.3, 0.2};
inline constexpr float kDropoutGray = 0.5f;

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kGammaContrast;
  int severity = 1;

  void validate() const {
    if (severity < 1 || severity > 5) throw ConfigError("corruption severity must be in 1..5");
  }
  std::size_t index() const { return static_cast<std::size_t>(severity - 1); }

  /// Scale applied to image size (and to boxes); 1 except for image_scale.
  double geometry_scale() const {
    validate();
    return kind == CorruptionKind::kImageScale ? kScaleFactor[index()] : 1.0;
  }

  nlohmann::json params() const {
    validate();
    const auto i = index();
    switch (kind) {
      case CorruptionKind::kGammaContrast: return {{"gamma", kGamma[i]}};
      case CorruptionKind::kGlassBlur:
        return {{"sigma", kGlass[i].sigma}, {"max_delta", kGlass[i].max_delta}, {"iterations", kGlass[i].iterations}};
      case CorruptionKind::kImpulseNoise: return {{"fraction", kImpulseFraction[i]}};
      case CorruptionKind::kMotionBlur: return {{"length", kMotionLength[i]}};
      case CorruptionKind::kCoarseDropout: return {{"area_fraction", kDropoutFraction[i]}};
      case CorruptionKind::kImageScale: return {{"scale", kScaleFactor[i]}};
    }
    return {};
  }
};

/// img^gamma per value.
inline Image gamma_contrast(const Image& img, double gamma) {
  if (gamma == 1.0) return img;
  Image out = img;
  for (float& v : out.values()) v = static_cast<float>(std::pow(std::clamp(v, 0.0f, 1.0f), gamma));
  return out;
}

/// Separable Gaussian, radius ceil(3 sigma), clamped borders.
inline Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0) return img;
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  const int w = img.width(), h = img.height();
  Image tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * img.at(std::clamp(x + i, 0, w - 1), y, c);
        tmp.at(x, y, c) = static_cast<float>(acc);
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(x, std::clamp(y + i, 0, h - 1), c);
        out.at(x, y, c) = static_cast<float>(acc);
      }
  return out;
}

/// Blur, then repeatedly swap every pixel with a random neighbour within
/// max_delta, then blur again.
inline Image glass_blur(const Image& img, const GlassParams& p, Rng& rng) {
  Image out = gaussian_blur(img, p.sigma);
  const int w = img.width(), h = img.height();
  for (int it = 0; it < p.iterations; ++it)
    for (int y = h - 1; y >= 0; --y)
      for (int x = w - 1; x >= 0; --x) {
        const int nx = std::clamp(x + static_cast<int>(rng.uniform_int(-p.max_delta, p.max_delta)), 0, w - 1);
        const int ny = std::clamp(y + static_cast<int>(rng.uniform_int(-p.max_delta, p.max_delta)), 0, h - 1);
        const Vec3 a = out.rgb(x, y);
        out.set_rgb(x, y, out.rgb(nx, ny));
        out.set_rgb(nx, ny, a);
      }
  return gaussian_blur(out, p.sigma);
}

/// Salt-and-pepper on individual channel values.
inline Image impulse_noise(const Image& img, double fraction, Rng& rng) {
  Image out = img;
  for (float& v : out.values()) {
    const bool hit = rng.uniform() < fraction;
    const bool salt = rng.uniform() < 0.5;  // drawn either way to keep the stream aligned
    if (hit) v = salt ? 1.0f : 0.0f;
  }
  return out;
}

/// Average along a line of `length` pixels through each pixel at `angle`
/// radians, sampled bilinearly at unit steps with clamped borders.
inline Image motion_blur(const Image& img, int length, double angle) {
  if (length <= 1) return img;
  const double dx = std::cos(angle), dy = std::sin(angle);
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      Vec3 acc;
      for (int i = 0; i < length; ++i) {
        const double t = i - (length - 1) / 2.0;
        acc += sample_bilinear(img, x + t * dx, y + t * dy);
      }
      out.set_rgb(x, y, acc / static_cast<double>(length));
    }
  return out;
}

/// Grey rectangles until `fraction` of the pixels are covered. Rectangle
/// sides are 2-10% of the shorter image side so the last one overshoots by
/// well under one percent.
inline Image coarse_dropout(const Image& img, double fraction, Rng& rng, InstanceMap* covered = nullptr) {
  const int w = img.width(), h = img.height();
  InstanceMap cov(w, h, 0);
  const auto target = static_cast<std::int64_t>(std::llround(fraction * w * h));
  std::int64_t count = 0;
  const int smin = std::max(1, static_cast<int>(0.02 * std::min(w, h)));
  const int smax = std::max(smin, static_cast<int>(0.10 * std::min(w, h)));
  Image out = img;
  while (count < target) {
    const int rw = static_cast<int>(rng.uniform_int(smin, smax)), rh = static_cast<int>(rng.uniform_int(smin, smax));
    const int x0 = static_cast<int>(rng.uniform_int(0, w - rw)), y0 = static_cast<int>(rng.uniform_int(0, h - rh));
    for (int y = y0; y < y0 + rh; ++y)
      for (int x = x0; x < x0 + rw; ++x) {
        if (cov.at(x, y)) continue;
        cov.at(x, y) = 1;
        ++count;
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = kDropoutGray;
      }
  }
  if (covered) *covered = std::move(cov);
  return out;
}

inline Image corrupt(const Image& img, const CorruptionSpec& spec, Rng& rng) {
  spec.validate();
  const auto i = spec.index();
  Image out;
  switch (spec.kind) {
    case CorruptionKind::kGammaContrast: out = gamma_contrast(img, kGamma[i]); break;
    case CorruptionKind::kGlassBlur: out = glass_blur(img, kGlass[i], rng); break;
    case CorruptionKind::kImpulseNoise: out = impulse_noise(img, kImpulseFraction[i], rng); break;
    case CorruptionKind::kMotionBlur: out = motion_blur(img, kMotionLength[i], rng.uniform(0, kPi)); break;
    case CorruptionKind::kCoarseDropout: out = coarse_dropout(img, kDropoutFraction[i], rng); break;
    case CorruptionKind::kImageScale: {
      const int w = std::max(1, static_cast<int>(std::lround(img.width() * kScaleFactor[i])));
      const int h = std::max(1, static_cast<int>(std::lround(img.height() * kScaleFactor[i])));
      out = resize(img, w, h);
      break;
    }
  }
  out.clamp();
  return out;
}

/// Boxes of `gts` (or detections) in the corrupted image's pixel frame.
template <typename T>
std::vector<T> scale_boxes(std::vector<T> items, double s) {
  if (s == 1.0) return items;
  for (auto& it : items) {
    it.bbox = BBox{it.bbox.x * s, it.bbox.y * s, it.bbox.w * s, it.bbox.h * s};
    if constexpr (requires { it.area; })
      if (it.area >= 0) it.area *= s * s;
  }
  return items;
}

struct RobustnessCell {
  CorruptionKind kind;
  int severity;
  std::optional<EvalReport> report;  // empty when no detections were supplied
};

struct RobustnessTable {
  EvalReport baseline;
  std::vector<RobustnessCell> cells;

  /// kind,severity,map,mar,detections; the clean baseline is "clean,0".
  std::string to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "kind,severity,map,mar,detections,present\n";
    os << "clean,0," << baseline.map << ',' << baseline.mar << ',' << baseline.detections_retained << ",1\n";
    for (const auto& c : cells) {
      os << to_string(c.kind) << ',' << c.severity << ',';
      if (c.report)
        os << c.report->map << ',' << c.report->mar << ',' << c.report->detections_retained << ",1\n";
      else
        os << ",,,0\n";
    }
    return os.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : cells) {
      nlohmann::json r{{"kind", to_string(c.kind)}, {"severity", c.severity}};
      if (c.report) {
        r["map"] = c.report->map;
        r["mar"] = c.report->mar;
      } else {
        r["missing"] = true;
      }
      rows.push_back(std::move(r));
    }
    return {{"baseline", {{"map", baseline.map}, {"mar", baseline.mar}}}, {"cells", rows}};
  }
};

using CellKey = std::pair<CorruptionKind, int>;

/// Scores every (kind, severity) cell against the clean ground truth.
/// Detections for image_scale cells are expected in the scaled frame; the
/// ground truth is scaled to match. Cells without detections are reported
/// as missing.
inline RobustnessTable robustness_suite(std::span<const Detection> clean,
                                        const std::map<CellKey, std::vector<Detection>>& cells,
                                        std::span<const GroundTruth> gts, const EvalParams& params = {}) {
  RobustnessTable t;
  t.baseline = evaluate(clean, gts, params);
  const std::vector<GroundTruth> gt_vec(gts.begin(), gts.end());
  for (auto kind : kAllCorruptions)
    for (int s = 1; s <= 5; ++s) {
      RobustnessCell cell{kind, s, std::nullopt};
      if (const auto it = cells.find({kind, s}); it != cells.end()) {
        const auto scaled = scale_boxes(gt_vec, CorruptionSpec{kind, s}.geometry_scale());
        cell.report = evaluate(it->second, scaled, params);
      }
      t.cells.push_back(std::move(cell));
    }
  return t;
}

}  // namespace synthdet::eval
