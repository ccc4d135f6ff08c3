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

#include <fftw3.h>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "synthdet/core/bbox.hpp"
#include "synthdet/core/error.hpp"
#include "synthdet/core/image.hpp"
#include "synthdet/core/rng.hpp"
#include "synthdet/datasetio/image_io.hpp"

namespace synthdet::augment {

struct LabeledBox {
  std::uint16_t instance_id = 0;
  std::int64_t category_id = 0;
  BBox bbox;

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

/// An image with its instance mask and box annotations. Boxes refer to mask
/// ids so geometric steps can re-derive them.
struct Sample {
  Image image;
  InstanceMap mask;
  std::vector<LabeledBox> boxes;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Replaces every box with the tight extent of its instance's pixels and
/// drops instances with fewer than `min_pixels` pixels left.
inline void rederive_boxes(Sample& s, std::int64_t min_pixels) {
  std::map<std::uint16_t, std::array<std::int64_t, 5>> acc;  // x0 y0 x1 y1 n
  for (const auto& b : s.boxes) acc[b.instance_id] = {INT64_MAX, INT64_MAX, -1, -1, 0};
  for (int y = 0; y < s.mask.height(); ++y)
    for (int x = 0; x < s.mask.width(); ++x) {
      const auto it = acc.find(s.mask.at(x, y));
      if (it == acc.end() || it->first == 0) continue;
      auto& a = it->second;
      a[0] = std::min<std::int64_t>(a[0], x);
      a[1] = std::min<std::int64_t>(a[1], y);
      a[2] = std::max<std::int64_t>(a[2], x);
      a[3] = std::max<std::int64_t>(a[3], y);
      ++a[4];
    }
  std::vector<LabeledBox> kept;
  for (const auto& b : s.boxes) {
    const auto& a = acc[b.instance_id];
    if (a[4] == 0 || a[4] < min_pixels) continue;
    kept.push_back({b.instance_id, b.category_id,
                    BBox{static_cast<double>(a[0]), static_cast<double>(a[1]),
                         static_cast<double>(a[2] - a[0] + 1), static_cast<double>(a[3] - a[1] + 1)}});
  }
  s.boxes = std::move(kept);
}

// ---------------------------------------------------------------------------
// Photometric operations. All return clamped images.

inline double mean_luminance(const Image& img) {
  double s = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) s += luminance(img.rgb(x, y));
  return img.pixel_count() ? s / static_cast<double>(img.pixel_count()) : 0.0;
}

/// (img - mean) * c + mean, with the mean taken over luminance.
inline Image contrast(const Image& img, double c) {
  if (c == 1.0) return img;
  const double m = mean_luminance(img);
  Image out = img;
  for (float& v : out.values()) v = static_cast<float>((v - m) * c + m);
  out.clamp();
  return out;
}

inline Image brightness(const Image& img, double b) {
  if (b == 1.0) return img;
  Image out = img;
  for (float& v : out.values()) v = static_cast<float>(v * b);
  out.clamp();
  return out;
}

/// Saturation scale around each pixel's luminance, which it preserves.
inline Image enhancement(const Image& img, double e) {
  if (e == 1.0) return img;
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const Vec3 c = img.rgb(x, y);
      const double l = luminance(c);
      out.set_rgb(x, y, Vec3{l, l, l} + (c - Vec3{l, l, l}) * e);
    }
  out.clamp();
  return out;
}

/// Equalises the 8-bit luminance histogram and shifts every channel by the
/// resulting luminance change, which keeps chroma differences intact.
inline Image hist_equalize(const Image& img) {
  const std::size_t n = img.pixel_count();
  std::vector<int> level(n);
  std::array<std::int64_t, 256> hist{};
  std::vector<double> lum(n);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width() + x;
      lum[i] = luminance(img.rgb(x, y));
      level[i] = static_cast<int>(std::lround(std::clamp(lum[i], 0.0, 1.0) * 255));
      ++hist[level[i]];
    }
  std::array<std::int64_t, 256> cdf{};
  std::int64_t run = 0, cdf_min = -1;
  for (int v = 0; v < 256; ++v) {
    run += hist[v];
    cdf[v] = run;
    if (cdf_min < 0 && run > 0) cdf_min = run;
  }
  const auto total = static_cast<std::int64_t>(n);
  if (total == 0 || total == cdf_min) return img;
  Image out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width() + x;
      const double mapped =
          std::round(static_cast<double>(cdf[level[i]] - cdf_min) / (total - cdf_min) * 255.0) / 255.0;
      const double dy = mapped - lum[i];
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(img.at(x, y, c) + dy);
    }
  out.clamp();
  return out;
}

inline Image jpeg(const Image& img, int quality) {
  return io::decode_jpeg(io::encode_jpeg(img, quality));
}

/// Poisson photon noise: Poisson(img * lambda) / lambda per value.
inline Image shot_noise(const Image& img, double lambda, Rng& rng) {
  if (!(lambda > 0)) throw ConfigError("shot noise lambda must be positive");
  Image out = img;
  for (float& v : out.values())
    v = static_cast<float>(rng.poisson(std::max(0.0f, v) * lambda) / lambda);
  out.clamp();
  return out;
}

inline constexpr double kSnowOpacity = 0.7;

/// Composites `count` white elliptical splats at opacity 0.7.
inline Image snow(const Image& img, int count, Rng& rng) {
  Image out = img;
  const double unit = img.width() / 640.0;
  for (int i = 0; i < count; ++i) {
    const double cx = rng.uniform(0, img.width()), cy = rng.uniform(0, img.height());
    const double rx = rng.uniform(1.0, 4.0) * unit, ry = rng.uniform(1.0, 4.0) * unit;
    for (int y = std::max(0, static_cast<int>(cy - ry)); y <= std::min(img.height() - 1, static_cast<int>(cy + ry)); ++y)
      for (int x = std::max(0, static_cast<int>(cx - rx)); x <= std::min(img.width() - 1, static_cast<int>(cx + rx)); ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        if (dx * dx + dy * dy > 1.0) continue;
        for (int c = 0; c < 3; ++c)
          out.at(x, y, c) = static_cast<float>(out.at(x, y, c) * (1 - kSnowOpacity) + kSnowOpacity);
      }
  }
  out.clamp();
  return out;
}

/// Background pixels (mask == 0) come from `bg`, which must match in size.
inline Image random_background(const Image& img, const InstanceMap& mask, const Image& bg) {
  if (bg.width() != img.width() || bg.height() != img.height() || mask.width() != img.width() ||
      mask.height() != img.height())
    throw ConfigError("random_background: size mismatch");
  Image out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.at(x, y) == 0)
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = bg.at(x, y, c);
  return out;
}

/// alpha * bg + (1 - alpha) * img.
inline Image random_blend(const Image& img, const Image& bg, double alpha) {
  if (bg.width() != img.width() || bg.height() != img.height())
    throw ConfigError("random_blend: size mismatch");
  if (alpha < 0 || alpha > 1) throw ConfigError("random_blend: alpha outside [0, 1]");
  Image out = img;
  auto o = out.values();
  const auto b = bg.values();
  for (std::size_t i = 0; i < o.size(); ++i)
    o[i] = static_cast<float>(alpha * b[i] + (1.0 - alpha) * o[i]);
  return out;
}

/// Reflectance image normalised to unit mean per channel.
struct ReflectanceMap {
  Image r;

  static ReflectanceMap from_image(const Image& img) {
    if (img.empty()) throw ConfigError("empty reflectance image");
    ReflectanceMap m{img};
    for (int c = 0; c < 3; ++c) {
      double s = 0;
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
          float& v = m.r.at(x, y, c);
          v = std::max(v, 1e-3f);  // keep strictly positive
          s += v;
        }
      const double mean = s / static_cast<double>(img.pixel_count());
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
          m.r.at(x, y, c) = static_cast<float>(m.r.at(x, y, c) / mean);
    }
    return m;
  }
};

/// clamp(img * R); R must match in size.
inline Image reflectance_multiply(const Image& img, const Image& r) {
  if (r.width() != img.width() || r.height() != img.height())
    throw ConfigError("reflectance_multiply: size mismatch");
  Image out = img;
  auto o = out.values();
  const auto rv = r.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= rv[i];
  out.clamp();
  return out;
}

// ---------------------------------------------------------------------------
// PASTA: amplitude jitter growing with spatial frequency.

struct PastaParams {
  double alpha = 3.0;
  double beta = 0.25;
  double k = 2.0;
};

namespace detail {
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Per channel: FFT, multiply every coefficient by max(0, 1 + eps) with
/// eps ~ N(0, alpha * (|f| / f_max)^k + beta), inverse FFT. The phase is
/// untouched; conjugate-symmetric coefficients share one draw.
inline Image pasta(const Image& img, Rng& rng, const PastaParams& p = {}) {
  const int w = img.width(), h = img.height();
  if (w == 0 || h == 0 || (p.alpha == 0 && p.beta == 0)) return img;
  const int wc = w / 2 + 1;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> real(n);
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(h) * wc);
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fwd = fftw_plan_dft_r2c_2d(h, w, real.data(), spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(h, w, spec, real.data(), FFTW_ESTIMATE);
  }
  // |f| in cycles per pixel; f_max is the Nyquist corner.
  const double f_max = std::sqrt(0.5);
  std::vector<double> sigma(static_cast<std::size_t>(h) * wc);
  for (int r = 0; r < h; ++r) {
    const double fy = static_cast<double>(r <= h / 2 ? r : r - h) / h;
    for (int c = 0; c < wc; ++c) {
      const double fx = static_cast<double>(c) / w;
      sigma[static_cast<std::size_t>(r) * wc + c] =
          p.alpha * std::pow(std::hypot(fx, fy) / f_max, p.k) + p.beta;
    }
  }
  Image out(w, h);
  std::vector<double> gain(static_cast<std::size_t>(h) * wc);
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) real[static_cast<std::size_t>(y) * w + x] = img.at(x, y, ch);
    fftw_execute(fwd);
    for (std::size_t i = 0; i < gain.size(); ++i) gain[i] = std::max(0.0, 1.0 + rng.normal(0.0, sigma[i]));
    // Columns 0 and w/2 hold both members of conjugate pairs.
    for (int c : {0, w % 2 == 0 ? w / 2 : -1}) {
      if (c < 0) continue;
      for (int r = h / 2 + 1; r < h; ++r)
        gain[static_cast<std::size_t>(r) * wc + c] = gain[static_cast<std::size_t>(h - r) * wc + c];
    }
    for (std::size_t i = 0; i < gain.size(); ++i) {
      spec[i][0] *= gain[i];
      spec[i][1] *= gain[i];
    }
    fftw_execute(inv);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.at(x, y, ch) = static_cast<float>(real[static_cast<std::size_t>(y) * w + x] / static_cast<double>(n));
  }
  {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(spec);
  out.clamp();
  return out;
}

// ---------------------------------------------------------------------------
// Geometric operations.

/// 3x3 projective transform, row-major, normalised so h33 = 1.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  std::array<double, 2> apply(double x, double y) const {
    const double w = m[6] * x + m[7] * y + m[8];
    return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
  }
  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
  Homography inverse() const {
    const double d = det();
    if (std::abs(d) <= 1e-12) throw ValidationError("singular homography");
    Homography r;
    r.m = {(m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d, (m[1] * m[5] - m[2] * m[4]) / d,
           (m[5] * m[6] - m[3] * m[8]) / d, (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
           (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d, (m[0] * m[4] - m[1] * m[3]) / d};
    for (double& v : r.m) v /= r.m[8];
    return r;
  }

  static Homography translation(double tx, double ty) { return {{1, 0, tx, 0, 1, ty, 0, 0, 1}}; }

  /// H with H(src[i]) = dst[i]; empty if the correspondence is degenerate.
  static std::optional<Homography> from_points(const std::array<std::array<double, 2>, 4>& src,
                                               const std::array<std::array<double, 2>, 4>& dst) {
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    for (int i = 0; i < 4; ++i) {
      const double x = src[i][0], y = src[i][1], u = dst[i][0], v = dst[i][1];
      a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
      a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
      b(2 * i) = u;
      b(2 * i + 1) = v;
    }
    const auto lu = a.fullPivLu();
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
    Homography out;
    for (int i = 0; i < 8; ++i) out.m[i] = h(i);
    out.m[8] = 1.0;
    if (std::abs(out.det()) <= 1e-9 || !std::isfinite(out.det())) return std::nullopt;
    return out;
  }
};

/// Warps image and mask by H (source -> destination). Destination pixel
/// centres are mapped back through H^-1; the image is sampled bilinearly
/// and the mask by nearest pixel. Uncovered pixels are zero. Boxes are
/// re-derived from the warped mask.
inline Sample warp_perspective(const Sample& s, const Homography& h, std::int64_t min_pixels) {
  const Homography inv = h.inverse();
  const int w = s.image.width(), ht = s.image.height();
  Sample out{Image(w, ht), InstanceMap(w, ht, 0), s.boxes};
  for (int y = 0; y < ht; ++y)
    for (int x = 0; x < w; ++x) {
      const auto [sx, sy] = inv.apply(x + 0.5, y + 0.5);
      if (!(sx >= 0 && sy >= 0 && sx < w && sy < ht)) continue;
      out.image.set_rgb(x, y, sample_bilinear(s.image, sx - 0.5, sy - 0.5));
      out.mask.at(x, y) = s.mask.at(static_cast<int>(sx), static_cast<int>(sy));
    }
  rederive_boxes(out, min_pixels);
  return out;
}

struct PerspectiveResult {
  Sample sample;
  std::optional<Homography> h;  // empty when skipped
};

/// Moves each image corner inward by up to d * size per axis, d drawn by the
/// caller, and warps. Degenerate corner sets are redrawn up to ten times.
inline PerspectiveResult random_perspective(const Sample& s, Rng& rng, double d,
                                            std::int64_t min_pixels) {
  const double w = s.image.width(), h = s.image.height();
  const std::array<std::array<double, 2>, 4> src{{{0, 0}, {w, 0}, {w, h}, {0, h}}};
  for (int attempt = 0; attempt < 10; ++attempt) {
    auto j = [&](double size) { return rng.uniform(0, d * size); };
    const std::array<std::array<double, 2>, 4> dst{{{j(w), j(h)},
                                                    {w - j(w), j(h)},
                                                    {w - j(w), h - j(h)},
                                                    {j(w), h - j(h)}}};
    if (const auto hm = Homography::from_points(src, dst))
      return {warp_perspective(s, *hm, min_pixels), hm};
  }
  return {s, std::nullopt};
}

/// Box under the jitter's scale-and-shift, clipped to the output frame.
inline BBox lsj_transform_box(const BBox& b, double scale, int off_x, int off_y, int width, int height) {
  return BBox{b.x * scale + off_x, b.y * scale + off_y, b.w * scale, b.h * scale}.clipped(width, height);
}

/// Large-scale jitter with explicit parameters: resize by `scale`, place the
/// result at integer offset (off_x, off_y) in an output of the original
/// size (crop when enlarged, zero-pad when shrunk). Boxes whose transformed
/// extent leaves the frame are dropped; the rest are re-derived from the
/// resampled mask.
inline Sample large_scale_jitter_at(const Sample& s, double scale, int off_x, int off_y,
                                    std::int64_t min_pixels) {
  if (!(scale > 0)) throw ConfigError("jitter scale must be positive");
  const int w = s.image.width(), h = s.image.height();
  Sample out{Image(w, h), InstanceMap(w, h, 0), {}};
  if (scale >= 1.0) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double sx = (x + 0.5 - off_x) / scale, sy = (y + 0.5 - off_y) / scale;
        if (!(sx >= 0 && sy >= 0 && sx < w && sy < h)) continue;
        out.image.set_rgb(x, y, sample_bilinear(s.image, sx - 0.5, sy - 0.5));
        out.mask.at(x, y) = s.mask.at(static_cast<int>(sx), static_cast<int>(sy));
      }
  } else {
    // Each source pixel lands in one destination pixel: box-average the
    // colours, majority-vote the mask (ties to the smaller id).
    std::vector<double> sum(static_cast<std::size_t>(w) * h * 3, 0.0);
    std::vector<int> count(static_cast<std::size_t>(w) * h, 0);
    std::vector<std::map<std::uint16_t, int>> votes(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
      const int dy = static_cast<int>(std::floor(y * scale)) + off_y;
      if (dy < 0 || dy >= h) continue;
      for (int x = 0; x < w; ++x) {
        const int dx = static_cast<int>(std::floor(x * scale)) + off_x;
        if (dx < 0 || dx >= w) continue;
        const std::size_t d = static_cast<std::size_t>(dy) * w + dx;
        for (int c = 0; c < 3; ++c) sum[d * 3 + c] += s.image.at(x, y, c);
        ++count[d];
        ++votes[d][s.mask.at(x, y)];
      }
    }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t d = static_cast<std::size_t>(y) * w + x;
        if (count[d] == 0) continue;
        for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = static_cast<float>(sum[d * 3 + c] / count[d]);
        std::uint16_t best = 0;
        int best_n = -1;
        for (const auto& [id, n] : votes[d])
          if (n > best_n) best = id, best_n = n;  // map order breaks ties low
        out.mask.at(x, y) = best;
      }
    // Majority voting erodes thin tips. Pin each instance's extreme source
    // pixels so its extent stays within a pixel of the scaled box; when two
    // instances pin the same pixel the smaller id keeps it.
    std::map<std::uint16_t, std::array<std::array<int, 2>, 4>> extremes;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const auto id = s.mask.at(x, y);
        if (id == 0) continue;
        auto [it, fresh] = extremes.try_emplace(id);
        auto& e = it->second;
        if (fresh) e = {{{x, y}, {x, y}, {x, y}, {x, y}}};
        if (x < e[0][0]) e[0] = {x, y};
        if (x > e[1][0]) e[1] = {x, y};
        if (y < e[2][1]) e[2] = {x, y};
        if (y > e[3][1]) e[3] = {x, y};
      }
    std::vector<bool> pinned(static_cast<std::size_t>(w) * h, false);
    for (const auto& [id, e] : extremes)
      for (const auto& [x, y] : e) {
        const int dx = static_cast<int>(std::floor(x * scale)) + off_x;
        const int dy = static_cast<int>(std::floor(y * scale)) + off_y;
        if (dx < 0 || dy < 0 || dx >= w || dy >= h) continue;
        const std::size_t d = static_cast<std::size_t>(dy) * w + dx;
        if (pinned[d]) continue;
        pinned[d] = true;
        out.mask.at(dx, dy) = id;
      }
  }
  for (const auto& b : s.boxes) {
    const BBox t = lsj_transform_box(b.bbox, scale, off_x, off_y, w, h);
    if (t.w > 0 && t.h > 0) out.boxes.push_back(b);
  }
  rederive_boxes(out, min_pixels);
  return out;
}

struct JitterDraw {
  double scale = 1.0;
  int off_x = 0;
  int off_y = 0;
};

/// Offsets for a given scale: a uniformly placed crop window when enlarged,
/// a uniformly placed paste position when shrunk.
inline JitterDraw draw_jitter_offsets(Rng& rng, double scale, int w, int h) {
  JitterDraw d{scale, 0, 0};
  const int sw = static_cast<int>(std::lround(w * scale)), sh = static_cast<int>(std::lround(h * scale));
  if (scale >= 1.0) {
    d.off_x = -static_cast<int>(rng.uniform_int(0, std::max(0, sw - w)));
    d.off_y = -static_cast<int>(rng.uniform_int(0, std::max(0, sh - h)));
  } else {
    d.off_x = static_cast<int>(rng.uniform_int(0, std::max(0, w - sw)));
    d.off_y = static_cast<int>(rng.uniform_int(0, std::max(0, h - sh)));
  }
  return d;
}

/// Places the image at the origin of a target x target zero canvas.
inline Sample pad_to_square(const Sample& s, int target = 640) {
  const int w = s.image.width(), h = s.image.height();
  if (target < std::max(w, h)) throw ConfigError("pad target smaller than the image");
  if (w == target && h == target) return s;
  Sample out{Image(target, target), InstanceMap(target, target, 0), s.boxes};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      out.image.set_rgb(x, y, s.image.rgb(x, y));
      out.mask.at(x, y) = s.mask.at(x, y);
    }
  return out;
}

}  // namespace synthdet::augment
