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


// Acceptance runner: one PASS/FAIL line per headline criterion, tolerances
// fixed below. Exit status is the number of failed criteria.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "coco_schema.hpp"
#include "eval_oracle.hpp"
#include "random_instances.hpp"
#include "synthdet/cli/commands.hpp"
#include "temp_dir.hpp"

#ifndef SYNTHDET_SOURCE_DIR
#define SYNTHDET_SOURCE_DIR "."
#endif

namespace {

using namespace synthdet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Tolerances.
constexpr double kOracleTol = 1e-9;
constexpr double kOracleSeconds = 60.0;
constexpr double kCalibrationMaxLoss = 0.05;
constexpr double kSigmas = 3.0;
constexpr double kHalfVisibilityTol = 0.02;
constexpr double kLsjTolPx = 1.0;
constexpr double kBlendTol = 1.0 / 255.0;
constexpr double kThroughputSeconds = 600.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::string kAssets = std::string(SYNTHDET_SOURCE_DIR) + "/sample_assets/assets.json";

// Independent extent scan: x0, y0, x1, y1 (inclusive) and pixel count per id.
struct Extent {
  int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max(), x1 = -1, y1 = -1;
  std::int64_t n = 0;
  BBox box() const { return {double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)}; }
};

std::map<std::uint16_t, Extent> scan_extents(const InstanceMap& m) {
  std::map<std::uint16_t, Extent> out;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const auto id = m.at(x, y);
      if (!id) continue;
      auto& e = out[id];
      e.x0 = std::min(e.x0, x), e.y0 = std::min(e.y0, y);
      e.x1 = std::max(e.x1, x), e.y1 = std::max(e.y1, y);
      ++e.n;
    }
  return out;
}

bool within_sigmas(std::int64_t hits, std::int64_t n, double p) {
  if (n == 0) return false;
  if (p == 0.0 || p == 1.0) return hits == (p == 0.0 ? 0 : n);
  const double sigma = std::sqrt(p * (1 - p) / double(n));
  return std::abs(double(hits) / double(n) - p) <= kSigmas * sigma;
}

std::vector<eval::GroundTruth> ground_truth_of(const std::string& dataset) {
  return io::read_coco((fs::path(dataset) / "annotations.json").string()).ground_truth();
}

// ---------------------------------------------------------------------------

Outcome evaluator_oracle() {
  Rng rng(20260101);
  const auto t0 = Clock::now();
  int n = 0;
  double worst = 0.0;
  while (n < 1000) {
    const auto inst = testgen::random_instance(rng);
    if (inst.gts.empty()) continue;
    const auto r = eval::evaluate(inst.dets, inst.gts);
    const auto o = oracle::evaluate(inst.dets, inst.gts);
    if (r.per_class.size() != o.categories.size()) return {false, fmt("class count differs on instance %d", n)};
    for (std::size_t c = 0; c < o.categories.size(); ++c)
      for (std::size_t t = 0; t < 10; ++t) {
        worst = std::max(worst, std::abs(r.ap_cells[c][t] - o.cells[c][t].ap));
        worst = std::max(worst, std::abs(r.ar_cells[c][t] - o.cells[c][t].ar));
      }
    ++n;
  }
  const double secs = seconds_since(t0);
  return {worst <= kOracleTol && secs < kOracleSeconds,
          fmt("%d instances, max cell |diff| %.3g (tol %.0e), %.2f s (limit %.0f s)", n, worst, kOracleTol, secs,
              kOracleSeconds)};
}

Outcome perfect_detector(const std::string& dataset) {
  const auto gts = ground_truth_of(dataset);
  std::vector<eval::Detection> dets;
  for (const auto& g : gts) dets.push_back({g.image_id, g.category_id, g.bbox, 1.0});
  const auto r = eval::evaluate(dets, gts);
  return {!gts.empty() && r.map == 1.0 && r.mar == 1.0,
          fmt("100 frames, %zu objects: mAP %.17g, mAR %.17g", gts.size(), r.map, r.mar)};
}

// Detector whose score is the IoU with the box it was derived from, plus
// 5% junk boxes scored below 0.1.
std::vector<eval::Detection> calibrated_detector(const std::vector<eval::GroundTruth>& gts, std::uint64_t seed,
                                                 double edge_sigma) {
  Rng rng(seed);
  std::vector<eval::Detection> dets;
  std::vector<std::int64_t> images, cats;
  for (const auto& g : gts) {
    const double w = g.bbox.w, h = g.bbox.h;
    const double x0 = g.bbox.x + rng.normal(0, edge_sigma * w), x1 = g.bbox.right() + rng.normal(0, edge_sigma * w);
    const double y0 = g.bbox.y + rng.normal(0, edge_sigma * h), y1 = g.bbox.bottom() + rng.normal(0, edge_sigma * h);
    const BBox b{std::min(x0, x1), std::min(y0, y1), std::max(std::abs(x1 - x0), 1.0), std::max(std::abs(y1 - y0), 1.0)};
    dets.push_back({g.image_id, g.category_id, b, oracle::box_iou(b, g.bbox)});
    images.push_back(g.image_id);
    cats.push_back(g.category_id);
  }
  const auto junk = static_cast<std::size_t>(std::lround(0.05 * double(gts.size())));
  for (std::size_t i = 0; i < junk; ++i) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(gts.size()) - 1));
    dets.push_back({images[k], cats[rng.uniform_int(0, static_cast<long long>(cats.size()) - 1)],
                    BBox{rng.uniform(0, 140), rng.uniform(0, 100), rng.uniform(4, 30), rng.uniform(4, 30)},
                    rng.uniform(0.0, 0.0999)});
  }
  return dets;
}

Outcome sweep_consistency(const std::string& dataset) {
  const auto grid = eval::default_sweep_thresholds();
  if (grid.empty() || grid.front() != 0.0) return {false, "default grid does not start at 0"};
  std::vector<std::pair<std::vector<eval::Detection>, std::vector<eval::GroundTruth>>> problems;
  Rng rng(77);
  while (problems.size() < 200) {
    auto inst = testgen::random_instance(rng);
    if (!inst.gts.empty()) problems.emplace_back(std::move(inst.dets), std::move(inst.gts));
  }
  const auto gts = ground_truth_of(dataset);
  problems.emplace_back(calibrated_detector(gts, 5, 0.02), gts);
  int exact = 0, monotone = 0;
  for (const auto& [dets, g] : problems) {
    const auto curve = eval::confidence_sweep(dets, g, grid);
    const auto base = eval::evaluate(dets, g);
    exact += curve.reports.front() == base && curve.map.front() == base.map && curve.mar.front() == base.mar;
    bool ok = curve.detection_counts.front() == dets.size();
    for (std::size_t i = 1; i < curve.detection_counts.size(); ++i)
      ok &= curve.detection_counts[i] <= curve.detection_counts[i - 1];
    monotone += ok;
  }
  const int n = static_cast<int>(problems.size());
  return {exact == n && monotone == n,
          fmt("%d problems, %zu thresholds: tau=0 bit-exact %d/%d, counts non-increasing %d/%d", n, grid.size(), exact,
              n, monotone, n)};
}

Outcome calibration(const std::string& dataset) {
  const auto gts = ground_truth_of(dataset);
  const auto dets = calibrated_detector(gts, 11, 0.02);
  eval::EvalParams at0, at9;
  at9.confidence_threshold = 0.9;
  const auto r0 = eval::evaluate(dets, gts, at0);
  const auto r9 = eval::evaluate(dets, gts, at9);
  const double loss = r0.map - r9.map;
  return {loss < kCalibrationMaxLoss,
          fmt("%zu dets (%zu junk): mAP %.4f at tau=0, %.4f at tau=0.9, loss %.4f (limit %.2f)", dets.size(),
              dets.size() - gts.size(), r0.map, r9.map, loss, kCalibrationMaxLoss)};
}

bool same_geometry(const scene::SceneConfig& a, const scene::SceneConfig& b) {
  if (a.object_poses.size() != b.object_poses.size() || a.room.has_value() != b.room.has_value()) return false;
  for (std::size_t i = 0; i < a.object_poses.size(); ++i) {
    const auto &p = a.object_poses[i], &q = b.object_poses[i];
    if (p.asset_id != q.asset_id || !(p.position == q.position) || p.orientation.w != q.orientation.w ||
        p.orientation.x != q.orientation.x || p.orientation.y != q.orientation.y || p.orientation.z != q.orientation.z)
      return false;
  }
  return !a.room || (a.room->width == b.room->width && a.room->length == b.room->length);
}

Outcome distribution_containment() {
  const auto assets = io::load_assets(kAssets);
  const scene::RandomizationConfig cfg;
  const scene::SceneGenerator gen(assets, cfg, {4242, 640, 480, std::nullopt});
  const auto& m = cfg.materials;
  const auto& fx = cfg.postfx;
  const auto& li = cfg.lighting;
  const auto& sc = cfg.configuration;
  constexpr std::int64_t kConfigs = 100000, kTrials = 10000;
  std::int64_t range_violations = 0, schedule_violations = 0;
  std::array<std::int64_t, 6> toggles{};
  std::string first_problem;
  auto violation = [&](std::int64_t f, const std::string& what) {
    ++range_violations;
    if (first_problem.empty()) first_problem = fmt("frame %lld: %s", static_cast<long long>(f), what.c_str());
  };
  std::optional<scene::SceneConfig> prev;
  std::int64_t rebuilds = 0, hdri_changes = 0, material_changes = 0;
  for (std::int64_t f = 0; f < kConfigs; ++f) {
    scene::SceneConfig s = gen.schedule(f, prev ? &*prev : nullptr);
    for (const auto& [id, mp] : s.materials) {
      if (!m.albedo_desaturation.contains(mp.albedo_desaturation) || !m.albedo_add.contains(mp.albedo_add) ||
          !m.albedo_brightness.contains(mp.albedo_brightness) || !m.diffuse_tint.contains(mp.diffuse_tint) ||
          !m.roughness.contains(mp.roughness) || !m.metallic.contains(mp.metallic) ||
          !m.specular_level.contains(mp.specular_level) || !m.emissive_color.contains(mp.emissive_color))
        violation(f, "material " + id);
    }
    const auto& p = s.postfx;
    if (!fx.scan_line_spread.contains(p.scan_line_spread) || !fx.grain_amount.contains(p.grain_amount) ||
        !fx.grain_size.contains(p.grain_size) || !fx.color_amount.contains(p.color_amount))
      violation(f, "postfx");
    if (!li.ambient_intensity.contains(s.lighting.ambient_intensity)) violation(f, "ambient");
    if (s.lighting.hdri_id >= assets->hdris().size()) violation(f, "hdri_id");
    const auto nl = static_cast<long long>(s.lighting.point_lights.size());
    if (nl < li.point_light_count.lo || nl > li.point_light_count.hi) violation(f, "light count");
    for (const auto& l : s.lighting.point_lights)
      if (!li.point_light_intensity.contains(l.intensity) || !li.point_light_color.contains(l.color))
        violation(f, "point light");
    const Vec3 center = gen.orbit_center(s);
    if (std::abs(norm(s.camera.position - center) - sc.camera_radius.lo) > 1e-6) violation(f, "camera radius");
    if (s.camera.position.z < center.z - 1e-9) violation(f, "camera below orbit centre");
    if (s.room) {
      if (s.room->width < sc.room_width.lo || s.room->width > sc.room_width.hi) violation(f, "room width");
      const double ratio = s.room->length / s.room->width;
      if (ratio < sc.room_length_ratio.lo - 1e-12 || ratio > sc.room_length_ratio.hi + 1e-12) violation(f, "room ratio");
    }
    const auto dropped = static_cast<long long>(s.object_poses.size() + s.discarded.size());
    if (dropped < sc.target_count.lo + sc.distractor_count.lo || dropped > sc.target_count.hi + sc.distractor_count.hi)
      violation(f, "object count");
    if (f < kTrials) {
      toggles[0] += p.tv_noise, toggles[1] += p.scan_lines, toggles[2] += p.vertical_lines;
      toggles[3] += p.splotches, toggles[4] += p.film_grain, toggles[5] += p.vignetting;
    }
    // Refresh periods, by diffing consecutive configs.
    const auto ev = gen.refresh_events(f);
    if (ev.scene != (f % 3000 == 0) || ev.hdri != (f % 2000 == 0) || ev.materials != (f % 20 == 0))
      ++schedule_violations;
    if (prev) {
      const bool geometry = !same_geometry(s, *prev);
      const bool materials = scene::to_json(s.materials.begin()->second) != scene::to_json(prev->materials.begin()->second) ||
                             s.materials.size() != prev->materials.size();
      const bool hdri = s.lighting.hdri_id != prev->lighting.hdri_id;
      rebuilds += geometry, hdri_changes += hdri, material_changes += materials;
      if (geometry != (f % 3000 == 0)) ++schedule_violations;
      if (materials != (f % 20 == 0)) ++schedule_violations;
      if (hdri && f % 2000 != 0) ++schedule_violations;
      if (s.lighting.ambient_intensity == prev->lighting.ambient_intensity) ++schedule_violations;
      if (s.postfx.grain_amount == prev->postfx.grain_amount) ++schedule_violations;
      if (s.camera.position == prev->camera.position) ++schedule_violations;
    }
    prev = std::move(s);
  }
  bool toggles_ok = true;
  std::string rates;
  for (auto t : toggles) {
    toggles_ok &= within_sigmas(t, kTrials, 0.1);
    rates += fmt("%.4f ", double(t) / kTrials);
  }

  // Augmentation probabilities, over pipeline runs on a small sample.
  const auto corpora = augment::Corpora::load(std::string(SYNTHDET_SOURCE_DIR) + "/sample_assets/backgrounds",
                                              std::string(SYNTHDET_SOURCE_DIR) + "/sample_assets/reflectance");
  const augment::AugmentationPlan plan;
  augment::Sample sample{Image(24, 18, 0.4f), InstanceMap(24, 18, 0), {}};
  for (int y = 4; y < 12; ++y)
    for (int x = 5; x < 15; ++x) sample.mask.at(x, y) = 1;
  augment::rederive_boxes(sample, 1);
  for (auto& b : sample.boxes) b.category_id = 1;
  std::int64_t applied = 0;
  std::array<std::int64_t, augment::kAugCount> fired{};
  for (std::int64_t i = 0; i < kTrials; ++i) {
    Rng rng(derive_seed(99, static_cast<std::uint64_t>(i), "table2"));
    const auto r = augment::apply_pipeline(sample, rng, plan, corpora);
    applied += r.record.pipeline_applied;
    for (std::size_t a = 0; a < augment::kAugCount; ++a) fired[a] += r.record.fired(static_cast<augment::Aug>(a));
  }
  int aug_ok = within_sigmas(applied, kTrials, plan.pipeline_probability);
  for (std::size_t a = 0; a < augment::kAugCount; ++a) aug_ok += within_sigmas(fired[a], applied, plan.probability[a]);

  const bool pass = range_violations == 0 && schedule_violations == 0 && toggles_ok && aug_ok == 1 + int(augment::kAugCount);
  return {pass, fmt("%lld configs: %lld range violations%s%s, %lld schedule violations (rebuilds %lld, hdri changes %lld, "
                    "material refreshes %lld); Bernoulli(0.1) rates %s; augmentation rates within 3 sigma %d/%zu",
                    static_cast<long long>(kConfigs), static_cast<long long>(range_violations),
                    first_problem.empty() ? "" : " first ", first_problem.c_str(),
                    static_cast<long long>(schedule_violations), static_cast<long long>(rebuilds + 1),
                    static_cast<long long>(hdri_changes), static_cast<long long>(material_changes + 1), rates.c_str(),
                    aug_ok, augment::kAugCount + 1)};
}

double half_occlusion_visibility() {
  auto quad = [](double half) {
    TriangleMesh q;
    q.positions = {{-half, 0, -half}, {half, 0, -half}, {half, 0, half}, {-half, 0, half}};
    q.triangles = {{0, 1, 2}, {0, 2, 3}};
    return q;
  };
  AssetStore store;
  store.add(MeshAsset::make("far", quad(0.1), 1, "far"));
  store.add(MeshAsset::make("near", quad(0.05), 2, "near"));
  store.add(HdriAsset{"flat", Image(8, 4, 0.5f), {}});
  scene::SceneConfig s;
  s.camera = {{0, -1, 0}, {0, 0, 0}, 60.0 * kPi / 180.0, 200, 200};
  s.lighting.ambient_intensity = 0.3;
  // The near quad is half as far and half as large: same screen size,
  // shifted to cover the right half of the far one.
  s.object_poses.push_back({"far", {0, 0, 0}, Quat{}, false, {}});
  s.object_poses.push_back({"near", {0.05, -0.5, 0}, Quat{}, false, {}});
  const auto out = render::render(s, store, {});
  for (const auto& a : annotate::extract_annotations(out, s, store, {0.0, 1}))
    if (a.asset_id == "far") return a.visibility;
  return -1.0;
}

Outcome annotation_exactness(const std::string& dataset, const scene::RandomizationConfig& cfg, std::uint64_t seed,
                             int w, int h) {
  const auto ds = io::read_dataset(dataset);
  const auto assets = io::load_assets(kAssets);
  const scene::SceneGenerator gen(assets, cfg, {seed, w, h, std::nullopt});
  std::int64_t anns = 0, box_mismatch = 0, unoccluded = 0, not_one = 0;
  render::RenderSettings solo_settings;
  solo_settings.jitter = false;
  for (std::size_t i = 0; i < ds.manifest.frame_count(); ++i) {
    const auto f = ds.load_frame(i);
    const auto ext = scan_extents(f.instance);
    const auto s = gen.config_at(f.entry.frame_index);
    for (const auto& a : f.entry.annotations) {
      ++anns;
      const auto it = ext.find(a.instance_id);
      if (it == ext.end() || !(it->second.box() == a.bbox_modal) || it->second.n != a.pixel_count) ++box_mismatch;
      // The object rendered alone, without room or other objects.
      scene::SceneConfig solo = s;
      solo.room.reset();
      solo.mode = scene::SceneMode::kHdriDrop;
      solo.object_poses = {s.object_poses[a.instance_id - 1u]};
      const auto alone = render::render(solo, *assets, solo_settings).instance_map;
      bool covered = true, border = false;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (alone.at(x, y) == 1) {
            covered &= f.instance.at(x, y) == a.instance_id;
            border |= x == 0 || y == 0 || x == w - 1 || y == h - 1;
          }
      if (covered && !border) {
        ++unoccluded;
        not_one += a.visibility != 1.0;
      }
    }
  }
  const double half = half_occlusion_visibility();
  const bool pass = anns > 0 && box_mismatch == 0 && unoccluded > 0 && not_one == 0 &&
                    std::abs(half - 0.5) <= kHalfVisibilityTol;
  return {pass, fmt("%zu frames, %lld annotations: modal box != mask extent %lld; %lld unoccluded in-frame objects, "
                    "visibility != 1 for %lld; half-occlusion visibility %.4f (0.5 +- %.2f)",
                    ds.manifest.frame_count(), static_cast<long long>(anns), static_cast<long long>(box_mismatch),
                    static_cast<long long>(unoccluded), static_cast<long long>(not_one), half, kHalfVisibilityTol)};
}

std::vector<std::uint8_t> bytes8(const Image& img) {
  std::vector<std::uint8_t> out;
  for (float v : img.values()) out.push_back(io::to_u8(v));
  return out;
}

Outcome augmentation_geometry(const std::string& dataset) {
  const auto ds = io::read_dataset(dataset);
  constexpr std::int64_t kMin = 16;
  std::int64_t persp_boxes = 0, persp_bad = 0, lsj_checked = 0, lsj_bad = 0, lsj_inconsistent = 0;
  for (std::size_t i = 0; i < ds.manifest.frame_count(); ++i) {
    const auto s = cli::sample_from_frame(ds.load_frame(i));
    const int w = s.image.width(), h = s.image.height();
    std::set<std::uint16_t> source_ids;
    for (const auto& b : s.boxes) source_ids.insert(b.instance_id);
    for (int rep = 0; rep < 2; ++rep) {
      Rng rng(derive_seed(3, i * 2 + rep, "geometry"));
      const auto r = augment::random_perspective(s, rng, 0.15, kMin);
      if (!r.h) {
        ++persp_bad;
        continue;
      }
      // Oracle: warp the source mask with an independently inverted H.
      Eigen::Matrix3d hm;
      for (int k = 0; k < 9; ++k) hm(k / 3, k % 3) = r.h->m[k];
      const Eigen::Matrix3d inv = hm.inverse();
      InstanceMap warped(w, h, 0);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const Eigen::Vector3d p = inv * Eigen::Vector3d(x + 0.5, y + 0.5, 1.0);
          const double sx = p.x() / p.z(), sy = p.y() / p.z();
          if (sx >= 0 && sy >= 0 && sx < w && sy < h) warped.at(x, y) = s.mask.at(int(sx), int(sy));
        }
      std::map<std::uint16_t, BBox> expect;
      for (const auto& [id, e] : scan_extents(warped))
        if (e.n >= kMin && source_ids.count(id)) expect[id] = e.box();
      std::map<std::uint16_t, BBox> got;
      for (const auto& b : r.sample.boxes) got[b.instance_id] = b.bbox;
      persp_boxes += static_cast<std::int64_t>(got.size());
      if (got != expect) ++persp_bad;
    }
    Rng rng(derive_seed(4, i, "lsj"));
    const auto d = augment::draw_jitter_offsets(rng, rng.uniform(0.1, 2.0), w, h);
    const auto out = augment::large_scale_jitter_at(s, d.scale, d.off_x, d.off_y, kMin);
    const auto ext = scan_extents(out.mask);
    for (const auto& b : out.boxes) {
      const auto e = ext.find(b.instance_id);
      if (e == ext.end() || !(e->second.box() == b.bbox)) ++lsj_inconsistent;
      const auto& src = *std::find_if(s.boxes.begin(), s.boxes.end(),
                                      [&](const auto& x) { return x.instance_id == b.instance_id; });
      const double x0 = src.bbox.x * d.scale + d.off_x, y0 = src.bbox.y * d.scale + d.off_y;
      const double x1 = x0 + src.bbox.w * d.scale, y1 = y0 + src.bbox.h * d.scale;
      if (x0 < 0 || y0 < 0 || x1 > w || y1 > h) continue;  // cropped: extent may be tighter
      ++lsj_checked;
      if (std::abs(b.bbox.x - x0) > kLsjTolPx || std::abs(b.bbox.y - y0) > kLsjTolPx ||
          std::abs(b.bbox.right() - x1) > kLsjTolPx || std::abs(b.bbox.bottom() - y1) > kLsjTolPx)
        ++lsj_bad;
    }
  }

  // Identity parameters are byte-level no-ops.
  auto f0 = ds.load_frame(0);
  const auto s = cli::sample_from_frame(f0);
  const Image& img = s.image;
  const int w = img.width(), h = img.height();
  Rng rng(5);
  std::vector<std::pair<const char*, bool>> ids;
  auto same = [&](const Image& x) { return bytes8(x) == bytes8(img) && x == img; };
  ids.emplace_back("contrast", same(augment::contrast(img, 1.0)));
  ids.emplace_back("brightness", same(augment::brightness(img, 1.0)));
  ids.emplace_back("enhancement", same(augment::enhancement(img, 1.0)));
  ids.emplace_back("snow", same(augment::snow(img, 0, rng)));
  ids.emplace_back("pasta", same(augment::pasta(img, rng, {0.0, 0.0, 2.0})));
  ids.emplace_back("random_blend", same(augment::random_blend(img, Image(w, h, 0.3f), 0.0)));
  ids.emplace_back("reflectance", same(augment::reflectance_multiply(img, Image(w, h, 1.0f))));
  ids.emplace_back("random_background", same(augment::random_background(img, InstanceMap(w, h, 1), Image(w, h, 0.3f))));
  const auto pr = augment::random_perspective(s, rng, 0.0, 0);
  ids.emplace_back("random_perspective", pr.sample.image == img && bytes8(pr.sample.image) == bytes8(img) &&
                                             pr.sample.mask == s.mask && pr.sample.boxes == s.boxes);
  ids.emplace_back("large_scale_jitter", augment::large_scale_jitter_at(s, 1.0, 0, 0, 0) == s);
  augment::Sample square{Image(h, h), InstanceMap(h, h, 0), {}};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < h; ++x) {
      square.image.set_rgb(x, y, img.rgb(x, y));
      square.mask.at(x, y) = s.mask.at(x, y);
    }
  augment::rederive_boxes(square, 0);
  ids.emplace_back("pad_to_square", augment::pad_to_square(square, h) == square);
  std::string broken;
  for (const auto& [name, ok] : ids)
    if (!ok) broken += std::string(broken.empty() ? "" : ",") + name;

  const bool pass = persp_bad == 0 && persp_boxes > 0 && lsj_bad == 0 && lsj_inconsistent == 0 && lsj_checked > 0 &&
                    broken.empty();
  return {pass, fmt("perspective: %lld boxes, %lld mismatching warps; LSJ: %lld in-frame boxes, %lld beyond %.0f px, "
                    "%lld off mask; identity no-ops %zu/%zu%s%s",
                    static_cast<long long>(persp_boxes), static_cast<long long>(persp_bad),
                    static_cast<long long>(lsj_checked), static_cast<long long>(lsj_bad), kLsjTolPx,
                    static_cast<long long>(lsj_inconsistent), ids.size() - (broken.empty() ? 0 : std::count(broken.begin(), broken.end(), ',') + 1),
                    ids.size(), broken.empty() ? "" : " broken: ", broken.c_str())};
}

Outcome blend_reflectance() {
  const Vec3 a{0.2, 0.5, 0.8}, b{0.9, 0.1, 0.4};
  Image img(32, 24), bg(32, 24);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x) {
      img.set_rgb(x, y, a);
      bg.set_rgb(x, y, b);
    }
  const Image out = io::quantize8(augment::random_blend(img, bg, 0.1));
  double worst = 0.0;
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(out.at(x, y, c) - (0.9 * a[c] + 0.1 * b[c])));
  Image textured(32, 24);
  Rng rng(8);
  for (float& v : textured.values()) v = float(rng.uniform());
  const bool identity = augment::reflectance_multiply(textured, Image(32, 24, 1.0f)) == textured;
  return {worst <= kBlendTol && identity,
          fmt("blend alpha=0.1 max |out - (0.9 A + 0.1 B)| = %.5f (tol 1/255 = %.5f); reflectance R=1 identity: %s",
              worst, kBlendTol, identity ? "yes" : "no")};
}

Outcome corruption_monotonicity(const std::string& dataset) {
  const auto ds = io::read_dataset(dataset);
  std::vector<Image> images;
  for (std::size_t i = 0; i < 20; ++i) images.push_back(ds.load_frame(i).rgb);
  bool pass = true;
  std::string detail = "20 images;";
  for (auto kind : eval::kAllCorruptions) {
    double prev = -1.0;
    detail += " " + eval::to_string(kind) + " [";
    for (int sev = 1; sev <= 5; ++sev) {
      double sum = 0.0;
      for (std::size_t i = 0; i < images.size(); ++i) {
        Rng rng(derive_seed(17, i, eval::to_string(kind) + ":" + std::to_string(sev)));
        Image out = eval::corrupt(images[i], {kind, sev}, rng);
        if (out.width() != images[i].width()) out = resize(out, images[i].width(), images[i].height());
        sum += mean_abs_diff(images[i], out);
      }
      const double mean = sum / double(images.size());
      pass &= mean > prev;
      prev = mean;
      detail += fmt("%s%.4f", sev == 1 ? "" : " ", mean);
    }
    detail += "]";
  }
  return {pass, detail};
}

Outcome determinism_throughput(const std::string& one, const std::string& many, int many_workers,
                               const std::string& scratch) {
  const auto d1 = io::read_dataset(one).manifest.digest();
  const auto dn = io::read_dataset(many).manifest.digest();
  const int workers = cli::resolve_workers(0);
  cli::GenerateOptions g;
  g.assets_path = kAssets;
  g.out = scratch;
  g.frames = 1000;
  g.seed = 31337;
  g.width = 320;
  g.height = 240;
  g.workers = workers;
  const auto t0 = Clock::now();
  cli::cmd_generate(g);
  const double secs = seconds_since(t0);
  fs::remove_all(scratch);
  return {d1 == dn && secs <= kThroughputSeconds,
          fmt("digest 1 worker %.12s == %d workers %.12s: %s; 1000 frames 320x240, 1 ray/px, direct light: %.1f s on "
              "%d core(s) = %.2f frames/s (soft limit %.0f s)",
              d1.c_str(), many_workers, dn.c_str(), d1 == dn ? "yes" : "no", secs, workers, 1000.0 / secs,
              kThroughputSeconds)};
}

Outcome round_trip(const std::string& dataset, const std::string& copy) {
  const auto ds = io::read_dataset(dataset);
  std::vector<io::Frame> frames;
  for (std::size_t i = 0; i < ds.manifest.frame_count(); ++i) frames.push_back(ds.load_frame(i));
  io::write_dataset(copy, ds.manifest, frames);
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(dataset)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), dataset);
    if (testgen::slurp(e.path()) != testgen::slurp(fs::path(copy) / rel)) ++differing;
  }
  std::size_t copy_files = 0;
  for (const auto& e : fs::recursive_directory_iterator(copy)) copy_files += e.is_regular_file();
  const auto violations =
      testgen::coco_violations(nlohmann::json::parse(testgen::slurp(fs::path(dataset) / "annotations.json")));
  return {differing == 0 && files == copy_files && violations.empty(),
          fmt("%zu files rewritten, %zu differ, %zu extra; independent COCO checker: %zu violations%s%s", files,
              differing, copy_files - std::min(copy_files, files), violations.size(), violations.empty() ? "" : ", first: ",
              violations.empty() ? "" : violations.front().c_str())};
}

}  // namespace

int main() {
  int failed = 0;
  auto run = [&](const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %-32s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };

  testgen::TempDir work("synthdet_acceptance");
  const std::string base = (work / "base").string(), base_many = (work / "base_many").string();
  const std::string annotated = (work / "annotated").string();
  constexpr int kManyWorkers = 4;
  scene::RandomizationConfig short_scenes;
  short_scenes.configuration.scene_period = 25;  // eight scenes in 200 frames
  try {
    cli::GenerateOptions g;
    g.assets_path = kAssets;
    g.out = base;
    g.frames = 100;
    g.seed = 2026;
    g.width = 160;
    g.height = 120;
    g.workers = 1;
    cli::cmd_generate(g);
    g.out = base_many;
    g.workers = kManyWorkers;
    cli::cmd_generate(g);
    io::write_text((work / "short_scenes.json").string(), short_scenes.to_json().dump(2));
    g.config_path = (work / "short_scenes.json").string();
    g.out = annotated;
    g.frames = 200;
    g.seed = 909;
    g.width = 128;
    g.height = 96;
    g.workers = 0;
    cli::cmd_generate(g);
  } catch (const std::exception& e) {
    std::printf("[FAIL] fixture generation: %s\n", e.what());
    return 11;
  }

  run("evaluator_oracle_equivalence", evaluator_oracle);
  run("perfect_detector_fixed_point", [&] { return perfect_detector(base); });
  run("sweep_consistency", [&] { return sweep_consistency(base); });
  run("calibration_in_miniature", [&] { return calibration(base); });
  run("distribution_containment", distribution_containment);
  run("annotation_exactness", [&] { return annotation_exactness(annotated, short_scenes, 909, 128, 96); });
  run("augmentation_geometry_exactness", [&] { return augmentation_geometry(base); });
  run("blend_reflectance_closed_forms", blend_reflectance);
  run("corruption_monotonicity", [&] { return corruption_monotonicity(base); });
  run("determinism_and_throughput",
      [&] { return determinism_throughput(base, base_many, kManyWorkers, (work / "throughput").string()); });
  run("round_trip_io", [&] { return round_trip(base, (work / "copy").string()); });
  std::printf("%d of 11 criteria failed\n", failed);
  return failed;
}
