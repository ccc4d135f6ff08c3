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


// Batch commands behind the command-line tool. Each command is a plain
// function so it can be driven from tests without a subprocess.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "synthdet/annotate/annotate.hpp"
#include "synthdet/augment/pipeline.hpp"
#include "synthdet/datasetio/asset_manifest.hpp"
#include "synthdet/datasetio/dataset.hpp"
#include "synthdet/evaluate/corrupt.hpp"
#include "synthdet/evaluate/metrics.hpp"
#include "synthdet/render/renderer.hpp"
#include "synthdet/scenegen/scene.hpp"

#ifndef SYNTHDET_VERSION
#define SYNTHDET_VERSION "0.0.0"
#endif

namespace synthdet::cli {

inline constexpr const char* kVersion = SYNTHDET_VERSION;

/// Serialises log lines from worker threads.
class Logger {
 public:
  explicit Logger(std::ostream* out) : out_(out) {}
  void line(const std::string& s) {
    if (!out_) return;
    std::lock_guard<std::mutex> lock(mu_);
    *out_ << s << '\n';
    out_->flush();
  }

 private:
  std::ostream* out_;
  std::mutex mu_;
};

/// Rethrows `e` as the same library error type with `prefix` prepended.
[[noreturn]] inline void rethrow_with_context(std::exception_ptr e, const std::string& prefix) {
  try {
    std::rethrow_exception(e);
  } catch (const ParseError& x) {
    throw ParseError(prefix + x.what(), x.byte());
  } catch (const ConfigError& x) {
    throw ConfigError(prefix + x.what());
  } catch (const LoadError& x) {
    throw LoadError(prefix + x.what());
  } catch (const SchemaError& x) {
    throw SchemaError(prefix + x.what());
  } catch (const ValidationError& x) {
    throw ValidationError(prefix + x.what());
  } catch (const IoError& x) {
    throw IoError(prefix + x.what());
  } catch (const std::exception& x) {
    throw Error(prefix + x.what());
  }
}

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on `workers` threads, each taking one
/// contiguous block so per-worker state (like scene reuse) stays valid.
/// Returns the first failure per block, keyed by item index.
inline std::map<std::size_t, std::exception_ptr> parallel_blocks(
    std::size_t n, int workers, const std::function<void(std::size_t begin, std::size_t end,
                                                         std::function<void(std::size_t)> mark)>& block) {
  std::map<std::size_t, std::exception_ptr> failures;
  std::mutex mu;
  const auto w = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t begin = n * k / w, end = n * (k + 1) / w;
    if (begin == end) continue;
    threads.emplace_back([&, begin, end] {
      std::size_t current = begin;
      try {
        block(begin, end, [&](std::size_t i) { current = i; });
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        failures[current] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  return failures;
}

inline void remove_frame_files(const std::string& dir, std::int64_t index) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::remove(fs::path(dir) / ("rgb/" + io::frame_stem(index) + ".png"), ec);
  fs::remove(fs::path(dir) / ("instance/" + io::frame_stem(index) + ".png"), ec);
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::string config_path;  // empty: built-in defaults
  std::string assets_path;
  std::string out;
  std::int64_t frames = 0;
  std::uint64_t seed = 0;
  std::optional<scene::SceneMode> mode;
  int width = 640;
  int height = 480;
  int subframes = 1;
  int workers = 0;
  annotate::AnnotateParams annotate;
};

/// Renders, annotates and writes frames [0, frames). Every frame depends
/// only on (seed, index), so the worker count never changes the output.
/// On failure the frames finished so far are indexed, the failed frame's
/// files are removed, and the error is rethrown with the frame index.
inline io::DatasetManifest cmd_generate(const GenerateOptions& opt, std::ostream* log_out = nullptr) {
  Logger log(log_out);
  if (opt.frames < 0) throw ConfigError("frame count must be non-negative");
  if (opt.out.empty()) throw ConfigError("no output directory given");
  const auto config = opt.config_path.empty() ? scene::RandomizationConfig{}
                                              : scene::RandomizationConfig::load(opt.config_path);
  const auto assets = io::load_assets(opt.assets_path);
  const scene::SceneGenerator gen(assets, config, {opt.seed, opt.width, opt.height, opt.mode});
  render::RenderSettings base;
  base.subframe_count = opt.subframes;
  base.validate();
  const int workers = resolve_workers(opt.workers);
  log.line(std::string("synthdet ") + kVersion + " generate seed=" + std::to_string(opt.seed) +
           " config_digest=" + config.digest() + " asset_digest=" + assets->digest() +
           " frames=" + std::to_string(opt.frames) + " workers=" + std::to_string(workers));

  io::DatasetManifest m;
  m.seed = opt.seed;
  m.config_digest = config.digest();
  m.asset_digest = assets->digest();
  m.categories = assets->categories();
  io::ensure_dir(opt.out);

  const auto n = static_cast<std::size_t>(opt.frames);
  std::vector<std::optional<io::FrameEntry>> done(n);
  std::atomic<std::size_t> finished{0};
  const std::size_t progress_every = std::max<std::size_t>(1, n / 10);
  const auto failures = parallel_blocks(n, workers, [&](std::size_t begin, std::size_t end, auto mark) {
    std::optional<scene::SceneConfig> prev;
    for (std::size_t i = begin; i < end; ++i) {
      mark(i);
      const auto frame = static_cast<std::int64_t>(i);
      scene::SceneConfig s = gen.schedule(frame, prev ? &*prev : nullptr);
      render::RenderSettings rs = base;
      rs.seed = derive_seed(opt.seed, i, "render");
      const auto out = render::render_frame(s, *assets, rs);
      io::FrameEntry e;
      e.frame_index = frame;
      e.scene_digest = scene::digest(s);
      e.annotations = annotate::extract_annotations(out, s, *assets, opt.annotate);
      const auto ev = gen.refresh_events(frame);
      nlohmann::json events = nlohmann::json::array();
      if (ev.scene) events.push_back("scene");
      if (ev.hdri) events.push_back("hdri");
      if (ev.materials) events.push_back("materials");
      e.provenance = {{"mode", to_string(s.mode)}, {"events", events}};
      if (ev.scene) e.discarded = s.discarded;  // logged once per scene
      done[i] = io::write_frame(opt.out, std::move(e), out.rgb, out.instance_map);
      prev = std::move(s);
      const auto k = ++finished;
      if (k % progress_every == 0 || k == n) log.line("  " + std::to_string(k) + "/" + std::to_string(n) + " frames");
    }
  });

  std::vector<std::int64_t> scene_rebuilds, hdri_switches;
  std::int64_t material_refreshes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!done[i]) continue;
    const auto ev = gen.refresh_events(static_cast<std::int64_t>(i));
    if (ev.scene) scene_rebuilds.push_back(static_cast<std::int64_t>(i));
    if (ev.hdri) hdri_switches.push_back(static_cast<std::int64_t>(i));
    material_refreshes += ev.materials;
    if (!done[i]->discarded.empty())
      log.line("  frame " + std::to_string(i) + ": discarded " + std::to_string(done[i]->discarded.size()) +
               " object(s) during settling");
    m.frames.push_back(std::move(*done[i]));
  }
  m.extra = {{"tool", "synthdet"},
             {"tool_version", kVersion},
             {"command", "generate"},
             {"width", opt.width},
             {"height", opt.height},
             {"subframes", opt.subframes},
             {"mode", opt.mode ? to_string(*opt.mode) : "random"},
             {"events",
              {{"scene_rebuilds", scene_rebuilds},
               {"hdri_switches", hdri_switches},
               {"material_refreshes", material_refreshes}}}};
  for (const auto& [i, _] : failures) remove_frame_files(opt.out, static_cast<std::int64_t>(i));
  m = io::write_index(opt.out, std::move(m));
  if (!failures.empty())
    rethrow_with_context(failures.begin()->second, "frame " + std::to_string(failures.begin()->first) + ": ");
  log.line("  manifest digest " + m.digest());
  return m;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentOptions {
  std::string dataset;
  std::string plan_path;  // empty: default plan
  std::string backgrounds;
  std::string reflectance;
  std::string out;
  std::uint64_t seed = 0;
  int copies = 1;
  int workers = 0;
};

/// Builds an augmentation sample from a stored frame; boxes are the modal
/// boxes, which are the instance-mask extents.
inline augment::Sample sample_from_frame(const io::Frame& f) {
  augment::Sample s{f.rgb, f.instance, {}};
  for (const auto& a : f.entry.annotations) s.boxes.push_back({a.instance_id, a.category_id, a.bbox_modal});
  return s;
}

/// Annotations after augmentation. Modal boxes and pixel counts come from
/// the augmented mask. When a geometric step ran the amodal box is no
/// longer known and is set to the modal box.
inline std::vector<annotate::Annotation> annotations_after(const io::Frame& src, const augment::AugmentResult& r) {
  std::map<std::uint16_t, std::int64_t> counts;
  for (auto id : r.sample.mask.pixels()) ++counts[id];
  const bool geometric = r.record.fired(augment::Aug::kRandomPerspective) ||
                         r.record.fired(augment::Aug::kLargeScaleJitter);
  std::vector<annotate::Annotation> out;
  for (const auto& b : r.sample.boxes) {
    const auto it = std::find_if(src.entry.annotations.begin(), src.entry.annotations.end(),
                                 [&](const auto& a) { return a.instance_id == b.instance_id; });
    annotate::Annotation a = *it;
    a.bbox_modal = b.bbox;
    a.pixel_count = counts[b.instance_id];
    if (geometric) a.bbox_amodal = b.bbox;
    out.push_back(std::move(a));
  }
  return out;
}

/// Applies the plan to every frame of a dataset, `copies` times each.
/// Output frame index = source index * copies + copy.
inline io::DatasetManifest cmd_augment(const AugmentOptions& opt, std::ostream* log_out = nullptr) {
  Logger log(log_out);
  if (opt.copies < 1) throw ConfigError("copies must be >= 1");
  if (opt.out.empty()) throw ConfigError("no output directory given");
  const auto plan = opt.plan_path.empty() ? augment::AugmentationPlan{} : augment::AugmentationPlan::load(opt.plan_path);
  const auto corpora = augment::Corpora::load(opt.backgrounds, opt.reflectance);
  augment::check_corpora(plan, corpora);  // before any work
  const auto src = io::read_dataset(opt.dataset);
  if (std::filesystem::exists(opt.out) && std::filesystem::equivalent(opt.out, opt.dataset))
    throw ConfigError("augment output must differ from its input dataset");
  const int workers = resolve_workers(opt.workers);
  log.line(std::string("synthdet ") + kVersion + " augment seed=" + std::to_string(opt.seed) +
           " plan_digest=" + plan.digest() + " source_digest=" + src.manifest.digest() +
           " frames=" + std::to_string(src.manifest.frame_count()) + " copies=" + std::to_string(opt.copies));

  const std::size_t n = src.manifest.frame_count() * static_cast<std::size_t>(opt.copies);
  std::vector<std::optional<io::FrameEntry>> done(n);
  std::vector<augment::AugmentRecord> records(n);
  io::ensure_dir(opt.out);
  const auto failures = parallel_blocks(n, workers, [&](std::size_t begin, std::size_t end, auto mark) {
    for (std::size_t j = begin; j < end; ++j) {
      mark(j);
      const std::size_t i = j / static_cast<std::size_t>(opt.copies);
      const auto frame = src.load_frame(i);
      const auto out_index = frame.entry.frame_index * opt.copies + static_cast<std::int64_t>(j % opt.copies);
      Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(out_index), "augment"));
      auto r = augment::apply_pipeline(sample_from_frame(frame), rng, plan, corpora);
      io::FrameEntry e = frame.entry;
      e.frame_index = out_index;
      e.annotations = annotations_after(frame, r);
      e.discarded.clear();
      e.provenance = {{"source_frame", frame.entry.frame_index},
                      {"source_rgb_sha256", frame.entry.rgb_digest},
                      {"augmentation", r.record.to_json()}};
      done[j] = io::write_frame(opt.out, std::move(e), r.sample.image, r.sample.mask);
      records[j] = std::move(r.record);
    }
  });

  io::DatasetManifest m;
  m.seed = opt.seed;
  m.config_digest = plan.digest();
  m.asset_digest = src.manifest.asset_digest;
  m.categories = src.manifest.categories;
  std::size_t applied = 0;
  nlohmann::json fired = nlohmann::json::object();
  for (auto name : augment::kAugNames) fired[std::string(name)] = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!done[j]) continue;
    applied += records[j].pipeline_applied;
    for (const auto& a : records[j].applied) fired[a.name] = fired[a.name].get<int>() + 1;
    m.frames.push_back(std::move(*done[j]));
  }
  m.extra = {{"tool", "synthdet"},
             {"tool_version", kVersion},
             {"command", "augment"},
             {"source_manifest_digest", src.manifest.digest()},
             {"copies", opt.copies},
             {"pipeline_applied", applied},
             {"fired", fired}};
  for (const auto& [j, _] : failures)
    remove_frame_files(opt.out, src.manifest.frames[j / opt.copies].frame_index * opt.copies +
                                    static_cast<std::int64_t>(j % opt.copies));
  m = io::write_index(opt.out, std::move(m));
  if (!failures.empty())
    rethrow_with_context(failures.begin()->second, "augmenting item " + std::to_string(failures.begin()->first) + ": ");
  std::string rates = "  fired:";
  for (auto name : augment::kAugNames)
    rates += " " + std::string(name) + "=" + std::to_string(fired[std::string(name)].get<int>());
  log.line("  pipeline applied to " + std::to_string(applied) + "/" + std::to_string(n));
  log.line(rates);
  log.line("  manifest digest " + m.digest());
  return m;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string gt;    // COCO file or dataset directory
  std::string dets;  // COCO results array
  double threshold = 0.0;
  std::string report;     // JSON output path; empty: none
  std::string sweep_csv;  // empty: no sweep
  std::string robustness_dir;  // <kind>_s<severity>.json detection files
  std::string robustness_csv;
  double beta = 0.5;
  double fbeta_iou = 0.5;
};

inline io::CocoDataset load_ground_truth(const std::string& path) {
  if (std::filesystem::is_directory(path))
    return io::read_coco((std::filesystem::path(path) / "annotations.json").string());
  return io::read_coco(path);
}

/// Checks every detection against the ground-truth images and categories.
inline void check_detection_refs(const std::vector<eval::Detection>& dets, const io::CocoDataset& gt,
                                 const std::string& path) {
  const auto ids = gt.image_ids();
  const std::set<std::int64_t> images(ids.begin(), ids.end());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!images.count(dets[i].image_id))
      throw ValidationError(path + ": detections[" + std::to_string(i) + "]: unknown image_id " +
                            std::to_string(dets[i].image_id));
    if (!gt.categories.count(dets[i].category_id))
      throw ValidationError(path + ": detections[" + std::to_string(i) + "]: unknown category_id " +
                            std::to_string(dets[i].category_id));
  }
}

inline nlohmann::json report_json(const eval::EvalReport& r, const io::CocoDataset& gt) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& c : r.per_class) {
    const auto it = gt.categories.find(c.category_id);
    per_class.push_back({{"category_id", c.category_id},
                         {"name", it == gt.categories.end() ? "" : it->second},
                         {"ap", c.ap},
                         {"ar", c.ar}});
  }
  nlohmann::json areas = nlohmann::json::object();
  for (const auto& a : r.area_breakdown)
    areas[a.name] = {{"map", a.map < 0 ? nlohmann::json() : nlohmann::json(a.map)},
                     {"mar", a.mar < 0 ? nlohmann::json() : nlohmann::json(a.mar)}};
  return {{"map", r.map},
          {"mar", r.mar},
          {"per_class", per_class},
          {"area_breakdown", areas},
          {"confidence_threshold", r.confidence_threshold},
          {"detections_retained", r.detections_retained},
          {"settings_digest", r.settings_digest}};
}

inline std::string sweep_csv(const eval::SweepCurve& c) {
  std::ostringstream os;
  os.precision(10);
  os << "threshold,map,mar,detections\n";
  for (std::size_t i = 0; i < c.thresholds.size(); ++i)
    os << c.thresholds[i] << ',' << c.map[i] << ',' << c.mar[i] << ',' << c.detection_counts[i] << '\n';
  return os.str();
}

/// Scores detections against ground truth. Low scores are results, not
/// errors; only unreadable or inconsistent inputs throw.
inline nlohmann::json cmd_eval(const EvalOptions& opt, std::ostream* log_out = nullptr) {
  Logger log(log_out);
  if (!(opt.threshold >= 0.0 && opt.threshold <= 1.0)) throw ConfigError("threshold must be in [0, 1]");
  if (!(opt.beta > 0)) throw ConfigError("beta must be positive");
  const auto gt = load_ground_truth(opt.gt);
  const auto gts = gt.ground_truth();
  const auto dets = io::read_detections(opt.dets);
  check_detection_refs(dets, gt, opt.dets);
  eval::EvalParams params;
  params.confidence_threshold = opt.threshold;
  const auto report = eval::evaluate(dets, gts, params);
  auto j = report_json(report, gt);
  const auto op = eval::operating_point(dets, gts, opt.fbeta_iou, opt.threshold);
  j["operating_point"] = {{"iou", opt.fbeta_iou},
                          {"beta", opt.beta},
                          {"precision", op.precision},
                          {"recall", op.recall},
                          {"f_beta", eval::f_beta(op.precision, op.recall, opt.beta)}};
  j["tool_version"] = kVersion;
  log.line(std::string("synthdet ") + kVersion + " eval settings_digest=" + report.settings_digest +
           " images=" + std::to_string(gt.images.size()) + " detections=" + std::to_string(dets.size()));
  log.line("  mAP " + std::to_string(report.map) + "  mAR " + std::to_string(report.mar) + "  (threshold " +
           std::to_string(opt.threshold) + ")");
  if (!opt.sweep_csv.empty()) {
    const auto th = eval::default_sweep_thresholds();
    const auto curve = eval::confidence_sweep(dets, gts, th);
    io::write_text(opt.sweep_csv, sweep_csv(curve));
    j["sweep_csv"] = opt.sweep_csv;
  }
  if (!opt.robustness_dir.empty()) {
    std::map<eval::CellKey, std::vector<eval::Detection>> cells;
    for (auto kind : eval::kAllCorruptions)
      for (int s = 1; s <= 5; ++s) {
        const auto p = std::filesystem::path(opt.robustness_dir) / (eval::to_string(kind) + "_s" + std::to_string(s) + ".json");
        if (!std::filesystem::exists(p)) continue;
        auto d = io::read_detections(p.string());
        cells[{kind, s}] = std::move(d);
      }
    const auto table = eval::robustness_suite(dets, cells, gts, params);
    j["robustness"] = table.to_json();
    if (!opt.robustness_csv.empty()) io::write_text(opt.robustness_csv, table.to_csv());
    log.line("  robustness cells present: " + std::to_string(cells.size()) + "/30");
  }
  if (!opt.report.empty()) io::write_text(opt.report, j.dump(2) + "\n");
  return j;
}

// ---------------------------------------------------------------------------
// corrupt

struct CorruptOptions {
  std::string images;  // dataset directory or a directory of images
  std::vector<eval::CorruptionKind> kinds;
  std::vector<int> severities;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
};

inline std::vector<std::filesystem::path> input_images(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  const fs::path root = fs::exists(fs::path(dir) / "manifest.json") ? fs::path(dir) / "rgb" : fs::path(dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".pfm"))
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Writes <out>/<kind>/s<severity>/<stem>.png for every input image and a
/// grid.json describing the cells.
inline nlohmann::json cmd_corrupt(const CorruptOptions& opt, std::ostream* log_out = nullptr) {
  Logger log(log_out);
  if (opt.out.empty()) throw ConfigError("no output directory given");
  for (int s : opt.severities)
    if (s < 1 || s > 5) throw ConfigError("severity must be in 1..5");
  const auto files = input_images(opt.images);
  std::vector<eval::CorruptionSpec> specs;
  for (auto k : opt.kinds)
    for (int s : opt.severities) specs.push_back({k, s});
  log.line(std::string("synthdet ") + kVersion + " corrupt seed=" + std::to_string(opt.seed) +
           " images=" + std::to_string(files.size()) + " cells=" + std::to_string(specs.size()));
  namespace fs = std::filesystem;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& spec : specs) {
    const std::string sub = eval::to_string(spec.kind) + "/s" + std::to_string(spec.severity);
    io::ensure_dir(fs::path(opt.out) / sub);
    log.line("  " + eval::to_string(spec.kind) + " severity " + std::to_string(spec.severity) + ": " +
             spec.params().dump());
    const auto failures = parallel_blocks(files.size(), resolve_workers(opt.workers),
                                          [&](std::size_t begin, std::size_t end, auto mark) {
      for (std::size_t i = begin; i < end; ++i) {
        mark(i);
        Rng rng(derive_seed(opt.seed, i, eval::to_string(spec.kind) + ":" + std::to_string(spec.severity)));
        const Image out = eval::corrupt(io::load_image(files[i].string()), spec, rng);
        io::write_png_rgb8((fs::path(opt.out) / sub / (files[i].stem().string() + ".png")).string(), out);
      }
    });
    if (!failures.empty())
      rethrow_with_context(failures.begin()->second, files[failures.begin()->first].string() + ": ");
    nlohmann::json names = nlohmann::json::array();
    for (const auto& f : files) names.push_back(sub + "/" + f.stem().string() + ".png");
    cells.push_back({{"kind", eval::to_string(spec.kind)},
                     {"severity", spec.severity},
                     {"params", spec.params()},
                     {"box_scale", spec.geometry_scale()},
                     {"images", names},
                     {"detections", eval::to_string(spec.kind) + "_s" + std::to_string(spec.severity) + ".json"}});
  }
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& f : files) sources.push_back(f.filename().string());
  const nlohmann::json grid{{"tool_version", kVersion}, {"seed", opt.seed}, {"sources", sources}, {"cells", cells}};
  io::write_text((fs::path(opt.out) / "grid.json").string(), grid.dump(2) + "\n");
  return grid;
}

}  // namespace synthdet::cli
