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

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthdet/augment/ops.hpp"
#include "synthdet/core/error.hpp"
#include "synthdet/core/hash.hpp"
#include "synthdet/core/rng.hpp"
#include "synthdet/datasetio/image_io.hpp"
#include "synthdet/scenegen/randomization.hpp"

namespace synthdet::augment {

using scene::IntRange;
using scene::UniformRange;

/// Augmentations in application order.
enum class Aug {
  kContrast,
  kBrightness,
  kEnhancement,
  kRandomBackground,
  kRandomBlend,
  kReflectance,
  kHistEqualize,
  kPasta,
  kSnow,
  kShotNoise,
  kJpeg,
  kRandomPerspective,
  kLargeScaleJitter,
  kPadToSquare,
};
inline constexpr std::size_t kAugCount = 14;

inline constexpr std::array<std::string_view, kAugCount> kAugNames{
    "contrast",   "brightness", "enhancement", "random_background",  "random_blend",
    "reflectance", "hist_equalize", "pasta",   "snow",               "shot_noise",
    "jpeg",       "random_perspective", "large_scale_jitter", "pad_to_square"};

// Firing probabilities of the training recipe. Padding is a model-input
// step rather than an augmentation, so it is off unless asked for.
inline constexpr std::array<double, kAugCount> kDefaultProbability{
    0.25, 0.25, 0.25, 0.60, 0.40, 0.20, 0.40, 0.30, 0.30, 0.40, 0.30, 0.45, 0.40, 0.0};

inline std::string_view name_of(Aug a) { return kAugNames[static_cast<std::size_t>(a)]; }

inline std::optional<Aug> aug_from_name(std::string_view n) {
  for (std::size_t i = 0; i < kAugCount; ++i)
    if (kAugNames[i] == n) return static_cast<Aug>(i);
  return std::nullopt;
}

struct AugmentationPlan {
  double pipeline_probability = 0.8;
  std::int64_t min_pixels = 16;
  std::array<double, kAugCount> probability = kDefaultProbability;

  UniformRange contrast_factor{0.5, 1.5};
  UniformRange brightness_factor{0.5, 1.5};
  UniformRange enhancement_factor{0.5, 1.5};
  UniformRange blend_alpha{0.05, 0.12};
  PastaParams pasta;
  IntRange snow_count{20, 80};
  UniformRange shot_noise_lambda{25.0, 200.0};
  IntRange jpeg_quality{10, 70};
  UniformRange perspective_distortion{0.0, 0.15};
  UniformRange jitter_scale{0.1, 2.0};
  int pad_target = 640;

  double& p(Aug a) { return probability[static_cast<std::size_t>(a)]; }
  double p(Aug a) const { return probability[static_cast<std::size_t>(a)]; }

  /// Plan with every entry off; handy for exercising one augmentation.
  static AugmentationPlan none() {
    AugmentationPlan plan;
    plan.pipeline_probability = 1.0;
    plan.probability.fill(0.0);
    return plan;
  }

  void validate() const;
  nlohmann::json to_json() const;
  static AugmentationPlan from_json(const nlohmann::json& j);
  static AugmentationPlan load(const std::string& path);
  std::string digest() const { return sha256_hex(to_json().dump()); }
};

namespace detail {

// Parameter keys per entry, used for both writing and parsing.
inline nlohmann::json entry_params(const AugmentationPlan& p, Aug a) {
  using scene::detail::entry;
  switch (a) {
    case Aug::kContrast: return {{"factor", entry(p.contrast_factor)}};
    case Aug::kBrightness: return {{"factor", entry(p.brightness_factor)}};
    case Aug::kEnhancement: return {{"factor", entry(p.enhancement_factor)}};
    case Aug::kRandomBlend: return {{"alpha", entry(p.blend_alpha)}};
    case Aug::kPasta: return {{"alpha", p.pasta.alpha}, {"beta", p.pasta.beta}, {"k", p.pasta.k}};
    case Aug::kSnow: return {{"count", entry(p.snow_count)}};
    case Aug::kShotNoise: return {{"lambda", entry(p.shot_noise_lambda)}};
    case Aug::kJpeg: return {{"quality", entry(p.jpeg_quality)}};
    case Aug::kRandomPerspective: return {{"distortion", entry(p.perspective_distortion)}};
    case Aug::kLargeScaleJitter: return {{"scale", entry(p.jitter_scale)}};
    case Aug::kPadToSquare: return {{"target", p.pad_target}};
    default: return nlohmann::json::object();
  }
}

inline void read_entry_params(const nlohmann::json& e, AugmentationPlan& p, Aug a) {
  using scene::detail::read;
  const auto allowed = entry_params(p, a);
  for (const auto& [key, _] : e.items())
    if (key != "name" && key != "probability" && !allowed.contains(key))
      throw ConfigError("augmentation '" + std::string(name_of(a)) + "': unknown parameter '" + key + "'");
  switch (a) {
    case Aug::kContrast: read(e, "factor", p.contrast_factor); break;
    case Aug::kBrightness: read(e, "factor", p.brightness_factor); break;
    case Aug::kEnhancement: read(e, "factor", p.enhancement_factor); break;
    case Aug::kRandomBlend: read(e, "alpha", p.blend_alpha); break;
    case Aug::kPasta:
      scene::detail::read_scalar(e, "alpha", p.pasta.alpha);
      scene::detail::read_scalar(e, "beta", p.pasta.beta);
      scene::detail::read_scalar(e, "k", p.pasta.k);
      break;
    case Aug::kSnow: read(e, "count", p.snow_count); break;
    case Aug::kShotNoise: read(e, "lambda", p.shot_noise_lambda); break;
    case Aug::kJpeg: read(e, "quality", p.jpeg_quality); break;
    case Aug::kRandomPerspective: read(e, "distortion", p.perspective_distortion); break;
    case Aug::kLargeScaleJitter: read(e, "scale", p.jitter_scale); break;
    case Aug::kPadToSquare: scene::detail::read_scalar(e, "target", p.pad_target); break;
    default: break;
  }
}

}  // namespace detail

inline nlohmann::json AugmentationPlan::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < kAugCount; ++i) {
    const auto a = static_cast<Aug>(i);
    nlohmann::json e = detail::entry_params(*this, a);
    e["name"] = name_of(a);
    e["probability"] = probability[i];
    entries.push_back(std::move(e));
  }
  return {{"pipeline_probability", pipeline_probability}, {"min_pixels", min_pixels}, {"entries", entries}};
}

/// Entries not listed keep their defaults. Entry order in the file is
/// ignored; application order is fixed.
inline AugmentationPlan AugmentationPlan::from_json(const nlohmann::json& j) {
  AugmentationPlan plan;
  if (!j.is_object()) throw ConfigError("augmentation plan must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "pipeline_probability" && key != "min_pixels" && key != "entries")
      throw ConfigError("unknown augmentation plan key '" + key + "'");
  try {
    scene::detail::read_scalar(j, "pipeline_probability", plan.pipeline_probability);
    scene::detail::read_scalar(j, "min_pixels", plan.min_pixels);
    if (const auto it = j.find("entries"); it != j.end()) {
      if (!it->is_array()) throw ConfigError("augmentation plan: 'entries' must be a list");
      std::array<bool, kAugCount> seen{};
      for (const auto& e : *it) {
        if (!e.is_object() || !e.contains("name"))
          throw ConfigError("augmentation plan: every entry needs a name");
        const auto name = e.at("name").get<std::string>();
        const auto a = aug_from_name(name);
        if (!a) throw ConfigError("unknown augmentation '" + name + "'");
        const auto idx = static_cast<std::size_t>(*a);
        if (seen[idx]) throw ConfigError("augmentation '" + name + "' listed twice");
        seen[idx] = true;
        scene::detail::read_scalar(e, "probability", plan.probability[idx]);
        detail::read_entry_params(e, plan, *a);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("augmentation plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

inline void AugmentationPlan::validate() const {
  auto prob = [](double v, const std::string& what) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(what + ": probability outside [0, 1]");
  };
  prob(pipeline_probability, "pipeline");
  for (std::size_t i = 0; i < kAugCount; ++i) prob(probability[i], std::string(kAugNames[i]));
  using scene::detail::check;
  check(contrast_factor, "contrast.factor");
  check(brightness_factor, "brightness.factor");
  check(enhancement_factor, "enhancement.factor");
  check(blend_alpha, "random_blend.alpha");
  check(snow_count, "snow.count");
  check(shot_noise_lambda, "shot_noise.lambda");
  check(jpeg_quality, "jpeg.quality");
  check(perspective_distortion, "random_perspective.distortion");
  check(jitter_scale, "large_scale_jitter.scale");
  if (contrast_factor.lo < 0 || brightness_factor.lo < 0 || enhancement_factor.lo < 0)
    throw ConfigError("photometric factors must be non-negative");
  if (blend_alpha.lo < 0 || blend_alpha.hi > 1) throw ConfigError("random_blend.alpha outside [0, 1]");
  if (pasta.alpha < 0 || pasta.beta < 0 || pasta.k < 0) throw ConfigError("pasta parameters must be non-negative");
  if (shot_noise_lambda.lo <= 0) throw ConfigError("shot_noise.lambda must be positive");
  if (jpeg_quality.lo < 1 || jpeg_quality.hi > 100) throw ConfigError("jpeg.quality outside [1, 100]");
  if (perspective_distortion.lo < 0 || perspective_distortion.hi >= 0.5)
    throw ConfigError("random_perspective.distortion outside [0, 0.5)");
  if (jitter_scale.lo <= 0) throw ConfigError("large_scale_jitter.scale must be positive");
  if (pad_target < 1) throw ConfigError("pad_to_square.target must be positive");
  if (min_pixels < 0) throw ConfigError("min_pixels must be non-negative");
}

inline AugmentationPlan AugmentationPlan::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open augmentation plan: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
  return from_json(j);
}

/// Read-only image collections the pipeline draws from.
struct Corpora {
  std::vector<Image> backgrounds;
  std::vector<ReflectanceMap> reflectance;

  /// Every PNG, JPEG or PFM file directly in `dir`, in name order.
  static std::vector<Image> load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      auto ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".pfm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Image> out;
    for (const auto& f : files) out.push_back(io::load_image(f.string()));
    if (out.empty()) throw ConfigError("no images found in " + dir);
    return out;
  }

  static Corpora load(const std::string& background_dir, const std::string& reflectance_dir) {
    Corpora c;
    if (!background_dir.empty()) c.backgrounds = load_dir(background_dir);
    if (!reflectance_dir.empty())
      for (const auto& img : load_dir(reflectance_dir)) c.reflectance.push_back(ReflectanceMap::from_image(img));
    return c;
  }
};

struct AppliedAugmentation {
  std::string name;
  nlohmann::json params;
};

/// What the pipeline did to one image.
struct AugmentRecord {
  bool pipeline_applied = false;
  std::vector<AppliedAugmentation> applied;

  bool fired(Aug a) const {
    return std::any_of(applied.begin(), applied.end(), [&](const auto& x) { return x.name == name_of(a); });
  }
  nlohmann::json to_json() const {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& a : applied) ops.push_back({{"name", a.name}, {"params", a.params}});
    return {{"pipeline_applied", pipeline_applied}, {"augmentations", ops}};
  }
};

struct AugmentResult {
  Sample sample;
  AugmentRecord record;
};

/// Throws ConfigError if an entry that can fire needs a corpus that is empty.
inline void check_corpora(const AugmentationPlan& plan, const Corpora& corpora) {
  if (plan.pipeline_probability == 0) return;
  if ((plan.p(Aug::kRandomBackground) > 0 || plan.p(Aug::kRandomBlend) > 0) && corpora.backgrounds.empty())
    throw ConfigError("random_background/random_blend enabled but no background images supplied");
  if (plan.p(Aug::kReflectance) > 0 && corpora.reflectance.empty())
    throw ConfigError("reflectance enabled but no reflectance maps supplied");
}

/// Runs the plan on one sample. The stream layout is fixed: one gate draw,
/// then for every entry a firing draw and a sub-stream seed, so whether one
/// entry fires never shifts another entry's randomness.
inline AugmentResult apply_pipeline(const Sample& in, Rng& rng, const AugmentationPlan& plan,
                                    const Corpora& corpora) {
  check_corpora(plan, corpora);
  if (in.mask.width() != in.image.width() || in.mask.height() != in.image.height())
    throw ValidationError("instance mask does not match image size");
  AugmentResult r{in, {}};
  if (!(rng.uniform() < plan.pipeline_probability)) return r;
  r.record.pipeline_applied = true;
  std::array<bool, kAugCount> fire{};
  std::array<std::uint64_t, kAugCount> seeds{};
  for (std::size_t i = 0; i < kAugCount; ++i) {
    fire[i] = rng.uniform() < plan.probability[i];
    seeds[i] = rng.next_u64();
  }
  Sample& s = r.sample;
  auto log = [&](Aug a, nlohmann::json params) {
    r.record.applied.push_back({std::string(name_of(a)), std::move(params)});
  };
  auto pick = [](Rng& g, std::size_t n) { return static_cast<std::size_t>(g.uniform_int(0, static_cast<long long>(n) - 1)); };
  const int w = s.image.width(), h = s.image.height();

  for (std::size_t i = 0; i < kAugCount; ++i) {
    if (!fire[i]) continue;
    const auto a = static_cast<Aug>(i);
    Rng g(seeds[i]);
    switch (a) {
      case Aug::kContrast: {
        const double c = plan.contrast_factor.sample(g);
        s.image = contrast(s.image, c);
        log(a, {{"factor", c}});
        break;
      }
      case Aug::kBrightness: {
        const double b = plan.brightness_factor.sample(g);
        s.image = brightness(s.image, b);
        log(a, {{"factor", b}});
        break;
      }
      case Aug::kEnhancement: {
        const double e = plan.enhancement_factor.sample(g);
        s.image = enhancement(s.image, e);
        log(a, {{"factor", e}});
        break;
      }
      case Aug::kRandomBackground: {
        const auto k = pick(g, corpora.backgrounds.size());
        s.image = random_background(s.image, s.mask, resize(corpora.backgrounds[k], w, h));
        log(a, {{"background", k}});
        break;
      }
      case Aug::kRandomBlend: {
        const auto k = pick(g, corpora.backgrounds.size());
        const double alpha = plan.blend_alpha.sample(g);
        s.image = random_blend(s.image, resize(corpora.backgrounds[k], w, h), alpha);
        log(a, {{"background", k}, {"alpha", alpha}});
        break;
      }
      case Aug::kReflectance: {
        const auto k = pick(g, corpora.reflectance.size());
        s.image = reflectance_multiply(s.image, resize(corpora.reflectance[k].r, w, h));
        log(a, {{"map", k}});
        break;
      }
      case Aug::kHistEqualize:
        s.image = hist_equalize(s.image);
        log(a, nlohmann::json::object());
        break;
      case Aug::kPasta:
        s.image = pasta(s.image, g, plan.pasta);
        log(a, {{"alpha", plan.pasta.alpha}, {"beta", plan.pasta.beta}, {"k", plan.pasta.k}});
        break;
      case Aug::kSnow: {
        const int n = static_cast<int>(plan.snow_count.sample(g));
        s.image = snow(s.image, n, g);
        log(a, {{"count", n}});
        break;
      }
      case Aug::kShotNoise: {
        const double lambda = plan.shot_noise_lambda.sample(g);
        s.image = shot_noise(s.image, lambda, g);
        log(a, {{"lambda", lambda}});
        break;
      }
      case Aug::kJpeg: {
        const int q = static_cast<int>(plan.jpeg_quality.sample(g));
        s.image = jpeg(s.image, q);
        log(a, {{"quality", q}});
        break;
      }
      case Aug::kRandomPerspective: {
        const double d = plan.perspective_distortion.sample(g);
        auto res = random_perspective(s, g, d, plan.min_pixels);
        nlohmann::json params{{"distortion", d}};
        if (res.h)
          params["homography"] = res.h->m;
        else
          params["skipped"] = true;
        s = std::move(res.sample);
        log(a, std::move(params));
        break;
      }
      case Aug::kLargeScaleJitter: {
        const double scale = plan.jitter_scale.sample(g);
        const auto d = draw_jitter_offsets(g, scale, s.image.width(), s.image.height());
        s = large_scale_jitter_at(s, d.scale, d.off_x, d.off_y, plan.min_pixels);
        log(a, {{"scale", d.scale}, {"offset", {d.off_x, d.off_y}}});
        break;
      }
      case Aug::kPadToSquare:
        s = pad_to_square(s, plan.pad_target);
        log(a, {{"target", plan.pad_target}});
        break;
    }
  }
  return r;
}

}  // namespace synthdet::augment
