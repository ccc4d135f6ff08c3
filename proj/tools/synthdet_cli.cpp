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


#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <random>

#include "synthdet/cli/commands.hpp"

namespace {

using namespace synthdet;

enum Exit { kOk = 0, kUsage = 2, kInvalid = 3, kIo = 4 };

std::string default_assets() {
  const char* root = std::getenv("SYNTHDET_ASSET_ROOT");
  return root ? (std::filesystem::path(root) / "assets.json").string() : std::string("sample_assets/assets.json");
}

std::uint64_t pick_seed(const std::optional<std::uint64_t>& s) {
  if (s) return *s;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic object-detection data: generate, augment, corrupt and evaluate."};
  app.set_version_flag("--version", std::string(cli::kVersion));
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  int workers = 0;

  // generate
  cli::GenerateOptions gen;
  gen.assets_path = default_assets();
  std::string mode = "random";
  auto* g = app.add_subcommand("generate", "render an annotated dataset");
  g->add_option("--config", gen.config_path, "randomization config (JSON)");
  g->add_option("--assets", gen.assets_path, "asset manifest (JSON)")->capture_default_str();
  g->add_option("--out", gen.out, "output dataset directory")->required();
  g->add_option("--frames", gen.frames, "number of frames")->required()->check(CLI::NonNegativeNumber);
  g->add_option("--seed", seed, "master seed (random when omitted; always logged)");
  g->add_option("--mode", mode, "scene mode")->check(CLI::IsMember({"random", "table", "hdri"}))->capture_default_str();
  g->add_option("--width", gen.width, "image width")->check(CLI::Range(16, 8192))->capture_default_str();
  g->add_option("--height", gen.height, "image height")->check(CLI::Range(16, 8192))->capture_default_str();
  g->add_option("--subframes", gen.subframes, "subframes per frame")->check(CLI::Range(1, 1024))->capture_default_str();
  g->add_option("--min-visibility", gen.annotate.min_visibility, "drop annotations below this visible fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  g->add_option("--min-pixels", gen.annotate.min_pixels, "drop annotations below this pixel count")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  g->add_option("--workers", workers, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  // augment
  cli::AugmentOptions aug;
  auto* a = app.add_subcommand("augment", "apply the augmentation pipeline to a dataset");
  a->add_option("--dataset", aug.dataset, "input dataset directory")->required();
  a->add_option("--plan", aug.plan_path, "augmentation plan (JSON)");
  a->add_option("--backgrounds", aug.backgrounds, "background image directory");
  a->add_option("--reflectance", aug.reflectance, "reflectance image directory");
  a->add_option("--out", aug.out, "output dataset directory")->required();
  a->add_option("--copies", aug.copies, "augmented copies per frame")->check(CLI::PositiveNumber)->capture_default_str();
  a->add_option("--seed", seed, "master seed (random when omitted; always logged)");
  a->add_option("--workers", workers, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  // eval
  cli::EvalOptions ev;
  auto* e = app.add_subcommand("eval", "score detections against ground truth");
  e->add_option("--gt", ev.gt, "COCO annotations file or dataset directory")->required();
  e->add_option("--dets", ev.dets, "COCO results file")->required();
  e->add_option("--threshold", ev.threshold, "confidence threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  e->add_option("--report", ev.report, "write the JSON report here");
  e->add_option("--sweep", ev.sweep_csv, "write a confidence sweep CSV here");
  e->add_option("--robustness", ev.robustness_dir, "directory of <kind>_s<severity>.json detection files");
  e->add_option("--csv", ev.robustness_csv, "write the robustness table CSV here");
  e->add_option("--beta", ev.beta, "F-beta weight")->check(CLI::PositiveNumber)->capture_default_str();

  // corrupt
  cli::CorruptOptions cor;
  std::vector<std::string> kinds;
  auto* c = app.add_subcommand("corrupt", "write corrupted copies of images");
  c->add_option("--images", cor.images, "dataset directory or image directory")->required();
  std::vector<std::string> kind_names;
  for (auto k : eval::kAllCorruptions) kind_names.push_back(eval::to_string(k));
  c->add_option("--kind", kinds, "corruption kind (repeatable; default all)")->check(CLI::IsMember(kind_names));
  c->add_option("--severity", cor.severities, "severity 1..5 (repeatable; default all)")->check(CLI::Range(1, 5));
  c->add_option("--out", cor.out, "output directory")->required();
  c->add_option("--seed", seed, "master seed (random when omitted; always logged)");
  c->add_option("--workers", workers, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (g->parsed()) {
      gen.seed = pick_seed(seed);
      gen.workers = workers;
      if (mode == "table") gen.mode = scene::SceneMode::kTable;
      if (mode == "hdri") gen.mode = scene::SceneMode::kHdriDrop;
      const auto m = cli::cmd_generate(gen, &std::cerr);
      std::cout << gen.out << ": " << m.frame_count() << " frames, manifest " << m.digest() << "\n";
    } else if (a->parsed()) {
      aug.seed = pick_seed(seed);
      aug.workers = workers;
      const auto m = cli::cmd_augment(aug, &std::cerr);
      std::cout << aug.out << ": " << m.frame_count() << " frames, manifest " << m.digest() << "\n";
    } else if (e->parsed()) {
      const auto j = cli::cmd_eval(ev, &std::cerr);
      std::cout << j.dump(2) << "\n";
    } else if (c->parsed()) {
      cor.seed = pick_seed(seed);
      cor.workers = workers;
      for (const auto& k : kinds) cor.kinds.push_back(eval::corruption_from_string(k));
      if (cor.kinds.empty()) cor.kinds.assign(eval::kAllCorruptions.begin(), eval::kAllCorruptions.end());
      if (cor.severities.empty()) cor.severities = {1, 2, 3, 4, 5};
      cli::cmd_corrupt(cor, &std::cerr);
      std::cout << cor.out << "/grid.json\n";
    }
  } catch (const ConfigError& x) {
    std::cerr << "error: " << x.what() << "\n";
    return kUsage;
  } catch (const ParseError& x) {
    std::cerr << "error: " << x.what() << " (byte " << x.byte() << ")\n";
    return kInvalid;
  } catch (const SchemaError& x) {
    std::cerr << "error: " << x.what() << "\n";
    return kInvalid;
  } catch (const ValidationError& x) {
    std::cerr << "error: " << x.what() << "\n";
    return kInvalid;
  } catch (const LoadError& x) {
    std::cerr << "error: " << x.what() << "\n";
    return kIo;
  } catch (const IoError& x) {
    std::cerr << "error: " << x.what() << "\n";
    return kIo;
  } catch (const std::exception& x) {
    std::cerr << "error: " << x.what() << "\n";
    return 1;
  }
  return kOk;
}
