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

// COCO-style detection metrics: greedy IoU matching, 101-point interpolated
// average precision, recall at a per-image detection budget, averaged over
// the IoU thresholds 0.50:0.05:0.95 and over classes with ground truth.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "synthdet/core/bbox.hpp"
#include "synthdet/core/error.hpp"
#include "synthdet/core/hash.hpp"

namespace synthdet::eval {

struct GroundTruth {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox bbox;
  /// Object area used for the small/medium/large breakdown. Negative means
  /// "use the box area".
  double area = -1.0;

  double effective_area() const { return area >= 0.0 ? area : bbox.area(); }
};

struct Detection {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox bbox;
  double score = 0.0;
};

inline constexpr std::array<double, 10> kCocoIouThresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                                              0.75, 0.80, 0.85, 0.90, 0.95};
inline constexpr int kRecallPoints = 101;
inline constexpr int kMaxDetectionsPerImage = 100;

/// Intersection over union; 0 when the union is empty.
inline double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// Result of matching a detection list against ground truth. Indices refer
/// to the input spans; -1 marks "unmatched".
struct Matching {
  std::vector<std::ptrdiff_t> det_to_gt;
  std::vector<std::ptrdiff_t> gt_to_det;

  std::size_t true_positives() const {
    return static_cast<std::size_t>(
        std::count_if(det_to_gt.begin(), det_to_gt.end(), [](auto g) { return g >= 0; }));
  }
};

namespace detail {

/// Indices of `dets` ordered by descending score, ties by input order.
inline std::vector<std::size_t> score_order(std::span<const Detection> dets,
                                            std::span<const std::size_t> subset) {
  std::vector<std::size_t> order(subset.begin(), subset.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

/// Greedy matching within one (image, class) cell. `det_order` must already
/// be in descending score order. GTs flagged in `gt_ignore` are only matched
/// when no regular GT qualifies; a detection matched to an ignored GT is
/// itself ignored. Output vectors are indexed by position in `det_order`;
/// matches are GT indices into `gts`.
inline void match_cell(std::span<const Detection> dets, std::span<const std::size_t> det_order,
                       std::span<const GroundTruth> gts, std::span<const std::size_t> gt_idx,
                       std::span<const char> gt_ignore, double threshold,
                       std::vector<std::ptrdiff_t>& det_match, std::vector<char>& det_ignored) {
  det_match.assign(det_order.size(), -1);
  det_ignored.assign(det_order.size(), 0);
  std::vector<char> taken(gt_idx.size(), 0);
  for (std::size_t pos = 0; pos < det_order.size(); ++pos) {
    const std::size_t di = det_order[pos];
    std::ptrdiff_t best = -1;
    double best_iou = threshold;
    for (int pass = 0; pass < 2 && best < 0; ++pass) {
      for (std::size_t k = 0; k < gt_idx.size(); ++k) {
        if (taken[k] || (gt_ignore[k] != 0) != (pass == 1)) continue;
        const double v = iou(dets[di].bbox, gts[gt_idx[k]].bbox);
        if (v >= best_iou && (best < 0 || v > best_iou)) {
          best_iou = v;
          best = static_cast<std::ptrdiff_t>(k);
        }
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = 1;
      det_match[pos] = static_cast<std::ptrdiff_t>(gt_idx[static_cast<std::size_t>(best)]);
      det_ignored[pos] = gt_ignore[static_cast<std::size_t>(best)];
    }
  }
}

}  // namespace detail

/// Greedy one-to-one matching: each detection, in descending score order,
/// takes the unmatched GT of the same image and class with the highest IoU
/// at or above `iou_threshold` (ties go to the earlier GT).
inline Matching match(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                      double iou_threshold) {
  Matching m;
  m.det_to_gt.assign(dets.size(), -1);
  m.gt_to_det.assign(gts.size(), -1);
  std::map<std::pair<std::int64_t, std::int64_t>, std::pair<std::vector<std::size_t>,
                                                            std::vector<std::size_t>>>
      cells;
  for (std::size_t i = 0; i < dets.size(); ++i)
    cells[{dets[i].image_id, dets[i].category_id}].first.push_back(i);
  for (std::size_t i = 0; i < gts.size(); ++i)
    cells[{gts[i].image_id, gts[i].category_id}].second.push_back(i);
  std::vector<std::ptrdiff_t> cell_match;
  std::vector<char> ignored;
  for (auto& [key, cell] : cells) {
    const auto order = detail::score_order(dets, cell.first);
    const std::vector<char> no_ignore(cell.second.size(), 0);
    detail::match_cell(dets, order, gts, cell.second, no_ignore, iou_threshold, cell_match,
                       ignored);
    for (std::size_t pos = 0; pos < order.size(); ++pos) m.det_to_gt[order[pos]] = cell_match[pos];
  }
  for (std::size_t d = 0; d < dets.size(); ++d)
    if (m.det_to_gt[d] >= 0) m.gt_to_det[static_cast<std::size_t>(m.det_to_gt[d])] =
        static_cast<std::ptrdiff_t>(d);
  return m;
}

/// Object-size bucket, in squared pixels, for the breakdown report.
struct AreaRange {
  std::string name;
  double lo = 0.0;
  double hi = 1e10;
};

inline const std::array<AreaRange, 4>& coco_area_ranges() {
  static const std::array<AreaRange, 4> ranges = {AreaRange{"all", 0.0, 1e10},
                                                  AreaRange{"small", 0.0, 32.0 * 32.0},
                                                  AreaRange{"medium", 32.0 * 32.0, 96.0 * 96.0},
                                                  AreaRange{"large", 96.0 * 96.0, 1e10}};
  return ranges;
}

struct EvalParams {
  std::vector<double> iou_thresholds{kCocoIouThresholds.begin(), kCocoIouThresholds.end()};
  int max_detections_per_image = kMaxDetectionsPerImage;
  /// Detections with score strictly below this are discarded first.
  double confidence_threshold = 0.0;

  std::string digest() const {
    std::ostringstream os;
    os.precision(17);
    os << "iou=";
    for (double t : iou_thresholds) os << t << ',';
    os << ";max_dets=" << max_detections_per_image << ";conf=" << confidence_threshold
       << ";recall_points=" << kRecallPoints;
    return sha256_hex(os.str());
  }
};

/// Precision/recall outcome for one (class, IoU threshold) cell.
struct CellScore {
  double ap = 0.0;
  double recall = 0.0;
};

namespace detail {

/// 101-point interpolated AP from a ranked list of (tp, ignored) flags.
inline CellScore score_ranked(std::span<const char> is_tp, std::size_t num_gt) {
  std::vector<double> precision, recall;
  precision.reserve(is_tp.size());
  recall.reserve(is_tp.size());
  std::size_t tp = 0, fp = 0;
  for (char t : is_tp) {
    t ? ++tp : ++fp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
  }
  CellScore out;
  out.recall = recall.empty() ? 0.0 : recall.back();
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0.0;
  for (int k = 0; k < kRecallPoints; ++k) {
    const double r = static_cast<double>(k) / (kRecallPoints - 1);
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  out.ap = sum / kRecallPoints;
  return out;
}

/// Evaluates every (class, IoU) cell for one area range. Returns
/// cells[class_index][iou_index]; classes with no in-range GT are nullopt.
inline std::vector<std::optional<std::vector<CellScore>>> evaluate_cells(
    std::span<const Detection> dets, std::span<const GroundTruth> gts,
    std::span<const std::int64_t> categories, const EvalParams& params, const AreaRange& range) {
  std::vector<std::optional<std::vector<CellScore>>> out;
  for (std::int64_t cat : categories) {
    // Collect per-image cells in ascending image id.
    std::map<std::int64_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> images;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (dets[i].category_id == cat) images[dets[i].image_id].first.push_back(i);
    for (std::size_t i = 0; i < gts.size(); ++i)
      if (gts[i].category_id == cat) images[gts[i].image_id].second.push_back(i);

    std::size_t num_gt = 0;
    for (auto& [img, cell] : images) {
      for (std::size_t g : cell.second) {
        const double a = gts[g].effective_area();
        if (a >= range.lo && a <= range.hi) ++num_gt;
      }
    }
    if (num_gt == 0) {
      out.emplace_back(std::nullopt);
      continue;
    }

    std::vector<CellScore> cells;
    for (double thr : params.iou_thresholds) {
      // Ranked (score, tp) entries in image order, then stable-sorted.
      std::vector<std::pair<double, char>> ranked;
      for (auto& [img, cell] : images) {
        auto order = score_order(dets, cell.first);
        if (order.size() > static_cast<std::size_t>(params.max_detections_per_image))
          order.resize(static_cast<std::size_t>(params.max_detections_per_image));
        // Out-of-range GTs are moved behind regular ones, as COCO does.
        std::vector<std::size_t> gt_sorted;
        std::vector<char> gt_ignore;
        for (int pass = 0; pass < 2; ++pass) {
          for (std::size_t g : cell.second) {
            const double a = gts[g].effective_area();
            const bool ign = a < range.lo || a > range.hi;
            if (ign == (pass == 1)) {
              gt_sorted.push_back(g);
              gt_ignore.push_back(ign ? 1 : 0);
            }
          }
        }
        std::vector<std::ptrdiff_t> det_match;
        std::vector<char> det_ign;
        match_cell(dets, order, gts, gt_sorted, gt_ignore, thr, det_match, det_ign);
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
          const auto& d = dets[order[pos]];
          if (det_match[pos] < 0) {
            const double a = d.bbox.area();
            if (a < range.lo || a > range.hi) continue;  // unmatched, out of range
          } else if (det_ign[pos]) {
            continue;
          }
          ranked.emplace_back(d.score, det_match[pos] >= 0 ? 1 : 0);
        }
      }
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      std::vector<char> flags;
      flags.reserve(ranked.size());
      for (auto& r : ranked) flags.push_back(r.second);
      cells.push_back(score_ranked(flags, num_gt));
    }
    out.emplace_back(std::move(cells));
  }
  return out;
}

}  // namespace detail

struct ClassScore {
  std::int64_t category_id = 0;
  double ap = 0.0;
  double ar = 0.0;
};

/// mAP/mAR restricted to one object-size bucket; -1 when no GT falls in it.
struct AreaScore {
  std::string name;
  double map = -1.0;
  double mar = -1.0;
};

struct EvalReport {
  double map = 0.0;
  double mar = 0.0;
  std::vector<ClassScore> per_class;
  std::vector<double> iou_thresholds;
  /// ap_cells[class_index][iou_index], same order as per_class.
  std::vector<std::vector<double>> ap_cells;
  std::vector<std::vector<double>> ar_cells;
  std::vector<AreaScore> area_breakdown;
  std::size_t detections_retained = 0;
  double confidence_threshold = 0.0;
  std::string settings_digest;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline bool operator==(const ClassScore& a, const ClassScore& b) {
  return a.category_id == b.category_id && a.ap == b.ap && a.ar == b.ar;
}
inline bool operator==(const AreaScore& a, const AreaScore& b) {
  return a.name == b.name && a.map == b.map && a.mar == b.mar;
}

inline std::vector<Detection> filter_by_confidence(std::span<const Detection> dets,
                                                   double threshold) {
  std::vector<Detection> kept;
  for (const auto& d : dets)
    if (d.score >= threshold) kept.push_back(d);
  return kept;
}

/// Categories that have at least one ground-truth instance, ascending.
inline std::vector<std::int64_t> scored_categories(std::span<const GroundTruth> gts) {
  std::vector<std::int64_t> cats;
  for (const auto& g : gts) cats.push_back(g.category_id);
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  return cats;
}

/// Full report. Classes with zero GT are excluded from every average.
/// Throws ValidationError when there is nothing to score.
inline EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                           const EvalParams& params = {}) {
  const auto cats = scored_categories(gts);
  if (cats.empty()) throw ValidationError("evaluate: no category has ground truth");
  const auto kept = filter_by_confidence(dets, params.confidence_threshold);

  EvalReport r;
  r.iou_thresholds = params.iou_thresholds;
  r.detections_retained = kept.size();
  r.confidence_threshold = params.confidence_threshold;
  r.settings_digest = params.digest();

  for (const auto& range : coco_area_ranges()) {
    const auto cells = detail::evaluate_cells(kept, gts, cats, params, range);
    double ap_sum = 0.0, ar_sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < cats.size(); ++c) {
      if (!cells[c]) continue;
      std::vector<double> ap_row, ar_row;
      for (const auto& cell : *cells[c]) {
        ap_sum += cell.ap;
        ar_sum += cell.recall;
        ap_row.push_back(cell.ap);
        ar_row.push_back(cell.recall);
        ++n;
      }
      if (range.name == "all") {
        const double k = static_cast<double>(ap_row.size());
        r.per_class.push_back({cats[c], std::accumulate(ap_row.begin(), ap_row.end(), 0.0) / k,
                               std::accumulate(ar_row.begin(), ar_row.end(), 0.0) / k});
        r.ap_cells.push_back(std::move(ap_row));
        r.ar_cells.push_back(std::move(ar_row));
      }
    }
    AreaScore score{range.name, -1.0, -1.0};
    if (n > 0) {
      score.map = ap_sum / static_cast<double>(n);
      score.mar = ar_sum / static_cast<double>(n);
    }
    if (range.name == "all") {
      r.map = score.map;
      r.mar = score.mar;
    } else {
      r.area_breakdown.push_back(score);
    }
  }
  return r;
}

/// AP of one class at one IoU threshold; nullopt when the class has no GT.
inline std::optional<double> average_precision(std::span<const Detection> dets,
                                               std::span<const GroundTruth> gts,
                                               double iou_threshold, std::int64_t category_id) {
  EvalParams p;
  p.iou_thresholds = {iou_threshold};
  const std::array<std::int64_t, 1> cat{category_id};
  const auto cells = detail::evaluate_cells(dets, gts, cat, p, coco_area_ranges()[0]);
  if (!cells[0]) return std::nullopt;
  return (*cells[0])[0].ap;
}

/// Ascending confidence thresholds with the report at each point.
struct SweepCurve {
  std::vector<double> thresholds;
  std::vector<double> map;
  std::vector<double> mar;
  std::vector<std::size_t> detection_counts;
  std::vector<EvalReport> reports;
};

inline std::vector<double> default_sweep_thresholds() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
}

inline SweepCurve confidence_sweep(std::span<const Detection> dets,
                                   std::span<const GroundTruth> gts,
                                   std::span<const double> thresholds,
                                   EvalParams params = {}) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw ConfigError("confidence_sweep: thresholds must be ascending");
  SweepCurve curve;
  for (double t : thresholds) {
    params.confidence_threshold = t;
    auto rep = evaluate(dets, gts, params);
    curve.thresholds.push_back(t);
    curve.map.push_back(rep.map);
    curve.mar.push_back(rep.mar);
    curve.detection_counts.push_back(rep.detections_retained);
    curve.reports.push_back(std::move(rep));
  }
  return curve;
}

/// (AP, AR) per category, each averaged over the IoU thresholds.
inline std::vector<ClassScore> per_object_report(std::span<const Detection> dets,
                                                 std::span<const GroundTruth> gts,
                                                 const EvalParams& params = {}) {
  return evaluate(dets, gts, params).per_class;
}

/// Weighted harmonic mean of precision and recall. beta < 1 favours
/// precision.
inline double f_beta(double precision, double recall, double beta) {
  if (!(beta > 0.0)) throw ConfigError("f_beta: beta must be positive");
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  return denom > 0.0 ? (1.0 + b2) * precision * recall / denom : 0.0;
}

/// Precision and recall at one IoU threshold over all classes after
/// confidence filtering; the inputs of f_beta for a deployed detector.
struct OperatingPoint {
  double precision = 0.0;
  double recall = 0.0;
};

inline OperatingPoint operating_point(std::span<const Detection> dets,
                                      std::span<const GroundTruth> gts, double iou_threshold,
                                      double confidence_threshold) {
  const auto kept = filter_by_confidence(dets, confidence_threshold);
  const auto m = match(kept, gts, iou_threshold);
  const double tp = static_cast<double>(m.true_positives());
  OperatingPoint op;
  op.precision = kept.empty() ? 0.0 : tp / static_cast<double>(kept.size());
  op.recall = gts.empty() ? 0.0 : tp / static_cast<double>(gts.size());
  return op;
}

}  // namespace synthdet::eval
