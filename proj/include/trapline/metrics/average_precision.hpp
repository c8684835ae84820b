#pragma once

// Detection-level evaluation: per-class average precision with 101-point
// interpolation, mean AP over IoU thresholds and object-size buckets, and
// average recall with a per-image detection cap.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "trapline/core/domain.hpp"
#include "trapline/core/error.hpp"
#include "trapline/metrics/matching.hpp"

namespace trapline::metrics {

/// Ground truth and detections for one image.
struct ImageEval {
  std::string image_id;
  std::vector<TaggedObject> truths;
  std::vector<Detection> detections;
};

enum class SizeBucket { kSmall, kMedium, kLarge };

inline constexpr double kSmallAreaLimit = 32.0 * 32.0;
inline constexpr double kMediumAreaLimit = 96.0 * 96.0;

inline SizeBucket size_bucket(const BoundingBox& truth_box) {
  const double a = box_area(truth_box);
  if (a < kSmallAreaLimit) return SizeBucket::kSmall;
  if (a < kMediumAreaLimit) return SizeBucket::kMedium;
  return SizeBucket::kLarge;
}

enum class AreaRange { kAll, kSmall, kMedium, kLarge };

inline std::string_view to_string(AreaRange r) {
  switch (r) {
    case AreaRange::kAll: return "all";
    case AreaRange::kSmall: return "small";
    case AreaRange::kMedium: return "medium";
    case AreaRange::kLarge: return "large";
  }
  return "all";
}

inline bool in_range(const BoundingBox& b, AreaRange r) {
  switch (r) {
    case AreaRange::kAll: return true;
    case AreaRange::kSmall: return size_bucket(b) == SizeBucket::kSmall;
    case AreaRange::kMedium: return size_bucket(b) == SizeBucket::kMedium;
    case AreaRange::kLarge: return size_bucket(b) == SizeBucket::kLarge;
  }
  return true;
}

inline constexpr std::size_t kUnlimitedDetections = std::numeric_limits<std::size_t>::max();

/// Scored TP/FP outcome of one retained detection.
struct ScoredOutcome {
  double score = 0.0;
  bool true_positive = false;
};

/// Outcomes for one class at one IoU threshold, in global rank order.
struct ClassOutcomes {
  std::vector<ScoredOutcome> ranked;
  std::size_t truth_count = 0;
};

/// Keeps the `k` highest-scoring detections of an image (all classes).
inline std::vector<Detection> top_k(std::span<const Detection> dets, std::size_t k) {
  std::vector<Detection> out;
  for (std::size_t i : score_order(dets)) {
    if (out.size() >= k) break;
    out.push_back(dets[i]);
  }
  return out;
}

/// Matches every image for `label` and collects ranked outcomes.
/// With a size range, truths outside the range are removed together with
/// the detections matched to them; unmatched detections whose own box lies
/// outside the range are ignored rather than counted as false positives.
inline ClassOutcomes collect_outcomes(std::span<const ImageEval> images, const SpeciesLabel& label,
                                      double iou_threshold, AreaRange range = AreaRange::kAll,
                                      std::size_t max_dets = kUnlimitedDetections) {
  ClassOutcomes out;
  for (const auto& img : images) {
    std::vector<Detection> kept = top_k(img.detections, max_dets);
    std::vector<Detection> dets;
    for (auto& d : kept) {
      if (d.label == label) dets.push_back(d);
    }
    std::vector<TaggedObject> truths;
    for (const auto& t : img.truths) {
      if (t.label == label) truths.push_back(t);
    }
    for (const auto& t : truths) {
      if (in_range(t.box, range)) ++out.truth_count;
    }
    auto match = match_detections(dets, truths, iou_threshold);
    std::vector<int> state(dets.size(), 0);  // 0 = FP, 1 = TP, -1 = ignored
    for (const auto& p : match.pairs) state[p.detection] = in_range(truths[p.truth].box, range) ? 1 : -1;
    for (std::size_t d : match.unmatched_detections) {
      if (!in_range(dets[d].box, range)) state[d] = -1;
    }
    for (std::size_t d : score_order(dets)) {
      if (state[d] >= 0) out.ranked.push_back({dets[d].score, state[d] == 1});
    }
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.score > b.score; });
  return out;
}

inline constexpr int kRecallPoints = 101;

/// 101-point interpolated AP of ranked outcomes: mean over r = 0.00..1.00 of
/// the maximum precision attained at recall >= r (0 when never attained).
/// Undefined when there are neither truths nor detections; 0 when there are
/// detections but no truths.
inline std::optional<double> interpolated_ap(const ClassOutcomes& c) {
  if (c.truth_count == 0) {
    if (c.ranked.empty()) return std::nullopt;
    return 0.0;
  }
  const std::size_t n = c.ranked.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (c.ranked[i].true_positive) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(c.truth_count);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0.0;
  for (int i = 0; i < kRecallPoints; ++i) {
    const double r = static_cast<double>(i) / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / kRecallPoints;
}

inline std::optional<double> average_precision(std::span<const ImageEval> images,
                                               const SpeciesLabel& label, double iou_threshold,
                                               AreaRange range = AreaRange::kAll,
                                               std::size_t max_dets = kUnlimitedDetections) {
  return interpolated_ap(collect_outcomes(images, label, iou_threshold, range, max_dets));
}

/// Mean of the defined per-class APs.
inline double mean_average_precision(const std::map<std::string, std::optional<double>>& per_class) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [name, ap] : per_class) {
    if (ap) {
      sum += *ap;
      ++n;
    }
  }
  if (n == 0) throw ValidationError("mean_average_precision: no class has a defined AP");
  return sum / static_cast<double>(n);
}

/// Every label appearing in truths or detections, in name order.
inline std::vector<SpeciesLabel> labels_in(std::span<const ImageEval> images) {
  std::set<SpeciesLabel> seen;
  for (const auto& img : images) {
    for (const auto& t : img.truths) seen.insert(t.label);
    for (const auto& d : img.detections) seen.insert(d.label);
  }
  return {seen.begin(), seen.end()};
}

/// IoU thresholds 0.50, 0.55, ..., 0.95.
inline std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(static_cast<double>(50 + 5 * i) / 100.0);
  return t;
}

enum class IouSetting { kAt50, kAt75, kAveraged };

inline std::vector<double> thresholds_for(IouSetting s) {
  switch (s) {
    case IouSetting::kAt50: return {0.50};
    case IouSetting::kAt75: return {0.75};
    case IouSetting::kAveraged: return coco_iou_thresholds();
  }
  return {0.50};
}

/// mAP for one (IoU setting, size range) configuration. For the averaged
/// setting the per-threshold mAPs are averaged.
inline double map_at(std::span<const ImageEval> images, IouSetting setting,
                     AreaRange range = AreaRange::kAll,
                     std::size_t max_dets = kUnlimitedDetections) {
  const auto labels = labels_in(images);
  const auto thresholds = thresholds_for(setting);
  double sum = 0.0;
  for (double t : thresholds) {
    std::map<std::string, std::optional<double>> per_class;
    for (const auto& l : labels) {
      per_class[l.canonical_name] = average_precision(images, l, t, range, max_dets);
    }
    sum += mean_average_precision(per_class);
  }
  return sum / static_cast<double>(thresholds.size());
}

/// Average recall with at most `k` detections per image: recall per class at
/// each IoU threshold in 0.50:0.05:0.95, averaged over thresholds and over
/// classes that have truths in range. Undefined when no class has truths.
inline std::optional<double> average_recall_at_k(std::span<const ImageEval> images, std::size_t k,
                                                 AreaRange range = AreaRange::kAll) {
  if (k == 0) throw ValidationError("average_recall_at_k: k must be positive");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& label : labels_in(images)) {
    for (double t : coco_iou_thresholds()) {
      auto c = collect_outcomes(images, label, t, range, k);
      if (c.truth_count == 0) break;
      std::size_t tp = 0;
      for (const auto& o : c.ranked) tp += o.true_positive ? 1 : 0;
      sum += static_cast<double>(tp) / static_cast<double>(c.truth_count);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

/// The standard twelve-number detection summary.
struct DetectionSummary {
  std::optional<double> map;
  std::optional<double> map_50;
  std::optional<double> map_75;
  std::optional<double> map_small;
  std::optional<double> map_medium;
  std::optional<double> map_large;
  std::optional<double> ar_1;
  std::optional<double> ar_10;
  std::optional<double> ar_100;
  std::optional<double> ar_100_small;
  std::optional<double> ar_100_medium;
  std::optional<double> ar_100_large;
};

inline DetectionSummary summarize_detections(std::span<const ImageEval> images) {
  auto guarded = [&](IouSetting s, AreaRange r) -> std::optional<double> {
    try {
      return map_at(images, s, r);
    } catch (const ValidationError&) {
      return std::nullopt;
    }
  };
  DetectionSummary s;
  s.map = guarded(IouSetting::kAveraged, AreaRange::kAll);
  s.map_50 = guarded(IouSetting::kAt50, AreaRange::kAll);
  s.map_75 = guarded(IouSetting::kAt75, AreaRange::kAll);
  s.map_small = guarded(IouSetting::kAveraged, AreaRange::kSmall);
  s.map_medium = guarded(IouSetting::kAveraged, AreaRange::kMedium);
  s.map_large = guarded(IouSetting::kAveraged, AreaRange::kLarge);
  s.ar_1 = average_recall_at_k(images, 1);
  s.ar_10 = average_recall_at_k(images, 10);
  s.ar_100 = average_recall_at_k(images, 100);
  s.ar_100_small = average_recall_at_k(images, 100, AreaRange::kSmall);
  s.ar_100_medium = average_recall_at_k(images, 100, AreaRange::kMedium);
  s.ar_100_large = average_recall_at_k(images, 100, AreaRange::kLarge);
  return s;
}

}  // namespace trapline::metrics
