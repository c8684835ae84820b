#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "trapline/core/domain.hpp"
#include "trapline/core/error.hpp"
#include "trapline/metrics/iou.hpp"

namespace trapline::metrics {

struct MatchPair {
  std::size_t detection = 0;
  std::size_t truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // in detection processing order
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::size_t> unmatched_truths;
};

/// Detection indices ordered by descending score, ties by lower index.
inline std::vector<std::size_t> score_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

/// Greedy one-to-one matching within one image. Detections are visited by
/// descending score; each takes the unmatched same-class truth with the
/// highest IoU >= `iou_threshold` (ties go to the lower truth index).
inline MatchResult match_detections(std::span<const Detection> dets,
                                    std::span<const TaggedObject> truths, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ValidationError("iou threshold must be in (0,1]");
  }
  MatchResult out;
  std::vector<bool> taken(truths.size(), false);
  for (std::size_t d : score_order(dets)) {
    std::size_t best = truths.size();
    double best_iou = -1.0;
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (taken[t] || truths[t].label != dets[d].label) continue;
      double v = iou(dets[d].box, truths[t].box);
      if (v >= iou_threshold && v > best_iou) {
        best = t;
        best_iou = v;
      }
    }
    if (best == truths.size()) {
      out.unmatched_detections.push_back(d);
    } else {
      taken[best] = true;
      out.pairs.push_back({d, best, best_iou});
    }
  }
  std::sort(out.unmatched_detections.begin(), out.unmatched_detections.end());
  for (std::size_t t = 0; t < truths.size(); ++t) {
    if (!taken[t]) out.unmatched_truths.push_back(t);
  }
  return out;
}

}  // namespace trapline::metrics
