#pragma once

#include <algorithm>

#include "trapline/core/domain.hpp"

namespace trapline::metrics {

/// Intersection over union of two valid boxes; 0 for disjoint boxes.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double area_a = box_area(a);
  const double area_b = box_area(b);
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (area_a + area_b - inter);
}

}  // namespace trapline::metrics
