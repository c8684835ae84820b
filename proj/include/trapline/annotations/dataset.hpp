#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trapline/core/domain.hpp"
#include "trapline/core/error.hpp"
#include "trapline/core/random.hpp"

namespace trapline::annotations {

struct FilterResult {
  std::vector<AnnotatedImage> kept;
  std::vector<AnnotatedImage> removed;
  std::vector<std::string> warnings;
};

/// Drops quality-flagged images and images without a single valid object.
/// Invalid objects inside otherwise usable images are dropped individually.
inline FilterResult filter_unusable(std::span<const AnnotatedImage> images) {
  FilterResult out;
  for (const auto& img : images) {
    if (img.quality_flag) {
      out.removed.push_back(img);
      continue;
    }
    AnnotatedImage cleaned = img;
    cleaned.objects.clear();
    for (std::size_t i = 0; i < img.objects.size(); ++i) {
      const auto& obj = img.objects[i];
      auto violations = validate_box(obj.box, img.width, img.height);
      if (violations.empty()) {
        cleaned.objects.push_back(obj);
      } else {
        out.warnings.push_back(img.image_id + " object " + std::to_string(i) + " dropped: " +
                               std::string(to_string(violations.front())));
      }
    }
    if (cleaned.objects.empty()) {
      out.removed.push_back(img);
    } else {
      out.kept.push_back(std::move(cleaned));
    }
  }
  return out;
}

struct DatasetSummary {
  std::size_t image_count = 0;
  std::size_t tag_count = 0;
  double mean_width = 0.0;
  double mean_height = 0.0;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> resolution_histogram;
  std::map<std::string, std::size_t> class_counts;
};

/// Image count, tag count, mean resolution (width and height averaged
/// independently), resolution histogram and per-class tag counts.
inline DatasetSummary dataset_summary(std::span<const AnnotatedImage> images) {
  if (images.empty()) throw ValidationError("dataset_summary: no images");
  DatasetSummary s;
  s.image_count = images.size();
  double sum_w = 0.0;
  double sum_h = 0.0;
  for (const auto& img : images) {
    sum_w += img.width;
    sum_h += img.height;
    ++s.resolution_histogram[{img.width, img.height}];
    for (const auto& obj : img.objects) {
      ++s.class_counts[obj.label.canonical_name];
      ++s.tag_count;
    }
  }
  s.mean_width = sum_w / static_cast<double>(images.size());
  s.mean_height = sum_h / static_cast<double>(images.size());
  return s;
}

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Number of training items for `n` items at `ratio`: round(ratio * n).
inline std::size_t train_size(std::size_t n, double ratio) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
}

/// Uniform random split without replacement. Membership depends on the seed
/// and input order; both lists keep the input's relative order.
inline SplitAssignment split_dataset(std::span<const std::string> ids, double ratio,
                                     std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must be in (0,1)");
  if (ids.empty()) throw ValidationError("split_dataset: no images");
  SplitAssignment out;
  out.ratio = ratio;
  out.seed = seed;
  const std::size_t n = ids.size();
  const std::size_t n_train = train_size(n, ratio);
  SeededRng rng(seed);
  std::vector<bool> in_train(n, false);
  for (auto i : rng.sample_indices(n, n_train)) in_train[i] = true;
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? out.train : out.validation).push_back(ids[i]);
  }
  if (out.validation.empty()) out.warnings.push_back("validation split is empty");
  if (out.train.empty()) out.warnings.push_back("training split is empty");
  return out;
}

inline SplitAssignment split_dataset(std::span<const AnnotatedImage> images, double ratio,
                                     std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(images.size());
  for (const auto& img : images) ids.push_back(img.image_id);
  return split_dataset(std::span<const std::string>(ids), ratio, seed);
}

}  // namespace trapline::annotations
