#pragma once

// Shared vocabulary types: boxes, labels, detections and annotated images.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "trapline/core/error.hpp"

namespace trapline {

/// Axis-aligned rectangle in continuous pixel coordinates, origin top-left,
/// corner convention (xmin, ymin, xmax, ymax).
struct BoundingBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const noexcept { return xmax - xmin; }
  double height() const noexcept { return ymax - ymin; }

  BoundingBox translated(double dx, double dy) const noexcept {
    return {xmin + dx, ymin + dy, xmax + dx, ymax + dy};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline double box_area(const BoundingBox& b) {
  if (!(b.xmin < b.xmax) || !(b.ymin < b.ymax)) {
    throw ValidationError("degenerate box: zero or negative width/height");
  }
  return b.width() * b.height();
}

enum class BoxViolation {
  kXInverted,        // xmin >= xmax
  kYInverted,        // ymin >= ymax
  kNegativeCoord,
  kExceedsWidth,
  kExceedsHeight,
  kNotFinite,
};

inline std::string_view to_string(BoxViolation v) {
  switch (v) {
    case BoxViolation::kXInverted: return "xmin >= xmax";
    case BoxViolation::kYInverted: return "ymin >= ymax";
    case BoxViolation::kNegativeCoord: return "negative coordinate";
    case BoxViolation::kExceedsWidth: return "exceeds width";
    case BoxViolation::kExceedsHeight: return "exceeds height";
    case BoxViolation::kNotFinite: return "non-finite coordinate";
  }
  return "unknown";
}

/// Returns every invariant violation of `b` inside a `width` x `height`
/// frame. An empty result means the box is usable.
inline std::vector<BoxViolation> validate_box(const BoundingBox& b, double width,
                                              double height) {
  std::vector<BoxViolation> out;
  auto finite = [](double v) { return v == v && v - v == 0.0; };
  if (!finite(b.xmin) || !finite(b.ymin) || !finite(b.xmax) || !finite(b.ymax)) {
    out.push_back(BoxViolation::kNotFinite);
    return out;
  }
  if (b.xmin >= b.xmax) out.push_back(BoxViolation::kXInverted);
  if (b.ymin >= b.ymax) out.push_back(BoxViolation::kYInverted);
  if (b.xmin < 0 || b.ymin < 0 || b.xmax < 0 || b.ymax < 0) {
    out.push_back(BoxViolation::kNegativeCoord);
  }
  if (b.xmax > width || b.xmin > width) out.push_back(BoxViolation::kExceedsWidth);
  if (b.ymax > height || b.ymin > height) out.push_back(BoxViolation::kExceedsHeight);
  return out;
}

/// Species name after whitespace normalisation. Exactly one label of a label
/// set is the synthetic Blank class; backends never produce it.
struct SpeciesLabel {
  std::string canonical_name;
  bool is_blank = false;

  static SpeciesLabel blank() { return {"Blank", true}; }

  friend bool operator==(const SpeciesLabel&, const SpeciesLabel&) = default;
  friend auto operator<=>(const SpeciesLabel&, const SpeciesLabel&) = default;
};

/// Marker for annotator-rejected images ("no good"); never a species.
struct QualityFlag {
  std::string text;
  friend bool operator==(const QualityFlag&, const QualityFlag&) = default;
};

inline constexpr std::string_view kNoGoodMarker = "no good";
inline constexpr std::string_view kBlankName = "Blank";

namespace detail {

inline std::string collapse_whitespace(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace detail

using NormalizedLabel = std::variant<SpeciesLabel, QualityFlag>;

/// Trims and collapses internal whitespace. "no good" (any case) yields a
/// QualityFlag; "blank" (any case) yields the reserved Blank label.
inline NormalizedLabel normalize_label(std::string_view raw) {
  std::string name = detail::collapse_whitespace(raw);
  if (name.empty()) throw ValidationError("empty label");
  if (detail::iequals(name, kNoGoodMarker)) return QualityFlag{std::string(kNoGoodMarker)};
  if (detail::iequals(name, kBlankName)) return SpeciesLabel::blank();
  return SpeciesLabel{std::move(name), false};
}

/// normalize_label for contexts where a quality flag is not acceptable.
inline SpeciesLabel species_label(std::string_view raw) {
  auto n = normalize_label(raw);
  if (auto* l = std::get_if<SpeciesLabel>(&n)) return *l;
  throw ValidationError("'" + std::string(raw) + "' is a quality flag, not a species");
}

/// One backend output for one image.
struct Detection {
  SpeciesLabel label;
  double score = 0.0;
  BoundingBox box;

  friend bool operator==(const Detection&, const Detection&) = default;
};

inline void check_detection(const Detection& d) {
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw ValidationError("detection score outside [0,1]");
  }
  if (d.label.is_blank) throw ValidationError("backend detections may not carry the Blank label");
}

struct TaggedObject {
  SpeciesLabel label;
  BoundingBox box;
  friend bool operator==(const TaggedObject&, const TaggedObject&) = default;
};

/// Image metadata plus ground-truth objects, as read from an annotation file.
struct AnnotatedImage {
  std::string image_id;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<TaggedObject> objects;
  std::optional<std::string> quality_flag;

  friend bool operator==(const AnnotatedImage&, const AnnotatedImage&) = default;
};

enum class Sensitivity { kLow, kMedium, kHigh };

inline std::string_view to_string(Sensitivity s) {
  switch (s) {
    case Sensitivity::kLow: return "low";
    case Sensitivity::kMedium: return "medium";
    case Sensitivity::kHigh: return "high";
  }
  return "medium";
}

inline Sensitivity parse_sensitivity(std::string_view s) {
  if (detail::iequals(s, "low")) return Sensitivity::kLow;
  if (detail::iequals(s, "medium")) return Sensitivity::kMedium;
  if (detail::iequals(s, "high")) return Sensitivity::kHigh;
  throw ParseError("unknown sensitivity '" + std::string(s) + "'");
}

struct CameraSource {
  std::string camera_id;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int dpi = 0;
  Sensitivity sensitivity = Sensitivity::kMedium;

  friend bool operator==(const CameraSource&, const CameraSource&) = default;
};

}  // namespace trapline
