#pragma once

// Training hyperparameter profile for the external detector trainer. Nothing
// here trains; the profile is emitted as `key = value` text and parsed back.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trapline/core/error.hpp"

namespace trapline::train {

struct Augmentation {
  std::string kind;
  std::map<std::string, double> params;

  friend bool operator==(const Augmentation&, const Augmentation&) = default;
};

struct TrainProfile {
  std::int64_t resize_min = 0;
  std::int64_t resize_max = 0;
  std::int64_t feature_stride = 0;
  std::int64_t batch_size = 0;
  double learning_rate = 0.0;
  std::vector<Augmentation> augmentations;
  std::int64_t epochs = 0;
  std::int64_t steps = 0;
  std::string base_model;

  friend bool operator==(const TrainProfile&, const TrainProfile&) = default;
};

/// The profile the deployed detector was trained with.
inline TrainProfile baseline_profile() {
  TrainProfile p;
  p.resize_min = 1024;
  p.resize_max = 1024;
  p.feature_stride = 16;
  p.batch_size = 32;
  p.learning_rate = 0.0004;
  p.augmentations = {{"hue", {}},
                     {"contrast", {}},
                     {"saturation", {}},
                     {"square_crop", {{"scale_min", 0.6}, {"scale_max", 1.3}}}};
  p.epochs = 58;
  p.steps = 30000;
  p.base_model = "faster-rcnn-resnet101-coco";
  return p;
}

namespace detail {

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

inline bool is_model_id(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c <= ' ' || c == '=' || c == '#' || static_cast<unsigned char>(c) >= 0x7f) return false;
  }
  return true;
}

/// Shortest fixed-notation text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[400];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, end);
}

}  // namespace detail

/// Every broken invariant, as readable messages; empty when valid.
inline std::vector<std::string> validate_profile(const TrainProfile& p) {
  std::vector<std::string> v;
  if (p.resize_min <= 0) v.push_back("resize_min must be positive");
  if (p.resize_max <= 0) v.push_back("resize_max must be positive");
  if (p.resize_min > p.resize_max) v.push_back("resize_min exceeds resize_max");
  if (p.feature_stride <= 0) {
    v.push_back("feature_stride must be positive");
  } else if (p.resize_min > 0 && p.resize_min % p.feature_stride != 0) {
    v.push_back("feature_stride does not divide resize_min");
  }
  if (p.batch_size < 1) v.push_back("batch_size must be >= 1");
  if (!(p.learning_rate > 0.0) || !std::isfinite(p.learning_rate)) {
    v.push_back("learning_rate must be positive");
  }
  if (p.epochs < 1) v.push_back("epochs must be >= 1");
  if (p.steps < 1) v.push_back("steps must be >= 1");
  if (!detail::is_model_id(p.base_model)) v.push_back("base_model must be a non-empty token");

  std::set<std::string> kinds;
  for (const auto& a : p.augmentations) {
    if (!detail::is_identifier(a.kind)) {
      v.push_back("augmentation kind '" + a.kind + "' is not an identifier");
      continue;
    }
    if (!kinds.insert(a.kind).second) v.push_back("augmentation '" + a.kind + "' listed twice");
    for (const auto& [name, value] : a.params) {
      if (!detail::is_identifier(name) || name == "enabled") {
        v.push_back("augmentation '" + a.kind + "' has bad parameter name '" + name + "'");
      }
      if (!std::isfinite(value)) v.push_back("augmentation '" + a.kind + "." + name + "' is not finite");
    }
    if (a.kind == "square_crop") {
      auto lo = a.params.find("scale_min");
      auto hi = a.params.find("scale_max");
      if (lo == a.params.end() || hi == a.params.end()) {
        v.push_back("square_crop needs scale_min and scale_max");
      } else if (!(lo->second > 0.0 && lo->second <= hi->second)) {
        v.push_back("square_crop needs 0 < scale_min <= scale_max");
      }
    }
  }
  return v;
}

inline void require_valid(const TrainProfile& p) {
  auto v = validate_profile(p);
  if (v.empty()) return;
  std::string msg = "invalid training profile:";
  for (const auto& s : v) msg += "\n  " + s;
  throw ValidationError(msg);
}

/// Renders the profile grammar. Augmentations keep their order; each gets an
/// `enabled` line so parameterless ones are still listed.
inline std::string render_profile(const TrainProfile& p) {
  require_valid(p);
  std::ostringstream out;
  out << "# trapline training profile\n";
  out << "base_model = " << p.base_model << '\n';
  out << "resize_min = " << p.resize_min << '\n';
  out << "resize_max = " << p.resize_max << '\n';
  out << "feature_stride = " << p.feature_stride << '\n';
  out << "batch_size = " << p.batch_size << '\n';
  out << "learning_rate = " << detail::format_double(p.learning_rate) << '\n';
  out << "epochs = " << p.epochs << '\n';
  out << "steps = " << p.steps << '\n';
  for (const auto& a : p.augmentations) {
    out << "aug." << a.kind << ".enabled = true\n";
    for (const auto& [name, value] : a.params) {
      out << "aug." << a.kind << '.' << name << " = " << detail::format_double(value) << '\n';
    }
  }
  return out.str();
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(where + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

}  // namespace detail

/// Parses the profile grammar; the result is validated.
inline TrainProfile parse_profile(std::string_view text) {
  TrainProfile p;
  std::set<std::string> seen;
  std::map<std::string, std::size_t> aug_index;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = detail::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(lineno);
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError(where + ": duplicate key '" + key + "'");

    if (key.rfind("aug.", 0) == 0) {
      const auto rest = std::string_view(key).substr(4);
      const auto dot = rest.find('.');
      if (dot == std::string_view::npos) throw ParseError(where + ": expected aug.<kind>.<param>");
      const std::string kind(rest.substr(0, dot));
      const std::string param(rest.substr(dot + 1));
      if (!detail::is_identifier(kind) || !detail::is_identifier(param)) {
        throw ParseError(where + ": bad augmentation key '" + key + "'");
      }
      auto [it, fresh] = aug_index.emplace(kind, p.augmentations.size());
      if (fresh) p.augmentations.push_back({kind, {}});
      auto& aug = p.augmentations[it->second];
      if (param == "enabled") {
        if (value != "true") throw ParseError(where + ": enabled must be 'true'");
      } else {
        aug.params[param] = detail::parse_number<double>(value, where);
      }
      continue;
    }
    if (key == "base_model") {
      p.base_model = std::string(value);
    } else if (key == "resize_min") {
      p.resize_min = detail::parse_number<std::int64_t>(value, where);
    } else if (key == "resize_max") {
      p.resize_max = detail::parse_number<std::int64_t>(value, where);
    } else if (key == "feature_stride") {
      p.feature_stride = detail::parse_number<std::int64_t>(value, where);
    } else if (key == "batch_size") {
      p.batch_size = detail::parse_number<std::int64_t>(value, where);
    } else if (key == "learning_rate") {
      p.learning_rate = detail::parse_number<double>(value, where);
    } else if (key == "epochs") {
      p.epochs = detail::parse_number<std::int64_t>(value, where);
    } else if (key == "steps") {
      p.steps = detail::parse_number<std::int64_t>(value, where);
    } else {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
  for (const char* k : {"base_model", "resize_min", "resize_max", "feature_stride", "batch_size",
                        "learning_rate", "epochs", "steps"}) {
    if (!seen.count(k)) throw ParseError(std::string("missing key '") + k + "'");
  }
  require_valid(p);
  return p;
}

}  // namespace trapline::train
