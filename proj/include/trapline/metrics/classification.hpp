#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "trapline/core/error.hpp"

namespace trapline::metrics {

struct BinaryCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }

  BinaryCounts& operator+=(const BinaryCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const BinaryCounts&, const BinaryCounts&) = default;
};

/// A metric value; nullopt where the defining ratio is 0/0.
using Metric = std::optional<double>;

struct MetricSet {
  Metric precision;
  Metric sensitivity;
  Metric specificity;
  Metric f1;
  Metric accuracy;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

inline Metric ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline Metric harmonic_f1(Metric precision, Metric sensitivity) {
  if (!precision || !sensitivity) return std::nullopt;
  const double sum = *precision + *sensitivity;
  if (sum == 0.0) return std::nullopt;
  return 2.0 * *precision * *sensitivity / sum;
}

/// Precision, sensitivity (recall), specificity, F1 and accuracy from
/// one-vs-rest counts. 0/0 ratios stay undefined.
inline MetricSet classification_metrics(const BinaryCounts& c) {
  if (c.total() == 0) throw ValidationError("classification_metrics: all counts are zero");
  MetricSet m;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.f1 = harmonic_f1(m.precision, m.sensitivity);
  m.accuracy = ratio(c.tp + c.tn, c.total());
  return m;
}

/// Arithmetic mean of the defined values; undefined if none are.
inline Metric mean_defined(std::span<const Metric> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

/// Per-metric mean over sets, each metric averaged over the sets defining it.
inline MetricSet average_metric_sets(std::span<const MetricSet> sets) {
  auto field_mean = [&](Metric MetricSet::*field) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : sets) {
      if (s.*field) {
        sum += *(s.*field);
        ++n;
      }
    }
    return n == 0 ? Metric{} : Metric{sum / static_cast<double>(n)};
  };
  MetricSet out;
  out.precision = field_mean(&MetricSet::precision);
  out.sensitivity = field_mean(&MetricSet::sensitivity);
  out.specificity = field_mean(&MetricSet::specificity);
  out.f1 = field_mean(&MetricSet::f1);
  out.accuracy = field_mean(&MetricSet::accuracy);
  return out;
}

}  // namespace trapline::metrics
