#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trapline/core/error.hpp"
#include "trapline/metrics/classification.hpp"

namespace trapline::metrics {

/// Square count matrix, rows = actual label, columns = predicted label.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> labels)
      : labels_(std::move(labels)), cells_(labels_.size() * labels_.size(), 0) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      for (std::size_t j = i + 1; j < labels_.size(); ++j) {
        if (labels_[i] == labels_[j]) throw ValidationError("duplicate label '" + labels_[i] + "'");
      }
    }
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw ValidationError("label '" + label + "' not in matrix label set");
    return static_cast<std::size_t>(it - labels_.begin());
  }
  bool contains(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  std::uint64_t at(std::size_t actual, std::size_t predicted) const {
    return cells_.at(actual * size() + predicted);
  }
  std::uint64_t at(const std::string& actual, const std::string& predicted) const {
    return at(index_of(actual), index_of(predicted));
  }
  void add(std::size_t actual, std::size_t predicted, std::uint64_t n = 1) {
    cells_.at(actual * size() + predicted) += n;
  }

  std::uint64_t row_sum(std::size_t actual) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < size(); ++p) s += at(actual, p);
    return s;
  }
  std::uint64_t col_sum(std::size_t predicted) const {
    std::uint64_t s = 0;
    for (std::size_t a = 0; a < size(); ++a) s += at(a, predicted);
    return s;
  }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : cells_) s += c;
    return s;
  }
  std::uint64_t trace() const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < size(); ++i) s += at(i, i);
    return s;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> cells_;
};

using LabelPair = std::pair<std::string, std::string>;  // (actual, predicted)

inline ConfusionMatrix build_confusion(std::vector<std::string> labels,
                                       std::span<const LabelPair> rows) {
  ConfusionMatrix m(std::move(labels));
  for (const auto& [actual, predicted] : rows) m.add(m.index_of(actual), m.index_of(predicted));
  return m;
}

/// TP/FP/TN/FN for `label` against every other class.
inline BinaryCounts one_vs_rest_counts(const ConfusionMatrix& m, const std::string& label) {
  const std::size_t c = m.index_of(label);
  BinaryCounts out;
  out.tp = m.at(c, c);
  out.fn = m.row_sum(c) - out.tp;
  out.fp = m.col_sum(c) - out.tp;
  out.tn = m.total() - out.tp - out.fn - out.fp;
  return out;
}

}  // namespace trapline::metrics
