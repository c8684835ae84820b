#pragma once

// Stratified fold trials: sampling, per-fold one-vs-rest metrics, fold
// averaging and the pooled confusion matrix.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "trapline/core/domain.hpp"
#include "trapline/core/error.hpp"
#include "trapline/core/random.hpp"
#include "trapline/eval/sample_size.hpp"
#include "trapline/metrics/classification.hpp"
#include "trapline/metrics/confusion.hpp"

namespace trapline::eval {

using metrics::BinaryCounts;
using metrics::ConfusionMatrix;
using metrics::LabelPair;
using metrics::MetricSet;

/// One fixture line: an image, its verified label and the pipeline's label.
struct TrialRecord {
  std::string image_id;
  std::string true_label;
  std::string predicted_label;
  std::optional<double> score;
  std::optional<std::size_t> fold;  // 0-based; present in replay fixtures

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

namespace detail {

inline std::string canonical(const std::string& raw) { return species_label(raw).canonical_name; }

}  // namespace detail

/// Reads JSONL trial records. Labels are normalised ("blank" -> "Blank").
inline std::vector<TrialRecord> read_trial_records(std::istream& in,
                                                   const std::string& source = "fixture") {
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    try {
      TrialRecord r;
      r.image_id = j.at("image_id").get<std::string>();
      if (r.image_id.empty()) throw ValidationError("empty image_id");
      r.true_label = detail::canonical(j.at("true_label").get<std::string>());
      r.predicted_label = detail::canonical(j.at("predicted_label").get<std::string>());
      if (j.contains("score") && !j["score"].is_null()) r.score = j["score"].get<double>();
      if (j.contains("fold") && !j["fold"].is_null()) {
        const auto f = j["fold"].get<std::int64_t>();
        if (f < 0) throw ValidationError("negative fold");
        r.fold = static_cast<std::size_t>(f);
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

inline void write_trial_records(std::ostream& out, std::span<const TrialRecord> records) {
  for (const auto& r : records) {
    nlohmann::json j = {{"image_id", r.image_id},
                        {"true_label", r.true_label},
                        {"predicted_label", r.predicted_label},
                        {"score", r.score ? nlohmann::json(*r.score) : nlohmann::json(nullptr)}};
    if (r.fold) j["fold"] = *r.fold;
    out << j.dump() << '\n';
  }
}

/// Image-level label: highest-scoring surviving detection, Blank if none.
/// Ties keep the earlier detection.
inline std::string image_level_label(std::span<const Detection> kept) {
  const Detection* best = nullptr;
  for (const auto& d : kept) {
    if (!best || d.score > best->score) best = &d;
  }
  return best ? best->label.canonical_name : std::string(kBlankName);
}

struct FoldSpec {
  std::vector<std::string> classes;
  std::size_t per_class = 25;
  std::size_t folds = 10;
  std::uint64_t seed = 0;

  void validate() const {
    if (per_class < 1) throw ValidationError("per_class must be >= 1");
    if (folds < 1) throw ValidationError("folds must be >= 1");
    if (classes.empty()) throw ValidationError("fold spec has no classes");
    std::set<std::string> seen;
    for (const auto& c : classes) {
      if (!seen.insert(c).second) throw ValidationError("duplicate class '" + c + "'");
    }
  }
};

struct FoldItem {
  std::string image_id;
  std::string true_label;
  friend bool operator==(const FoldItem&, const FoldItem&) = default;
};

struct Fold {
  std::size_t index = 0;
  std::vector<FoldItem> items;
  friend bool operator==(const Fold&, const Fold&) = default;
};

struct ExcludedClass {
  std::string label;
  std::size_t support = 0;
  friend bool operator==(const ExcludedClass&, const ExcludedClass&) = default;
};

struct FoldPlan {
  std::vector<std::string> included;
  std::vector<ExcludedClass> excluded;
  std::vector<Fold> folds;
};

/// Draws `per_class` images per class for each fold, without replacement
/// inside a fold. Folds are drawn independently, so an image can recur
/// across folds. Classes short of `per_class` images are excluded.
inline FoldPlan sample_folds(std::span<const FoldItem> pool, const FoldSpec& spec) {
  spec.validate();
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < pool.size(); ++i) by_class[pool[i].true_label].push_back(i);

  FoldPlan plan;
  for (const auto& c : spec.classes) {
    auto it = by_class.find(c);
    const std::size_t n = it == by_class.end() ? 0 : it->second.size();
    if (n < spec.per_class) {
      plan.excluded.push_back({c, n});
    } else {
      plan.included.push_back(c);
    }
  }
  if (plan.included.empty()) throw ValidationError("no class has enough images for a fold");

  for (std::size_t f = 0; f < spec.folds; ++f) {
    SeededRng rng({spec.seed, static_cast<std::uint64_t>(f)});
    Fold fold{f, {}};
    for (const auto& c : plan.included) {
      const auto& members = by_class.at(c);
      for (auto k : rng.sample_indices(members.size(), spec.per_class)) {
        fold.items.push_back(pool[members[k]]);
      }
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

struct ClassResult {
  std::string label;
  MetricSet metrics;
  BinaryCounts counts;
  std::uint64_t support = 0;
};

struct FoldReport {
  std::size_t index = 0;
  std::vector<ClassResult> per_class;
  MetricSet overall;  // macro-average over classes
  ConfusionMatrix confusion;
  std::vector<LabelPair> pairs;

  const ClassResult& at(const std::string& label) const {
    for (const auto& r : per_class) {
      if (r.label == label) return r;
    }
    throw ValidationError("class '" + label + "' not in report");
  }
};

namespace detail {

/// `classes` followed by any other label seen in `pairs`, sorted.
inline std::vector<std::string> matrix_labels(std::span<const std::string> classes,
                                              std::span<const LabelPair> pairs) {
  std::vector<std::string> labels(classes.begin(), classes.end());
  std::set<std::string> known(labels.begin(), labels.end());
  std::set<std::string> extra;
  for (const auto& [a, p] : pairs) {
    if (!known.count(a)) extra.insert(a);
    if (!known.count(p)) extra.insert(p);
  }
  labels.insert(labels.end(), extra.begin(), extra.end());
  return labels;
}

inline BinaryCounts direct_counts(std::span<const LabelPair> pairs, const std::string& c) {
  BinaryCounts k;
  for (const auto& [a, p] : pairs) {
    if (a == c && p == c) {
      ++k.tp;
    } else if (a == c) {
      ++k.fn;
    } else if (p == c) {
      ++k.fp;
    } else {
      ++k.tn;
    }
  }
  return k;
}

/// Metrics for one class; a class with no images in the set is not evaluated.
inline MetricSet class_metrics(const BinaryCounts& k) {
  if (k.tp + k.fn == 0) return {};
  return metrics::classification_metrics(k);
}

inline std::vector<ClassResult> score_classes(std::span<const std::string> classes,
                                              std::span<const LabelPair> pairs) {
  std::vector<ClassResult> out;
  for (const auto& c : classes) {
    ClassResult r;
    r.label = c;
    r.counts = direct_counts(pairs, c);
    r.support = r.counts.tp + r.counts.fn;
    r.metrics = class_metrics(r.counts);
    out.push_back(std::move(r));
  }
  return out;
}

inline MetricSet macro(std::span<const ClassResult> rows) {
  std::vector<MetricSet> sets;
  for (const auto& r : rows) sets.push_back(r.metrics);
  return metrics::average_metric_sets(sets);
}

}  // namespace detail

using PredictionMap = std::map<std::string, std::string>;  // image_id -> label

/// One-vs-rest metrics for every class in `classes`. Truth labels outside
/// `classes` are reported after them.
inline FoldReport evaluate_fold(const Fold& fold, const PredictionMap& predictions,
                                std::span<const std::string> classes) {
  FoldReport rep;
  rep.index = fold.index;
  for (const auto& item : fold.items) {
    auto it = predictions.find(item.image_id);
    if (it == predictions.end()) {
      throw ValidationError("fold " + std::to_string(fold.index + 1) + ": no prediction for image '" +
                            item.image_id + "'");
    }
    rep.pairs.emplace_back(item.true_label, it->second);
  }
  std::vector<std::string> reported(classes.begin(), classes.end());
  std::set<std::string> known(reported.begin(), reported.end());
  std::set<std::string> extra_truth;
  for (const auto& [a, p] : rep.pairs) {
    if (!known.count(a)) extra_truth.insert(a);
  }
  reported.insert(reported.end(), extra_truth.begin(), extra_truth.end());

  rep.confusion = metrics::build_confusion(detail::matrix_labels(reported, rep.pairs), rep.pairs);
  rep.per_class = detail::score_classes(reported, rep.pairs);
  rep.overall = detail::macro(rep.per_class);
  return rep;
}

struct ClassAverage {
  std::string label;
  MetricSet metrics;
};

struct TrialReport {
  std::vector<FoldReport> folds;
  std::vector<ClassAverage> averages;  // per-metric mean over folds
  MetricSet overall_average;           // mean of fold macro-averages
  ConfusionMatrix pooled_confusion;
  std::vector<ClassResult> pooled;     // metrics of the summed counts

  const ClassAverage& average(const std::string& label) const {
    for (const auto& a : averages) {
      if (a.label == label) return a;
    }
    throw ValidationError("class '" + label + "' not in trial");
  }
  const ClassResult& pooled_class(const std::string& label) const {
    for (const auto& r : pooled) {
      if (r.label == label) return r;
    }
    throw ValidationError("class '" + label + "' not in trial");
  }
};

/// Fold means (undefined values skipped) plus the pooled view over all
/// fold pairs.
inline TrialReport aggregate_trial(std::vector<FoldReport> folds) {
  if (folds.empty()) throw ValidationError("aggregate_trial needs at least one fold");
  TrialReport t;

  std::vector<std::string> classes;
  std::set<std::string> seen;
  for (const auto& f : folds) {
    for (const auto& r : f.per_class) {
      if (seen.insert(r.label).second) classes.push_back(r.label);
    }
  }
  for (const auto& c : classes) {
    std::vector<MetricSet> sets;
    for (const auto& f : folds) {
      for (const auto& r : f.per_class) {
        if (r.label == c) sets.push_back(r.metrics);
      }
    }
    t.averages.push_back({c, metrics::average_metric_sets(sets)});
  }
  std::vector<MetricSet> overall;
  for (const auto& f : folds) overall.push_back(f.overall);
  t.overall_average = metrics::average_metric_sets(overall);

  std::vector<LabelPair> all;
  for (const auto& f : folds) all.insert(all.end(), f.pairs.begin(), f.pairs.end());
  t.pooled_confusion = metrics::build_confusion(detail::matrix_labels(classes, all), all);
  t.pooled = detail::score_classes(classes, all);
  t.folds = std::move(folds);
  return t;
}

// ---------------------------------------------------------------------------
// Whole-trial driver used by the CLI and the acceptance suite.

enum class TrialMode { kAuto, kReplay, kSample };

struct TrialOptions {
  FoldSpec spec;  // classes may be empty: taken from the fixture
  TrialMode mode = TrialMode::kAuto;
  std::optional<std::uint64_t> population;  // for the sample-size line
  double margin = 0.05;
  double confidence = 0.95;
};

struct TrialOutcome {
  TrialMode mode = TrialMode::kReplay;
  FoldSpec spec;
  std::vector<std::string> included;
  std::vector<ExcludedClass> excluded;
  std::uint64_t population = 0;
  double margin = 0.05;
  double confidence = 0.95;
  std::uint64_t required_sample = 0;
  TrialReport report;
};

namespace detail {

inline std::vector<std::string> labels_in_order(std::span<const TrialRecord> records) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.true_label).second) out.push_back(r.true_label);
  }
  return out;
}

/// image_id -> predicted label; an image must not carry two predictions.
inline PredictionMap prediction_map(std::span<const TrialRecord> records) {
  PredictionMap m;
  for (const auto& r : records) {
    auto [it, fresh] = m.emplace(r.image_id, r.predicted_label);
    if (!fresh && it->second != r.predicted_label) {
      throw ValidationError("image '" + r.image_id + "' has conflicting predictions");
    }
  }
  return m;
}

}  // namespace detail

/// Replay uses the fixture's fold column; sampling draws fresh folds from
/// the fixture as a pool. kAuto replays when every record carries a fold.
inline TrialOutcome run_trial(std::span<const TrialRecord> records, TrialOptions opt) {
  if (records.empty()) throw ValidationError("trial fixture is empty");
  TrialOutcome out;
  if (opt.spec.classes.empty()) opt.spec.classes = detail::labels_in_order(records);
  const bool all_folded =
      std::all_of(records.begin(), records.end(), [](const auto& r) { return r.fold.has_value(); });
  out.mode = opt.mode;
  if (out.mode == TrialMode::kAuto) out.mode = all_folded ? TrialMode::kReplay : TrialMode::kSample;
  if (out.mode == TrialMode::kReplay && !all_folded) {
    throw ValidationError("replay needs a fold on every fixture record");
  }
  opt.spec.validate();

  std::vector<Fold> folds;
  PredictionMap predictions = detail::prediction_map(records);
  if (out.mode == TrialMode::kReplay) {
    std::map<std::size_t, Fold> grouped;
    for (const auto& r : records) {
      auto& f = grouped[*r.fold];
      f.index = *r.fold;
      f.items.push_back({r.image_id, r.true_label});
    }
    for (auto& [_, f] : grouped) folds.push_back(std::move(f));
    out.included = opt.spec.classes;
    opt.spec.folds = folds.size();
  } else {
    std::vector<FoldItem> pool;
    std::set<std::string> ids;
    for (const auto& r : records) {
      if (ids.insert(r.image_id).second) pool.push_back({r.image_id, r.true_label});
    }
    FoldPlan plan = sample_folds(pool, opt.spec);
    folds = std::move(plan.folds);
    out.included = std::move(plan.included);
    out.excluded = std::move(plan.excluded);
  }

  std::vector<FoldReport> reports;
  for (const auto& f : folds) reports.push_back(evaluate_fold(f, predictions, out.included));
  out.report = aggregate_trial(std::move(reports));

  out.spec = opt.spec;
  out.margin = opt.margin;
  out.confidence = opt.confidence;
  out.population = opt.population ? *opt.population : predictions.size();
  out.required_sample = required_sample_size(out.population, out.margin, out.confidence);
  return out;
}

}  // namespace trapline::eval
