#pragma once

// Trial report rendering: text, markdown and json.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "trapline/core/error.hpp"
#include "trapline/eval/trial.hpp"

namespace trapline::eval {

/// "87.90%", rounded half-up to 2 decimals; "n/a" when undefined.
inline std::string format_percent(metrics::Metric m) {
  if (!m) return "n/a";
  // The small bias absorbs binary noise on exact decimal halves.
  const auto hundredths = static_cast<long long>(std::floor(*m * 10000.0 + 0.5 + 1e-7));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%02lld%%", hundredths / 100, hundredths % 100);
  return buf;
}

enum class ReportFormat { kText, kMarkdown, kJson };

inline ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  if (name == "json") return ReportFormat::kJson;
  throw ValidationError("unknown report format '" + name + "' (text, markdown, json)");
}

namespace detail {

struct MetricRow {
  const char* name;
  metrics::Metric MetricSet::*field;
};

inline constexpr MetricRow kMetricRows[] = {
    {"Accuracy", &MetricSet::accuracy},
    {"Precision", &MetricSet::precision},
    {"Sensitivity", &MetricSet::sensitivity},
    {"Specificity", &MetricSet::specificity},
    {"F1-Score", &MetricSet::f1},
};

inline const char* mode_name(TrialMode m) {
  switch (m) {
    case TrialMode::kReplay: return "replay";
    case TrialMode::kSample: return "sample";
    case TrialMode::kAuto: break;
  }
  return "auto";
}

/// Rows of cells; the first row is the header.
using Grid = std::vector<std::vector<std::string>>;

inline Grid metrics_grid(const TrialReport& t) {
  Grid g;
  std::vector<std::string> head{"Class / Metric"};
  for (const auto& f : t.folds) head.push_back("Fold " + std::to_string(f.index + 1));
  head.push_back("Average");
  g.push_back(head);

  auto block = [&](const std::string& title, auto fold_set, const MetricSet& avg) {
    std::vector<std::string> label_row{title};
    label_row.resize(head.size());
    g.push_back(label_row);
    for (const auto& row : kMetricRows) {
      std::vector<std::string> cells{std::string("  ") + row.name};
      for (const auto& f : t.folds) cells.push_back(format_percent(fold_set(f).*row.field));
      cells.push_back(format_percent(avg.*row.field));
      g.push_back(cells);
    }
  };
  for (const auto& a : t.averages) {
    block(a.label, [&](const FoldReport& f) -> MetricSet {
      for (const auto& r : f.per_class) {
        if (r.label == a.label) return r.metrics;
      }
      return {};
    }, a.metrics);
  }
  block("Overall Model", [](const FoldReport& f) { return f.overall; }, t.overall_average);
  return g;
}

inline Grid confusion_grid(const ConfusionMatrix& m, const std::string& open,
                           const std::string& close) {
  Grid g;
  std::vector<std::string> head{"Actual \\ Predicted"};
  for (const auto& l : m.labels()) head.push_back(l);
  head.push_back("Total");
  g.push_back(head);
  for (std::size_t a = 0; a < m.size(); ++a) {
    std::vector<std::string> row{m.labels()[a]};
    for (std::size_t p = 0; p < m.size(); ++p) {
      const auto v = std::to_string(m.at(a, p));
      row.push_back(a == p ? open + v + close : v);
    }
    row.push_back(std::to_string(m.row_sum(a)));
    g.push_back(row);
  }
  std::vector<std::string> totals{"Total"};
  for (std::size_t p = 0; p < m.size(); ++p) totals.push_back(std::to_string(m.col_sum(p)));
  totals.push_back(std::to_string(m.total()));
  g.push_back(totals);
  return g;
}

inline Grid pooled_grid(const TrialReport& t) {
  Grid g{{"Class", "TP", "FP", "FN", "TN", "Accuracy", "Precision", "Sensitivity", "Specificity",
          "F1-Score"}};
  for (const auto& r : t.pooled) {
    g.push_back({r.label, std::to_string(r.counts.tp), std::to_string(r.counts.fp),
                 std::to_string(r.counts.fn), std::to_string(r.counts.tn),
                 format_percent(r.metrics.accuracy), format_percent(r.metrics.precision),
                 format_percent(r.metrics.sensitivity), format_percent(r.metrics.specificity),
                 format_percent(r.metrics.f1)});
  }
  return g;
}

inline void write_text_grid(std::ostream& out, const Grid& g) {
  std::vector<std::size_t> width;
  for (const auto& row : g) {
    width.resize(std::max(width.size(), row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (const auto& row : g) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        line += row[i] + std::string(width[i] - row[i].size(), ' ');
      } else {
        line += "  " + std::string(width[i] - row[i].size(), ' ') + row[i];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
}

inline void write_markdown_grid(std::ostream& out, const Grid& g) {
  auto emit = [&](const std::vector<std::string>& row) {
    out << '|';
    for (const auto& c : row) out << ' ' << c << " |";
    out << '\n';
  };
  emit(g.front());
  out << '|';
  for (std::size_t i = 0; i < g.front().size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
  out << '\n';
  for (std::size_t r = 1; r < g.size(); ++r) emit(g[r]);
}

inline std::string whole_percent(double c) {
  return format_percent(c).substr(0, format_percent(c).find('.')) + "%";
}

inline std::vector<std::string> preamble(const TrialOutcome& o) {
  std::vector<std::string> lines;
  lines.push_back("Trial: " + std::to_string(o.report.folds.size()) + " folds, mode " +
                  mode_name(o.mode) + ", " + std::to_string(o.spec.per_class) +
                  " per class, seed " + std::to_string(o.spec.seed));
  lines.push_back("Classes: " + std::to_string(o.included.size()));
  for (const auto& e : o.excluded) {
    lines.push_back("Excluded: " + e.label + " (" + std::to_string(e.support) + " images < " +
                    std::to_string(o.spec.per_class) + ")");
  }
  lines.push_back("Required sample size (N=" + std::to_string(o.population) + ", " +
                  whole_percent(o.confidence) + " confidence, " + whole_percent(o.margin) +
                  " margin): " + std::to_string(o.required_sample));
  return lines;
}

inline nlohmann::json metric_json(const MetricSet& m) {
  nlohmann::json j;
  for (const auto& row : kMetricRows) {
    const auto& v = m.*row.field;
    j[row.name] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  return j;
}

inline nlohmann::json counts_json(const BinaryCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

inline nlohmann::json trial_json(const TrialOutcome& o) {
  const auto& t = o.report;
  nlohmann::json j;
  j["mode"] = mode_name(o.mode);
  j["per_class"] = o.spec.per_class;
  j["seed"] = o.spec.seed;
  j["classes"] = o.included;
  j["excluded"] = nlohmann::json::array();
  for (const auto& e : o.excluded) j["excluded"].push_back({{"label", e.label}, {"support", e.support}});
  j["sample_size"] = {{"population", o.population},
                      {"confidence", o.confidence},
                      {"margin", o.margin},
                      {"required", o.required_sample}};
  j["folds"] = nlohmann::json::array();
  for (const auto& f : t.folds) {
    nlohmann::json jf{{"fold", f.index + 1}, {"overall", metric_json(f.overall)}};
    jf["classes"] = nlohmann::json::array();
    for (const auto& r : f.per_class) {
      jf["classes"].push_back({{"label", r.label},
                               {"support", r.support},
                               {"counts", counts_json(r.counts)},
                               {"metrics", metric_json(r.metrics)}});
    }
    j["folds"].push_back(jf);
  }
  j["averages"] = nlohmann::json::array();
  for (const auto& a : t.averages) {
    j["averages"].push_back({{"label", a.label}, {"metrics", metric_json(a.metrics)}});
  }
  j["overall_average"] = metric_json(t.overall_average);
  const auto& m = t.pooled_confusion;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t a = 0; a < m.size(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < m.size(); ++p) row.push_back(m.at(a, p));
    rows.push_back(row);
  }
  j["pooled_confusion"] = {{"labels", m.labels()}, {"rows", rows}};
  j["pooled"] = nlohmann::json::array();
  for (const auto& r : t.pooled) {
    j["pooled"].push_back({{"label", r.label},
                           {"counts", counts_json(r.counts)},
                           {"metrics", metric_json(r.metrics)}});
  }
  return j;
}

}  // namespace detail

inline std::string emit_report(const TrialOutcome& o, ReportFormat format) {
  std::ostringstream out;
  const auto& t = o.report;
  switch (format) {
    case ReportFormat::kJson:
      out << detail::trial_json(o).dump(2) << '\n';
      break;
    case ReportFormat::kText:
      for (const auto& l : detail::preamble(o)) out << l << '\n';
      out << "\nPer-class metrics (fold values and fold average)\n";
      detail::write_text_grid(out, detail::metrics_grid(t));
      out << "\nPooled confusion matrix (rows actual, columns predicted, [n] = true positives)\n";
      detail::write_text_grid(out, detail::confusion_grid(t.pooled_confusion, "[", "]"));
      out << "\nPooled per-class metrics\n";
      detail::write_text_grid(out, detail::pooled_grid(t));
      break;
    case ReportFormat::kMarkdown:
      out << "# Trial report\n\n";
      for (const auto& l : detail::preamble(o)) out << "- " << l << '\n';
      out << "\n## Per-class metrics\n\n";
      detail::write_markdown_grid(out, detail::metrics_grid(t));
      out << "\n## Pooled confusion matrix\n\nRows are actual labels, columns predicted; "
             "bold cells are true positives.\n\n";
      detail::write_markdown_grid(out, detail::confusion_grid(t.pooled_confusion, "**", "**"));
      out << "\n## Pooled per-class metrics\n\n";
      detail::write_markdown_grid(out, detail::pooled_grid(t));
      break;
  }
  return out.str();
}

inline std::string emit_report(const TrialOutcome& o, const std::string& format) {
  return emit_report(o, parse_report_format(format));
}

}  // namespace trapline::eval
