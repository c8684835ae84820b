#pragma once

// Drop-directory ingest: <root>/<camera_id>/*.jpg, each image optionally
// paired with a `key=value` sidecar named <image>.meta or <stem>.meta.
// Recognised keys: camera_id, time.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "trapline/core/log.hpp"
#include "trapline/ingest/event.hpp"
#include "trapline/ingest/mime.hpp"

namespace trapline::ingest {

namespace fs = std::filesystem;

inline bool is_image_file(const fs::path& p) {
  std::string ext = detail::lower(p.extension().string());
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

inline std::map<std::string, std::string> parse_sidecar(std::string_view text) {
  std::map<std::string, std::string> kv;
  for (auto line : detail::split_lines(text)) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    kv[std::string(detail::trim(line.substr(0, eq)))] = std::string(detail::trim(line.substr(eq + 1)));
  }
  return kv;
}

struct ScanReport {
  std::vector<IngestEvent> events;
  std::vector<std::string> skipped;  // "path: reason"
};

class DirectorySource {
 public:
  using ClockFn = std::function<Timestamp()>;

  explicit DirectorySource(fs::path root, ClockFn clock = now_utc)
      : root_(std::move(root)), clock_(std::move(clock)) {}

  /// Events for image files not yet delivered in this run, in path order.
  /// Skipped files are retried on the next scan.
  ScanReport scan_new() {
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) throw Error("drop directory not readable: " + root_.string());
    std::vector<fs::path> candidates;
    collect(root_, candidates);
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
      if (entry.is_directory(ec)) collect(entry.path(), candidates);
    }
    std::sort(candidates.begin(), candidates.end());

    ScanReport report;
    for (const auto& path : candidates) {
      if (seen_.contains(path)) continue;
      try {
        report.events.push_back(load(path));
        seen_.insert(path);
      } catch (const Error& e) {
        report.skipped.push_back(path.string() + ": " + e.what());
        log::warn("directory", "skipped", {{"path", path.string()}, {"reason", e.what()}});
      }
    }
    return report;
  }

  const fs::path& root() const noexcept { return root_; }

 private:
  static void collect(const fs::path& dir, std::vector<fs::path>& out) {
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      if (entry.is_regular_file(ec) && is_image_file(entry.path())) out.push_back(entry.path());
    }
  }

  IngestEvent load(const fs::path& path) const {
    Bytes image = read_file_bytes(path);
    if (image.empty()) throw Error("empty image file");

    std::map<std::string, std::string> meta;
    for (auto sidecar : {fs::path(path.string() + ".meta"), path.parent_path() / (path.stem().string() + ".meta")}) {
      std::error_code ec;
      if (fs::is_regular_file(sidecar, ec)) {
        meta = parse_sidecar(read_file_text(sidecar));
        break;
      }
    }

    std::string camera_id;
    if (auto it = meta.find("camera_id"); it != meta.end() && !it->second.empty()) {
      camera_id = it->second;
    } else {
      camera_id = (path.parent_path() == root_ ? root_ : path.parent_path()).filename().string();
    }

    std::vector<std::string> notes;
    std::optional<Timestamp> captured;
    if (auto it = meta.find("time"); it != meta.end()) {
      captured = parse_iso8601(it->second);
      if (!captured) notes.push_back("unparseable time '" + it->second + "', receipt time substituted");
    } else {
      std::error_code ec;
      auto mtime = fs::last_write_time(path, ec);
      if (!ec) {
        captured = std::chrono::floor<std::chrono::seconds>(fs::file_time_type::clock::to_sys(mtime));
        notes.push_back("capture time taken from file modification time");
      }
    }
    IngestEvent e = make_event(camera_id, captured, std::move(image), clock_(), path.string());
    e.notes = std::move(notes);
    return e;
  }

  fs::path root_;
  ClockFn clock_;
  std::set<fs::path> seen_;
};

/// One-shot scan of a drop directory.
inline ScanReport ingest_directory(const fs::path& root) { return DirectorySource(root).scan_new(); }

}  // namespace trapline::ingest
