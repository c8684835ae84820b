#pragma once

// SQLite-backed persistence for classified images. The schema is listed in
// docs/schema.md. All calls are serialised on one connection; each image is
// written in a single transaction.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "trapline/inference/client.hpp"
#include "trapline/metrics/interchange.hpp"
#include "trapline/store/sqlite.hpp"

namespace trapline::store {

using inference::ClassifiedImage;
using ingest::IngestEvent;

inline constexpr std::string_view kSchema = R"sql(
CREATE TABLE IF NOT EXISTS cameras (
  camera_id     TEXT PRIMARY KEY,
  width         INTEGER NOT NULL CHECK (width > 0),
  height        INTEGER NOT NULL CHECK (height > 0),
  dpi           INTEGER NOT NULL,
  sensitivity   TEXT NOT NULL,
  registered_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS events (
  event_id     TEXT PRIMARY KEY,
  camera_id    TEXT NOT NULL,
  content_hash TEXT NOT NULL,
  captured_at  INTEGER NOT NULL,
  received_at  INTEGER NOT NULL,
  stored_at    INTEGER NOT NULL,
  is_blank     INTEGER NOT NULL,
  flags        TEXT NOT NULL,
  UNIQUE (camera_id, content_hash)
);
CREATE TABLE IF NOT EXISTS detections (
  record_id   INTEGER PRIMARY KEY AUTOINCREMENT,
  event_id    TEXT NOT NULL REFERENCES events(event_id),
  camera_id   TEXT NOT NULL,
  captured_at INTEGER NOT NULL,
  label       TEXT NOT NULL,
  score       REAL NOT NULL,
  xmin REAL NOT NULL, ymin REAL NOT NULL, xmax REAL NOT NULL, ymax REAL NOT NULL,
  stored_at   INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS detections_order ON detections (captured_at, record_id);
CREATE INDEX IF NOT EXISTS detections_event ON detections (event_id);
CREATE TABLE IF NOT EXISTS blanks (
  record_id   INTEGER PRIMARY KEY AUTOINCREMENT,
  event_id    TEXT NOT NULL UNIQUE REFERENCES events(event_id),
  camera_id   TEXT NOT NULL,
  captured_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS alerts (
  alert_id    INTEGER PRIMARY KEY AUTOINCREMENT,
  rule_id     TEXT NOT NULL,
  event_id    TEXT NOT NULL,
  species     TEXT NOT NULL,
  score       REAL NOT NULL,
  camera_id   TEXT NOT NULL,
  captured_at INTEGER NOT NULL,
  channel     TEXT NOT NULL,
  delivered   INTEGER NOT NULL,
  error       TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS retry_queue (
  seq         INTEGER PRIMARY KEY AUTOINCREMENT,
  event_id    TEXT NOT NULL,
  camera_id   TEXT NOT NULL,
  captured_at INTEGER NOT NULL,
  received_at INTEGER NOT NULL,
  image       BLOB NOT NULL,
  source      TEXT NOT NULL,
  flags       TEXT NOT NULL,
  reason      TEXT NOT NULL,
  attempts    INTEGER NOT NULL,
  parked_at   INTEGER NOT NULL
);
)sql";

struct DetectionRecord {
  std::int64_t record_id = 0;
  std::string event_id;
  std::string camera_id;
  Timestamp captured_at;
  SpeciesLabel label;
  double score = 0.0;
  BoundingBox box;
  Timestamp stored_at;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct BlankRecord {
  std::int64_t record_id = 0;
  std::string event_id;
  std::string camera_id;
  Timestamp captured_at;
};

struct StoredIds {
  bool duplicate = false;
  bool unknown_camera = false;
  std::vector<std::int64_t> detection_ids;
  std::optional<std::int64_t> blank_id;
};

/// Half-open capture-time window [from, to) plus an optional camera.
struct CountQuery {
  std::optional<Timestamp> from;
  std::optional<Timestamp> to;
  std::optional<std::string> camera_id;
};

struct SpeciesCounts {
  std::map<std::string, std::uint64_t> detection_records;  // per species, one per detection
  std::map<std::string, std::uint64_t> species_images;     // per species, distinct images
  std::uint64_t total_detection_records = 0;
  std::uint64_t detection_images = 0;
  std::uint64_t blank_images = 0;
  std::uint64_t total_images = 0;

  friend bool operator==(const SpeciesCounts&, const SpeciesCounts&) = default;
};

inline constexpr std::size_t kMaxPageSize = 1000;

struct DetectionQuery {
  std::optional<std::string> species;
  std::optional<std::string> camera_id;
  std::optional<Timestamp> from;
  std::optional<Timestamp> to;
  std::optional<double> min_score;
  std::optional<double> max_score;
  std::size_t page = 0;
  std::size_t page_size = 50;

  void validate() const {
    if (page_size == 0 || page_size > kMaxPageSize) {
      throw ValidationError("page_size must be in 1.." + std::to_string(kMaxPageSize));
    }
    if (species && species->empty()) throw ValidationError("species filter is empty");
    if (camera_id && camera_id->empty()) throw ValidationError("camera filter is empty");
    for (auto s : {min_score, max_score}) {
      if (s && !(*s >= 0.0 && *s <= 1.0)) throw ValidationError("score bounds must lie in [0, 1]");
    }
    if (min_score && max_score && *min_score > *max_score) throw ValidationError("min_score > max_score");
    if (from && to && *from > *to) throw ValidationError("time range is reversed");
  }
};

struct RecordPage {
  std::vector<DetectionRecord> records;
  std::size_t page = 0;
  std::size_t total_pages = 0;
  std::uint64_t total_records = 0;
};

struct StoredAlert {
  std::int64_t alert_id = 0;
  std::string rule_id;
  std::string event_id;
  std::string species;
  double score = 0.0;
  std::string camera_id;
  Timestamp captured_at;
  std::string channel;
  bool delivered = false;
  std::string error;
};

inline nlohmann::json flags_to_json(const ingest::IngestFlags& f) {
  return {{"timestamp_substituted", f.timestamp_substituted},
          {"clock_skew", f.clock_skew},
          {"unknown_camera", f.unknown_camera}};
}

inline ingest::IngestFlags flags_from_json(const nlohmann::json& j) {
  return {j.value("timestamp_substituted", false), j.value("clock_skew", false), j.value("unknown_camera", false)};
}

class Store : public inference::RetryStore {
 public:
  /// Called after each detection row is written, inside the transaction.
  using FaultHook = std::function<void(std::size_t rows_written)>;

  explicit Store(const std::string& path, double confidence_floor = 0.5)
      : db_(path), floor_(confidence_floor) {
    if (!(confidence_floor >= 0.0 && confidence_floor < 1.0)) {
      throw ValidationError("confidence_floor must be in [0, 1)");
    }
    db_.exec("PRAGMA foreign_keys = ON");
    if (path != ":memory:") {
      db_.exec("PRAGMA journal_mode = WAL");
      db_.exec("PRAGMA synchronous = NORMAL");
    }
    db_.exec(kSchema);
  }

  double confidence_floor() const noexcept { return floor_; }

  void set_fault_hook(FaultHook hook) {
    std::lock_guard lock(mu_);
    fault_hook_ = std::move(hook);
  }

  // Camera registry.

  void register_camera(const CameraSource& cam) {
    if (cam.camera_id.empty()) throw ValidationError("camera_id is empty");
    if (cam.width == 0 || cam.height == 0) throw ValidationError("camera resolution must be positive");
    std::lock_guard lock(mu_);
    auto s = db_.prepare(
        "INSERT INTO cameras (camera_id, width, height, dpi, sensitivity, registered_at) "
        "VALUES (?1, ?2, ?3, ?4, ?5, ?6) ON CONFLICT (camera_id) DO NOTHING");
    s.bind(1, cam.camera_id).bind(2, std::int64_t{cam.width}).bind(3, std::int64_t{cam.height});
    s.bind(4, cam.dpi).bind(5, to_string(cam.sensitivity)).bind(6, to_unix(now_utc()));
    s.run();
    if (db_.changes() == 0) throw ValidationError("camera " + cam.camera_id + " is already registered");
  }

  std::optional<CameraSource> camera(const std::string& id) {
    std::lock_guard lock(mu_);
    auto s = db_.prepare("SELECT camera_id, width, height, dpi, sensitivity FROM cameras WHERE camera_id = ?1");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_camera(s);
  }

  std::vector<CameraSource> cameras() {
    std::lock_guard lock(mu_);
    auto s = db_.prepare("SELECT camera_id, width, height, dpi, sensitivity FROM cameras ORDER BY camera_id");
    std::vector<CameraSource> out;
    while (s.step()) out.push_back(read_camera(s));
    return out;
  }

  // Results.

  /// Stores one classified image atomically: a blank row, or one row per
  /// detection. Re-submitted content is recognised and not stored again.
  StoredIds record_result(const ClassifiedImage& c, const IngestEvent& meta) {
    check_result(c, meta);
    std::lock_guard lock(mu_);
    sql::Transaction tx(db_);
    StoredIds ids = insert_image(c, meta);
    tx.commit();
    return ids;
  }

  /// Many images in one transaction; each image is still all-or-nothing.
  std::vector<StoredIds> record_results(const std::vector<std::pair<ClassifiedImage, IngestEvent>>& batch) {
    for (const auto& [c, meta] : batch) check_result(c, meta);
    std::lock_guard lock(mu_);
    sql::Transaction tx(db_);
    std::vector<StoredIds> out;
    out.reserve(batch.size());
    for (const auto& [c, meta] : batch) out.push_back(insert_image(c, meta));
    tx.commit();
    return out;
  }

  bool has_event(const std::string& event_id) {
    std::lock_guard lock(mu_);
    auto s = db_.prepare("SELECT 1 FROM events WHERE event_id = ?1");
    s.bind(1, event_id);
    return s.step();
  }

  SpeciesCounts species_counts(const CountQuery& q = {}) {
    if (q.from && q.to && *q.from > *q.to) throw ValidationError("time range is reversed");
    std::lock_guard lock(mu_);
    SpeciesCounts out;
    {
      auto s = db_.prepare("SELECT COUNT(*), COALESCE(SUM(is_blank), 0) FROM events" + where(q));
      bind_count_query(s, q);
      s.step();
      out.total_images = static_cast<std::uint64_t>(s.integer(0));
      out.blank_images = static_cast<std::uint64_t>(s.integer(1));
      out.detection_images = out.total_images - out.blank_images;
    }
    auto s = db_.prepare("SELECT label, COUNT(*), COUNT(DISTINCT event_id) FROM detections" + where(q) +
                         " GROUP BY label ORDER BY label");
    bind_count_query(s, q);
    while (s.step()) {
      auto records = static_cast<std::uint64_t>(s.integer(1));
      out.detection_records[s.text(0)] = records;
      out.species_images[s.text(0)] = static_cast<std::uint64_t>(s.integer(2));
      out.total_detection_records += records;
    }
    return out;
  }

  /// Ordered by (captured_at, record_id), so pages are stable.
  RecordPage query_detections(const DetectionQuery& q) {
    q.validate();
    std::lock_guard lock(mu_);
    std::string filter = " WHERE 1=1";
    if (q.species) filter += " AND label = ?1";
    if (q.camera_id) filter += " AND camera_id = ?2";
    if (q.from) filter += " AND captured_at >= ?3";
    if (q.to) filter += " AND captured_at < ?4";
    if (q.min_score) filter += " AND score >= ?5";
    if (q.max_score) filter += " AND score <= ?6";
    auto bind = [&](sql::Stmt& s) {
      if (q.species) s.bind(1, *q.species);
      if (q.camera_id) s.bind(2, *q.camera_id);
      if (q.from) s.bind(3, to_unix(*q.from));
      if (q.to) s.bind(4, to_unix(*q.to));
      if (q.min_score) s.bind(5, *q.min_score);
      if (q.max_score) s.bind(6, *q.max_score);
    };
    RecordPage page;
    page.page = q.page;
    {
      auto s = db_.prepare("SELECT COUNT(*) FROM detections" + filter);
      bind(s);
      s.step();
      page.total_records = static_cast<std::uint64_t>(s.integer(0));
    }
    page.total_pages = static_cast<std::size_t>((page.total_records + q.page_size - 1) / q.page_size);
    auto s = db_.prepare(
        "SELECT record_id, event_id, camera_id, captured_at, label, score, xmin, ymin, xmax, ymax, stored_at "
        "FROM detections" + filter + " ORDER BY captured_at, record_id LIMIT ?7 OFFSET ?8");
    bind(s);
    s.bind(7, static_cast<std::int64_t>(q.page_size)).bind(8, static_cast<std::int64_t>(q.page * q.page_size));
    while (s.step()) {
      DetectionRecord r;
      r.record_id = s.integer(0);
      r.event_id = s.text(1);
      r.camera_id = s.text(2);
      r.captured_at = from_unix(s.integer(3));
      r.label = species_label(s.text(4));
      r.score = s.real(5);
      r.box = {s.real(6), s.real(7), s.real(8), s.real(9)};
      r.stored_at = from_unix(s.integer(10));
      page.records.push_back(std::move(r));
    }
    return page;
  }

  std::vector<BlankRecord> blanks(const CountQuery& q = {}) {
    std::lock_guard lock(mu_);
    auto s = db_.prepare("SELECT record_id, event_id, camera_id, captured_at FROM blanks" + where(q) +
                         " ORDER BY captured_at, record_id");
    bind_count_query(s, q);
    std::vector<BlankRecord> out;
    while (s.step()) out.push_back({s.integer(0), s.text(1), s.text(2), from_unix(s.integer(3))});
    return out;
  }

  /// Every detection matching `q` (all pages), one JSON object per line.
  std::size_t export_detections(DetectionQuery q, std::ostream& out) {
    q.page_size = kMaxPageSize;
    std::size_t n = 0;
    for (q.page = 0;; ++q.page) {
      auto page = query_detections(q);
      for (const auto& r : page.records) {
        out << nlohmann::json{{"record_id", r.record_id},
                              {"event_id", r.event_id},
                              {"camera_id", r.camera_id},
                              {"captured_at", format_iso8601(r.captured_at)},
                              {"label", r.label.canonical_name},
                              {"score", r.score},
                              {"box", metrics::box_to_json(r.box)},
                              {"stored_at", format_iso8601(r.stored_at)}}
                   .dump()
            << '\n';
        ++n;
      }
      if (q.page + 1 >= page.total_pages) break;
    }
    return n;
  }

  /// One line per stored image with its image-level prediction: the label
  /// of the top-scoring detection, or Blank. Adding a `true_label` field
  /// turns the file into an evaluation fixture.
  std::size_t export_image_predictions(std::ostream& out, const CountQuery& q = {}) {
    std::lock_guard lock(mu_);
    auto s = db_.prepare(
        "SELECT e.event_id, e.camera_id, e.captured_at, e.is_blank, "
        "  (SELECT label FROM detections d WHERE d.event_id = e.event_id ORDER BY score DESC, record_id LIMIT 1), "
        "  (SELECT MAX(score) FROM detections d WHERE d.event_id = e.event_id) "
        "FROM events e" + where(q, "e.") + " ORDER BY e.captured_at, e.event_id");
    bind_count_query(s, q);
    std::size_t n = 0;
    while (s.step()) {
      const bool blank = s.integer(3) != 0;
      nlohmann::json j = {{"image_id", s.text(0)},
                          {"camera_id", s.text(1)},
                          {"captured_at", format_iso8601(from_unix(s.integer(2)))},
                          {"predicted_label", blank ? std::string(kBlankName) : s.text(4)}};
      if (blank) {
        j["score"] = nullptr;
      } else {
        j["score"] = s.real(5);
      }
      out << j.dump() << '\n';
      ++n;
    }
    return n;
  }

  // Alerts.

  void record_alert(const StoredAlert& a) {
    std::lock_guard lock(mu_);
    auto s = db_.prepare(
        "INSERT INTO alerts (rule_id, event_id, species, score, camera_id, captured_at, channel, delivered, error) "
        "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)");
    s.bind(1, a.rule_id).bind(2, a.event_id).bind(3, a.species).bind(4, a.score).bind(5, a.camera_id);
    s.bind(6, to_unix(a.captured_at)).bind(7, a.channel).bind(8, a.delivered ? 1 : 0).bind(9, a.error);
    s.run();
  }

  std::vector<StoredAlert> alerts() {
    std::lock_guard lock(mu_);
    auto s = db_.prepare(
        "SELECT alert_id, rule_id, event_id, species, score, camera_id, captured_at, channel, delivered, error "
        "FROM alerts ORDER BY alert_id");
    std::vector<StoredAlert> out;
    while (s.step()) {
      out.push_back({s.integer(0), s.text(1), s.text(2), s.text(3), s.real(4), s.text(5),
                     from_unix(s.integer(6)), s.text(7), s.integer(8) != 0, s.text(9)});
    }
    return out;
  }

  // Retry store.

  void park(const IngestEvent& e, const std::string& reason, unsigned attempts) override {
    std::lock_guard lock(mu_);
    auto s = db_.prepare(
        "INSERT INTO retry_queue (event_id, camera_id, captured_at, received_at, image, source, flags, reason, "
        "attempts, parked_at) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)");
    s.bind(1, e.event_id).bind(2, e.camera_id).bind(3, to_unix(e.captured_at)).bind(4, to_unix(e.received_at));
    s.bind(5, ByteView(e.image_bytes)).bind(6, e.source).bind(7, flags_to_json(e.flags).dump());
    s.bind(8, reason).bind(9, static_cast<std::int64_t>(attempts)).bind(10, to_unix(now_utc()));
    s.run();
  }

  std::vector<inference::ParkedEvent> take_all() override {
    std::lock_guard lock(mu_);
    sql::Transaction tx(db_);
    auto s = db_.prepare(
        "SELECT event_id, camera_id, captured_at, received_at, image, source, flags, reason, attempts "
        "FROM retry_queue ORDER BY seq");
    std::vector<inference::ParkedEvent> out;
    while (s.step()) {
      inference::ParkedEvent p;
      p.event.event_id = s.text(0);
      p.event.camera_id = s.text(1);
      p.event.captured_at = from_unix(s.integer(2));
      p.event.received_at = from_unix(s.integer(3));
      p.event.image_bytes = s.blob(4);
      p.event.source = s.text(5);
      p.event.flags = flags_from_json(nlohmann::json::parse(s.text(6)));
      p.reason = s.text(7);
      p.attempts = static_cast<unsigned>(s.integer(8));
      out.push_back(std::move(p));
    }
    db_.exec("DELETE FROM retry_queue");
    tx.commit();
    return out;
  }

  std::size_t parked_count() override {
    std::lock_guard lock(mu_);
    auto s = db_.prepare("SELECT COUNT(*) FROM retry_queue");
    s.step();
    return static_cast<std::size_t>(s.integer(0));
  }

 private:
  void check_result(const ClassifiedImage& c, const IngestEvent& meta) const {
    if (c.event_id != meta.event_id) throw ValidationError("result and event ids differ");
    if (c.is_blank != c.detections.empty()) throw ValidationError("blank flag disagrees with detections");
    for (const auto& d : c.detections) {
      check_detection(d);
      if (!(d.score > floor_)) {
        throw ValidationError("detection score " + std::to_string(d.score) + " does not exceed the floor");
      }
    }
  }

  static CameraSource read_camera(sql::Stmt& s) {
    return {s.text(0), static_cast<std::uint32_t>(s.integer(1)), static_cast<std::uint32_t>(s.integer(2)),
            static_cast<int>(s.integer(3)), parse_sensitivity(s.text(4))};
  }

  static std::string where(const CountQuery& q, const std::string& prefix = "") {
    std::string w = " WHERE 1=1";
    if (q.from) w += " AND " + prefix + "captured_at >= ?1";
    if (q.to) w += " AND " + prefix + "captured_at < ?2";
    if (q.camera_id) w += " AND " + prefix + "camera_id = ?3";
    return w;
  }

  static void bind_count_query(sql::Stmt& s, const CountQuery& q) {
    if (q.from) s.bind(1, to_unix(*q.from));
    if (q.to) s.bind(2, to_unix(*q.to));
    if (q.camera_id) s.bind(3, *q.camera_id);
  }

  StoredIds insert_image(const ClassifiedImage& c, const IngestEvent& meta) {
    StoredIds ids;
    {
      auto& s = db_.cached("SELECT 1 FROM cameras WHERE camera_id = ?1");
      s.bind(1, meta.camera_id);
      ids.unknown_camera = !s.step();
      s.reset();
    }
    ingest::IngestFlags flags = meta.flags;
    flags.unknown_camera = flags.unknown_camera || ids.unknown_camera;
    const std::int64_t stored_at = to_unix(now_utc());
    const std::int64_t captured = to_unix(meta.captured_at);

    auto& ev = db_.cached(
        "INSERT INTO events (event_id, camera_id, content_hash, captured_at, received_at, stored_at, is_blank, flags) "
        "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8) ON CONFLICT DO NOTHING");
    ev.bind(1, meta.event_id).bind(2, meta.camera_id).bind(3, sha256_hex(meta.image_bytes)).bind(4, captured);
    ev.bind(5, to_unix(meta.received_at)).bind(6, stored_at).bind(7, c.is_blank ? 1 : 0);
    ev.bind(8, flags_to_json(flags).dump());
    ev.run();
    if (db_.changes() == 0) {
      ids.duplicate = true;
      return ids;
    }

    if (c.is_blank) {
      auto& s = db_.cached("INSERT INTO blanks (event_id, camera_id, captured_at) VALUES (?1, ?2, ?3)");
      s.bind(1, meta.event_id).bind(2, meta.camera_id).bind(3, captured);
      s.run();
      ids.blank_id = db_.last_insert_id();
      return ids;
    }
    auto& s = db_.cached(
        "INSERT INTO detections (event_id, camera_id, captured_at, label, score, xmin, ymin, xmax, ymax, stored_at) "
        "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)");
    for (const auto& d : c.detections) {
      s.reset();
      s.bind(1, meta.event_id).bind(2, meta.camera_id).bind(3, captured).bind(4, d.label.canonical_name);
      s.bind(5, d.score).bind(6, d.box.xmin).bind(7, d.box.ymin).bind(8, d.box.xmax).bind(9, d.box.ymax);
      s.bind(10, stored_at);
      s.run();
      ids.detection_ids.push_back(db_.last_insert_id());
      if (fault_hook_) fault_hook_(ids.detection_ids.size());
    }
    return ids;
  }

  std::mutex mu_;
  sql::Db db_;
  double floor_;
  FaultHook fault_hook_;
};

}  // namespace trapline::store
