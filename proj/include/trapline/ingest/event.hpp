#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "trapline/core/bytes.hpp"
#include "trapline/core/error.hpp"
#include "trapline/core/time.hpp"

namespace trapline::ingest {

/// Camera clocks drift; captures up to this far after receipt are accepted.
inline constexpr std::chrono::hours kClockSkewTolerance{24};

struct IngestFlags {
  bool timestamp_substituted = false;
  bool clock_skew = false;
  bool unknown_camera = false;

  friend bool operator==(const IngestFlags&, const IngestFlags&) = default;
};

struct IngestEvent {
  std::string event_id;
  std::string camera_id;
  Timestamp captured_at;
  Bytes image_bytes;
  Timestamp received_at;
  IngestFlags flags;
  std::vector<std::string> notes;
  std::string source;  // message uid or file path, for reports only
};

/// Dedup key: sha256 over camera id and image bytes. A re-sent transmission
/// hashes to the same id, so the event id doubles as the content hash.
inline std::string content_hash(std::string_view camera_id, ByteView image) {
  Bytes buf(camera_id.begin(), camera_id.end());
  buf.push_back(0);
  buf.insert(buf.end(), image.begin(), image.end());
  return sha256_hex(buf);
}

/// Builds an event; a missing capture time falls back to receipt time and is
/// flagged, as is a capture time too far in the future.
inline IngestEvent make_event(std::string camera_id, std::optional<Timestamp> captured, Bytes image,
                              Timestamp received_at, std::string source = {}) {
  if (camera_id.empty()) throw ValidationError("ingest: empty camera id");
  if (image.empty()) throw ValidationError("ingest: empty image for camera " + camera_id);
  IngestEvent e;
  e.event_id = content_hash(camera_id, image);
  e.camera_id = std::move(camera_id);
  e.image_bytes = std::move(image);
  e.received_at = received_at;
  e.source = std::move(source);
  if (captured) {
    e.captured_at = *captured;
    e.flags.clock_skew = *captured > received_at + kClockSkewTolerance;
  } else {
    e.captured_at = received_at;
    e.flags.timestamp_substituted = true;
  }
  return e;
}

}  // namespace trapline::ingest
