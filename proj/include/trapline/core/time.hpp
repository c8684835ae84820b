#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace trapline {

using Clock = std::chrono::system_clock;
using Timestamp = std::chrono::sys_seconds;

inline Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::seconds>(Clock::now());
}

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (a space may replace 'T'; the trailing 'Z'
/// is optional). Returns nullopt on anything else.
inline std::optional<Timestamp> parse_iso8601(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  if (text.size() != 19 && !(text.size() == 20 && text.back() == 'Z')) return std::nullopt;
  std::string buf(text.substr(0, 19));
  if (buf[4] != '-' || buf[7] != '-' || (buf[10] != 'T' && buf[10] != ' ') || buf[13] != ':' ||
      buf[16] != ':') {
    return std::nullopt;
  }
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u, 11u, 12u, 14u, 15u, 17u, 18u}) {
    if (buf[i] < '0' || buf[i] > '9') return std::nullopt;
  }
  int y = std::stoi(buf.substr(0, 4));
  unsigned mo = static_cast<unsigned>(std::stoi(buf.substr(5, 2)));
  unsigned d = static_cast<unsigned>(std::stoi(buf.substr(8, 2)));
  int h = std::stoi(buf.substr(11, 2));
  int mi = std::stoi(buf.substr(14, 2));
  int s = std::stoi(buf.substr(17, 2));
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  return Timestamp{std::chrono::sys_days{ymd}} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{s};
}

inline std::string format_iso8601(Timestamp t) {
  auto days = std::chrono::floor<std::chrono::days>(t);
  std::chrono::year_month_day ymd{days};
  std::chrono::hh_mm_ss hms{t - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

inline std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_unix(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

}  // namespace trapline
