#pragma once

// Structured logging: one JSON object per line, one line per event.

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"
#include "trapline/core/time.hpp"

namespace trapline::log {

enum class Level { kDebug, kInfo, kWarn, kError };

inline std::string_view to_string(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "info";
}

using Sink = std::function<void(const std::string& line)>;

class Logger {
 public:
  static Logger& instance() {
    static Logger logger;
    return logger;
  }

  void set_sink(Sink sink) {
    std::lock_guard lock(mu_);
    sink_ = std::move(sink);
  }
  void set_min_level(Level l) {
    std::lock_guard lock(mu_);
    min_ = l;
  }

  void write(Level level, std::string_view stage, std::string_view event, nlohmann::json fields) {
    std::lock_guard lock(mu_);
    if (level < min_ || !sink_) return;
    nlohmann::json line = {{"ts", format_iso8601(now_utc())},
                           {"level", to_string(level)},
                           {"stage", stage},
                           {"event", event}};
    if (fields.is_object()) {
      for (auto& [k, v] : fields.items()) line[k] = v;
    }
    sink_(line.dump());
  }

 private:
  Logger() : sink_([](const std::string& l) { std::cerr << l << '\n'; }) {}

  std::mutex mu_;
  Sink sink_;
  Level min_ = Level::kInfo;
};

inline void info(std::string_view stage, std::string_view event, nlohmann::json f = {}) {
  Logger::instance().write(Level::kInfo, stage, event, std::move(f));
}
inline void warn(std::string_view stage, std::string_view event, nlohmann::json f = {}) {
  Logger::instance().write(Level::kWarn, stage, event, std::move(f));
}
inline void error(std::string_view stage, std::string_view event, nlohmann::json f = {}) {
  Logger::instance().write(Level::kError, stage, event, std::move(f));
}
inline void debug(std::string_view stage, std::string_view event, nlohmann::json f = {}) {
  Logger::instance().write(Level::kDebug, stage, event, std::move(f));
}

}  // namespace trapline::log
