#pragma once

// Service configuration: defaults, then a JSON file, then TRAPLINE_*
// environment variables. Command-line flags are applied last by the CLI.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trapline/core/bytes.hpp"
#include "trapline/core/domain.hpp"
#include "trapline/core/error.hpp"
#include "trapline/inference/client.hpp"
#include "trapline/ingest/bounded_queue.hpp"
#include "trapline/ingest/imap_mailbox.hpp"
#include "trapline/store/alerts.hpp"

namespace trapline::service {

struct ServiceConfig {
  std::string db = "trapline.db";
  std::optional<std::string> drop_dir;
  std::optional<std::string> mock_fixtures;  // serve from fixtures instead of a backend
  std::optional<ingest::ImapConfig> imap;
  inference::BackendConfig backend;
  std::size_t queue_capacity = ingest::kDefaultQueueCapacity;
  Millis scan_interval{5'000};
  Millis poll_interval{60'000};
  unsigned redrive_rounds = 3;
  std::vector<store::AlertRule> alerts;
  std::vector<CameraSource> cameras;

  void validate() const {
    backend.validate();
    if (queue_capacity == 0) throw ValidationError("queue_capacity must be >= 1");
    if (scan_interval.count() <= 0) throw ValidationError("scan_interval must be positive");
    if (poll_interval.count() <= 0) throw ValidationError("poll_interval must be positive");
    for (const auto& r : alerts) r.validate();
    if (imap && imap->host.empty()) throw ValidationError("imap.host is empty");
  }
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

namespace detail {

inline Millis seconds_to_millis(double s) { return Millis(static_cast<Millis::rep>(s * 1000.0)); }

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

inline void apply_backend(const nlohmann::json& j, inference::BackendConfig& b) {
  take(j, "endpoint", b.endpoint);
  take(j, "model", b.model);
  take(j, "timeout_s", b.timeout_s);
  take(j, "max_retries", b.max_retries);
  take(j, "confidence_floor", b.confidence_floor);
  take(j, "workers", b.workers);
  if (j.contains("backoff_base_ms")) b.backoff_base = Millis(j["backoff_base_ms"].get<Millis::rep>());
  if (j.contains("backoff_cap_ms")) b.backoff_cap = Millis(j["backoff_cap_ms"].get<Millis::rep>());
}

inline ingest::ImapConfig parse_imap(const nlohmann::json& j) {
  ingest::ImapConfig c;
  take(j, "host", c.host);
  take(j, "port", c.port);
  take(j, "user", c.user);
  take(j, "password", c.password);
  take(j, "folder", c.folder);
  take(j, "tls", c.tls);
  take(j, "verify_peer", c.verify_peer);
  if (j.contains("timeout_s")) c.timeout = seconds_to_millis(j["timeout_s"].get<double>());
  return c;
}

inline CameraSource parse_camera(const nlohmann::json& j) {
  CameraSource c;
  c.camera_id = j.at("camera_id").get<std::string>();
  c.width = j.at("width").get<std::uint32_t>();
  c.height = j.at("height").get<std::uint32_t>();
  c.dpi = j.value("dpi", 0);
  c.sensitivity = parse_sensitivity(j.value("sensitivity", std::string("medium")));
  return c;
}

template <typename T>
T env_number(const std::string& name, const std::string& text) {
  try {
    std::size_t used = 0;
    T v;
    if constexpr (std::is_floating_point_v<T>) {
      v = static_cast<T>(std::stod(text, &used));
    } else {
      v = static_cast<T>(std::stoull(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(name + ": '" + text + "' is not a number");
  }
}

}  // namespace detail

/// Applies a JSON config document over `cfg`. Unknown top-level keys are
/// rejected so typos surface.
inline void apply_json(ServiceConfig& cfg, const nlohmann::json& j) {
  static const std::vector<std::string> kKeys = {
      "db", "drop_dir", "mock_fixtures", "imap", "backend", "queue_capacity",
      "scan_interval_s", "poll_interval_s", "redrive_rounds", "alerts", "cameras"};
  if (!j.is_object()) throw ParseError("config root must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ParseError("unknown config key '" + key + "'");
    }
  }
  try {
    detail::take(j, "db", cfg.db);
    if (j.contains("drop_dir")) cfg.drop_dir = j["drop_dir"].get<std::string>();
    if (j.contains("mock_fixtures")) cfg.mock_fixtures = j["mock_fixtures"].get<std::string>();
    if (j.contains("imap")) cfg.imap = detail::parse_imap(j["imap"]);
    if (j.contains("backend")) detail::apply_backend(j["backend"], cfg.backend);
    detail::take(j, "queue_capacity", cfg.queue_capacity);
    if (j.contains("scan_interval_s")) cfg.scan_interval = detail::seconds_to_millis(j["scan_interval_s"].get<double>());
    if (j.contains("poll_interval_s")) cfg.poll_interval = detail::seconds_to_millis(j["poll_interval_s"].get<double>());
    detail::take(j, "redrive_rounds", cfg.redrive_rounds);
    if (j.contains("alerts")) cfg.alerts = store::parse_alert_rules(j["alerts"]);
    if (j.contains("cameras")) {
      cfg.cameras.clear();
      for (const auto& c : j["cameras"]) cfg.cameras.push_back(detail::parse_camera(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

/// TRAPLINE_* overrides. Returns the names that were applied.
inline std::vector<std::string> apply_env(ServiceConfig& cfg, const EnvLookup& env = process_env) {
  std::vector<std::string> applied;
  auto str = [&](const char* name, auto&& set) {
    if (auto v = env(name)) {
      set(*v);
      applied.push_back(name);
    }
  };
  str("TRAPLINE_DB", [&](const std::string& v) { cfg.db = v; });
  str("TRAPLINE_DROP_DIR", [&](const std::string& v) { cfg.drop_dir = v; });
  str("TRAPLINE_MOCK_FIXTURES", [&](const std::string& v) { cfg.mock_fixtures = v; });
  str("TRAPLINE_BACKEND_URL", [&](const std::string& v) { cfg.backend.endpoint = v; });
  str("TRAPLINE_MODEL", [&](const std::string& v) { cfg.backend.model = v; });
  str("TRAPLINE_TIMEOUT_S", [&](const std::string& v) {
    cfg.backend.timeout_s = detail::env_number<double>("TRAPLINE_TIMEOUT_S", v);
  });
  str("TRAPLINE_MAX_RETRIES", [&](const std::string& v) {
    cfg.backend.max_retries = detail::env_number<unsigned>("TRAPLINE_MAX_RETRIES", v);
  });
  str("TRAPLINE_CONFIDENCE_FLOOR", [&](const std::string& v) {
    cfg.backend.confidence_floor = detail::env_number<double>("TRAPLINE_CONFIDENCE_FLOOR", v);
  });
  str("TRAPLINE_WORKERS", [&](const std::string& v) {
    cfg.backend.workers = detail::env_number<unsigned>("TRAPLINE_WORKERS", v);
  });
  str("TRAPLINE_QUEUE_CAPACITY", [&](const std::string& v) {
    cfg.queue_capacity = detail::env_number<std::size_t>("TRAPLINE_QUEUE_CAPACITY", v);
  });
  auto imap = [&]() -> ingest::ImapConfig& {
    if (!cfg.imap) cfg.imap.emplace();
    return *cfg.imap;
  };
  str("TRAPLINE_IMAP_HOST", [&](const std::string& v) { imap().host = v; });
  str("TRAPLINE_IMAP_USER", [&](const std::string& v) { imap().user = v; });
  str("TRAPLINE_IMAP_PASSWORD", [&](const std::string& v) { imap().password = v; });
  return applied;
}

/// Defaults, then the optional file, then the environment.
inline ServiceConfig load_config(const std::optional<std::filesystem::path>& file,
                                 const EnvLookup& env = process_env) {
  ServiceConfig cfg;
  if (file) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file_text(*file));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(file->string() + ": " + e.what());
    }
    apply_json(cfg, j);
  }
  apply_env(cfg, env);
  return cfg;
}

}  // namespace trapline::service
