#pragma once

#include <condition_variable>
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "trapline/core/http.hpp"
#include "trapline/store/store.hpp"

namespace trapline::store {

/// `channel` is "webhook:<url>" or "log:<path>".
struct AlertRule {
  std::string rule_id;
  SpeciesLabel species;
  double min_prob = 1.0;
  std::string channel;

  void validate() const {
    if (rule_id.empty()) throw ValidationError("alert rule without an id");
    if (species.is_blank) throw ValidationError("alert rule " + rule_id + " targets Blank");
    if (!(min_prob > 0.0 && min_prob <= 1.0)) throw ValidationError("alert rule " + rule_id + ": min_prob must be in (0, 1]");
    if (!channel.starts_with("webhook:") && !channel.starts_with("log:")) {
      throw ValidationError("alert rule " + rule_id + ": unknown channel '" + channel + "'");
    }
  }
};

struct FiredAlert {
  std::string rule_id;
  std::string event_id;
  std::string species;
  double score = 0.0;
  std::string camera_id;
  Timestamp captured_at;
  std::string channel;

  friend bool operator==(const FiredAlert&, const FiredAlert&) = default;
};

inline nlohmann::json alert_payload(const FiredAlert& a) {
  return {{"rule_id", a.rule_id},
          {"species", a.species},
          {"score", a.score},
          {"camera_id", a.camera_id},
          {"captured_at", format_iso8601(a.captured_at)}};
}

/// One alert per (rule, detection) with a matching label and a score at or
/// above the rule's bound, in rule order then detection order.
inline std::vector<FiredAlert> evaluate_alerts(const ClassifiedImage& c, const IngestEvent& meta,
                                               const std::vector<AlertRule>& rules) {
  std::vector<FiredAlert> fired;
  if (c.is_blank) return fired;
  for (const auto& rule : rules) {
    for (const auto& d : c.detections) {
      if (d.label == rule.species && d.score >= rule.min_prob) {
        fired.push_back({rule.rule_id, c.event_id, d.label.canonical_name, d.score, meta.camera_id,
                         meta.captured_at, rule.channel});
      }
    }
  }
  return fired;
}

inline std::vector<AlertRule> parse_alert_rules(const nlohmann::json& j) {
  std::vector<AlertRule> rules;
  try {
    for (const auto& r : j) {
      AlertRule rule{r.at("rule_id").get<std::string>(), species_label(r.at("species").get<std::string>()),
                     r.at("min_prob").get<double>(), r.at("channel").get<std::string>()};
      rule.validate();
      rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("alert rules: ") + e.what());
  }
  return rules;
}

class AlertChannel {
 public:
  virtual ~AlertChannel() = default;
  /// Throws on failure.
  virtual void deliver(const FiredAlert& alert) = 0;
};

class WebhookChannel : public AlertChannel {
 public:
  explicit WebhookChannel(std::string url, double timeout_s = 5.0) : timeout_s_(timeout_s) {
    auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    host_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  void deliver(const FiredAlert& alert) override {
    httplib::Client cli(host_);
    auto t = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(timeout_s_));
    cli.set_connection_timeout(t);
    cli.set_read_timeout(t);
    auto res = cli.Post(path_, alert_payload(alert).dump(), "application/json");
    if (!res) throw Error("webhook " + host_ + path_ + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw Error("webhook " + host_ + path_ + ": http " + std::to_string(res->status));
    }
  }

 private:
  std::string host_;
  std::string path_;
  double timeout_s_;
};

/// Append-only JSON lines.
class LogFileChannel : public AlertChannel {
 public:
  explicit LogFileChannel(std::filesystem::path path) : path_(std::move(path)) {}

  void deliver(const FiredAlert& alert) override {
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("alert log " + path_.string() + " is not writable");
    out << alert_payload(alert).dump() << '\n';
    out.flush();
    if (!out) throw Error("alert log " + path_.string() + ": write failed");
  }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

inline std::unique_ptr<AlertChannel> make_channel(const std::string& spec) {
  if (spec.starts_with("webhook:")) return std::make_unique<WebhookChannel>(spec.substr(8));
  if (spec.starts_with("log:")) return std::make_unique<LogFileChannel>(spec.substr(4));
  throw ValidationError("unknown alert channel '" + spec + "'");
}

/// Delivers alerts on a background thread. submit() never blocks on
/// delivery; each alert is tried once and the outcome is recorded.
class AlertDispatcher {
 public:
  using Factory = std::function<std::unique_ptr<AlertChannel>(const std::string&)>;
  using Recorder = std::function<void(const FiredAlert&, bool delivered, const std::string& error)>;

  explicit AlertDispatcher(Recorder recorder = {}, Factory factory = make_channel)
      : recorder_(std::move(recorder)), factory_(std::move(factory)), worker_([this] { loop(); }) {}

  ~AlertDispatcher() { shutdown(); }

  void submit(FiredAlert alert) {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    pending_.push_back(std::move(alert));
    cv_.notify_one();
  }

  /// Delivers whatever is pending, then stops the worker.
  void shutdown() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
      cv_.notify_one();
    }
    if (worker_.joinable()) worker_.join();
  }

  /// Blocks until every submitted alert has been attempted.
  void flush() {
    std::unique_lock lock(mu_);
    idle_.wait(lock, [&] { return pending_.empty() && !busy_; });
  }

  std::size_t delivered() const { return delivered_; }
  std::size_t failed() const { return failed_; }

 private:
  void loop() {
    for (;;) {
      FiredAlert alert;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stopping_ || !pending_.empty(); });
        if (pending_.empty()) return;
        alert = std::move(pending_.front());
        pending_.pop_front();
        busy_ = true;
      }
      std::string error;
      try {
        auto& ch = channels_[alert.channel];
        if (!ch) ch = factory_(alert.channel);
        ch->deliver(alert);
        ++delivered_;
        log::info("alerts", "delivered", {{"rule_id", alert.rule_id}, {"event_id", alert.event_id}});
      } catch (const std::exception& e) {
        error = e.what();
        ++failed_;
        log::warn("alerts", "delivery_failed", {{"rule_id", alert.rule_id}, {"error", error}});
      }
      if (recorder_) {
        try {
          recorder_(alert, error.empty(), error);
        } catch (const std::exception& e) {
          log::error("alerts", "record_failed", {{"error", e.what()}});
        }
      }
      std::lock_guard lock(mu_);
      busy_ = false;
      idle_.notify_all();
    }
  }

  Recorder recorder_;
  Factory factory_;
  std::map<std::string, std::unique_ptr<AlertChannel>> channels_;
  std::mutex mu_;
  std::condition_variable cv_, idle_;
  std::deque<FiredAlert> pending_;
  bool stopping_ = false;
  bool busy_ = false;
  std::atomic<std::size_t> delivered_{0}, failed_{0};
  std::thread worker_;
};

/// Recorder writing each outcome to the store's alerts table.
inline AlertDispatcher::Recorder store_recorder(Store& store) {
  return [&store](const FiredAlert& a, bool delivered, const std::string& error) {
    store.record_alert({0, a.rule_id, a.event_id, a.species, a.score, a.camera_id, a.captured_at, a.channel,
                        delivered, error});
  };
}

}  // namespace trapline::store
