#pragma once

#include <chrono>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "trapline/core/backoff.hpp"
#include "trapline/core/domain.hpp"
#include "trapline/core/log.hpp"
#include "trapline/ingest/event.hpp"

namespace trapline::inference {

using ingest::IngestEvent;

struct BackendConfig {
  std::string endpoint = "http://127.0.0.1:8500";
  std::string model = "faster-rcnn-resnet101-coco";
  double timeout_s = 10.0;
  unsigned max_retries = 3;
  double confidence_floor = 0.5;
  unsigned workers = 4;
  Millis backoff_base{250};
  Millis backoff_cap{5'000};

  void validate() const {
    if (!(confidence_floor >= 0.0 && confidence_floor < 1.0)) {
      throw ValidationError("confidence_floor must be in [0, 1)");
    }
    if (!(timeout_s > 0.0)) throw ValidationError("timeout_s must be positive");
    if (workers == 0) throw ValidationError("workers must be at least 1");
    if (endpoint.empty()) throw ValidationError("endpoint is empty");
  }
};

enum class CallStatus { kOk, kRetryable, kRejected };

struct BackendResponse {
  CallStatus status = CallStatus::kOk;
  int http_status = 200;
  std::vector<Detection> detections;
  std::string error;
};

class DetectionBackend {
 public:
  virtual ~DetectionBackend() = default;
  virtual BackendResponse detect(ByteView image, const std::string& model) = 0;
  /// True when the backend answers its health probe.
  virtual bool ping() = 0;
};

struct ThresholdResult {
  std::vector<Detection> kept;
  bool blank = true;
};

/// Keeps detections scoring strictly above `floor`; an image with nothing
/// left is blank. A score equal to the floor does not exceed it.
inline ThresholdResult apply_threshold(const std::vector<Detection>& dets, double floor) {
  if (!(floor >= 0.0 && floor < 1.0)) throw ValidationError("confidence floor must be in [0, 1)");
  ThresholdResult r;
  for (const auto& d : dets) {
    if (d.score > floor) r.kept.push_back(d);
  }
  r.blank = r.kept.empty();
  return r;
}

struct ClassifiedImage {
  std::string event_id;
  std::vector<Detection> detections;
  bool is_blank = true;
  Millis latency{0};
  unsigned attempts = 1;
};

struct ParkedEvent {
  IngestEvent event;
  std::string reason;
  unsigned attempts = 0;
};

/// Where events go when classification cannot finish. Nothing is dropped.
class RetryStore {
 public:
  virtual ~RetryStore() = default;
  virtual void park(const IngestEvent& event, const std::string& reason, unsigned attempts) = 0;
  /// Removes and returns everything parked, oldest first.
  virtual std::vector<ParkedEvent> take_all() = 0;
  virtual std::size_t parked_count() = 0;
};

class InMemoryRetryStore : public RetryStore {
 public:
  void park(const IngestEvent& event, const std::string& reason, unsigned attempts) override {
    std::lock_guard lock(mu_);
    items_.push_back({event, reason, attempts});
  }
  std::vector<ParkedEvent> take_all() override {
    std::lock_guard lock(mu_);
    std::vector<ParkedEvent> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
    items_.clear();
    return out;
  }
  std::size_t parked_count() override {
    std::lock_guard lock(mu_);
    return items_.size();
  }

 private:
  std::mutex mu_;
  std::deque<ParkedEvent> items_;
};

/// Sends one event to the backend, retrying retryable failures with
/// exponential backoff. Returns nullopt after parking the event.
class InferenceClient {
 public:
  InferenceClient(DetectionBackend& backend, RetryStore& retry, BackendConfig cfg,
                  Sleeper sleeper = interruptible_sleep)
      : backend_(backend), retry_(retry), cfg_(std::move(cfg)), sleep_(std::move(sleeper)) {
    cfg_.validate();
  }

  std::optional<ClassifiedImage> classify(const IngestEvent& event, std::stop_token st = {}) {
    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    unsigned attempt = 0;
    for (;; ++attempt) {
      BackendResponse resp = backend_.detect(event.image_bytes, cfg_.model);
      if (resp.status == CallStatus::kOk) {
        auto r = apply_threshold(resp.detections, cfg_.confidence_floor);
        ClassifiedImage c;
        c.event_id = event.event_id;
        c.detections = std::move(r.kept);
        c.is_blank = r.blank;
        c.latency = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
        c.attempts = attempt + 1;
        log::info("classify", "classified",
                  {{"event_id", event.event_id}, {"detections", c.detections.size()}, {"blank", c.is_blank},
                   {"latency_ms", c.latency.count()}, {"attempts", c.attempts}});
        return c;
      }
      last_error = resp.error.empty() ? "http status " + std::to_string(resp.http_status) : resp.error;
      if (resp.status == CallStatus::kRejected || attempt >= cfg_.max_retries) break;
      const Millis wait = backoff_delay(attempt, cfg_.backoff_base, cfg_.backoff_cap);
      log::warn("classify", "retry", {{"event_id", event.event_id}, {"error", last_error},
                                     {"attempt", attempt + 1}, {"retry_in_ms", wait.count()}});
      if (!sleep_(wait, st)) break;
    }
    retry_.park(event, last_error, attempt + 1);
    log::error("classify", "parked", {{"event_id", event.event_id}, {"reason", last_error}, {"attempts", attempt + 1}});
    return std::nullopt;
  }

  const BackendConfig& config() const noexcept { return cfg_; }

 private:
  DetectionBackend& backend_;
  RetryStore& retry_;
  BackendConfig cfg_;
  Sleeper sleep_;
};

enum class Health { kLive, kDegraded, kDown };

inline std::string_view to_string(Health h) {
  switch (h) {
    case Health::kLive: return "live";
    case Health::kDegraded: return "degraded";
    case Health::kDown: return "down";
  }
  return "down";
}

struct HealthReport {
  Health status = Health::kDown;
  Millis latency{0};
};

/// Live when the probe answers within half the request timeout, degraded
/// when slower, down when it does not answer.
inline HealthReport backend_health(DetectionBackend& backend, const BackendConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const bool up = backend.ping();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  HealthReport r;
  r.latency = std::chrono::duration_cast<Millis>(elapsed);
  if (!up) {
    r.status = Health::kDown;
  } else if (elapsed > std::chrono::duration<double>(cfg.timeout_s / 2.0)) {
    r.status = Health::kDegraded;
  } else {
    r.status = Health::kLive;
  }
  return r;
}

}  // namespace trapline::inference
