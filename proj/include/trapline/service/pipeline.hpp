#pragma once

// source -> bounded queue -> classify workers -> store -> alerts.

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <stop_token>
#include <thread>
#include <vector>

#include "trapline/core/backoff.hpp"
#include "trapline/core/log.hpp"
#include "trapline/inference/client.hpp"
#include "trapline/ingest/bounded_queue.hpp"
#include "trapline/ingest/directory.hpp"
#include "trapline/store/alerts.hpp"
#include "trapline/store/store.hpp"

namespace trapline::service {

using ingest::IngestEvent;

struct PipelineOptions {
  std::size_t queue_capacity = ingest::kDefaultQueueCapacity;
  unsigned workers = 4;
  bool dry_run = false;  // alerts are evaluated and logged, never delivered
  Millis scan_interval{5'000};
  unsigned redrive_rounds = 3;
  Millis redrive_wait{1'000};
  std::vector<store::AlertRule> rules;
};

struct PipelineStats {
  std::size_t ingested = 0;        // pushed onto the queue
  std::size_t skipped_files = 0;   // unreadable or empty drop files
  std::size_t already_stored = 0;  // event id found before classifying
  std::size_t classified = 0;
  std::size_t parked = 0;
  std::size_t redriven = 0;
  std::size_t detection_images = 0;
  std::size_t detection_records = 0;
  std::size_t blank_images = 0;
  std::size_t duplicates = 0;  // caught by the store's uniqueness check
  std::size_t store_failures = 0;
  std::size_t alerts_fired = 0;
  ingest::QueueStats queue;
};

inline nlohmann::json to_json(const PipelineStats& s) {
  return {{"ingested", s.ingested},
          {"skipped_files", s.skipped_files},
          {"already_stored", s.already_stored},
          {"classified", s.classified},
          {"parked", s.parked},
          {"redriven", s.redriven},
          {"detection_images", s.detection_images},
          {"detection_records", s.detection_records},
          {"blank_images", s.blank_images},
          {"duplicates", s.duplicates},
          {"store_failures", s.store_failures},
          {"alerts_fired", s.alerts_fired},
          {"queue",
           {{"enqueued", s.queue.enqueued},
            {"dequeued", s.queue.dequeued},
            {"dropped", s.queue.dropped},
            {"in_flight", s.queue.in_flight},
            {"conserved", s.queue.conserved()}}}};
}

class Pipeline {
 public:
  Pipeline(inference::DetectionBackend& backend, store::Store& store, inference::BackendConfig backend_cfg,
           PipelineOptions opt, Sleeper sleeper = interruptible_sleep,
           store::AlertDispatcher* dispatcher = nullptr)
      : store_(store),
        client_(backend, store, std::move(backend_cfg), sleeper),
        opt_(std::move(opt)),
        sleep_(std::move(sleeper)),
        dispatcher_(dispatcher),
        queue_(opt_.queue_capacity) {
    if (opt_.workers == 0) throw ValidationError("pipeline needs at least one worker");
    for (const auto& r : opt_.rules) r.validate();
  }

  ~Pipeline() { finish(); }

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  void start() {
    std::lock_guard lock(lifecycle_);
    if (!workers_.empty()) return;
    for (unsigned i = 0; i < opt_.workers; ++i) {
      workers_.emplace_back([this](std::stop_token st) { work(st); });
    }
    log::info("pipeline", "started", {{"workers", opt_.workers}, {"queue_capacity", opt_.queue_capacity},
                                      {"dry_run", opt_.dry_run}});
  }

  /// Blocks while the queue is full. False once the pipeline is finishing.
  bool submit(IngestEvent e) {
    const std::string id = e.event_id;
    if (!queue_.push(std::move(e))) return false;
    ++ingested_;
    log::info("queue", "enqueued", {{"event_id", id}, {"depth", queue_.size()}});
    return true;
  }

  /// Scans the drop directory and enqueues what is new.
  std::size_t submit_scan(ingest::DirectorySource& source) {
    auto report = source.scan_new();
    skipped_files_ += report.skipped.size();
    std::size_t n = 0;
    for (auto& e : report.events) {
      if (!submit(std::move(e))) break;
      ++n;
    }
    log::info("directory", "scanned", {{"root", source.root().string()}, {"new", n},
                                       {"skipped", report.skipped.size()}});
    return n;
  }

  /// Moves parked events back onto the queue.
  std::size_t redrive() {
    auto parked = store_.take_all();
    std::size_t n = 0;
    for (auto& p : parked) {
      if (!submit(std::move(p.event))) {
        // Closing: put the remainder back so nothing is lost.
        for (std::size_t i = n; i < parked.size(); ++i) {
          store_.park(parked[i].event, parked[i].reason, parked[i].attempts);
        }
        break;
      }
      ++n;
    }
    redriven_ += n;
    if (n > 0) log::info("pipeline", "redriven", {{"events", n}});
    return n;
  }

  /// Waits until every enqueued event has been handled.
  void wait_idle() {
    std::unique_lock lock(idle_mu_);
    idle_cv_.wait(lock, [&] {
      auto s = queue_.stats();
      return s.enqueued == handled_.load() + s.dropped;
    });
  }

  /// Drains the queue and joins the workers.
  void finish() {
    std::lock_guard lock(lifecycle_);
    queue_.close(ingest::Shutdown::kDrain);
    for (auto& w : workers_) {
      if (w.joinable()) w.join();
    }
    workers_.clear();
  }

  /// One pass over a drop directory followed by up to `redrive_rounds`
  /// retries of parked events, then shutdown.
  PipelineStats run_once(ingest::DirectorySource& source, std::stop_token st = {}) {
    start();
    submit_scan(source);
    wait_idle();
    for (unsigned round = 0; round < opt_.redrive_rounds && store_.parked_count() > 0; ++round) {
      if (!sleep_(opt_.redrive_wait, st)) break;
      redrive();
      wait_idle();
    }
    finish();
    auto s = stats();
    log::info("pipeline", "finished", to_json(s));
    return s;
  }

  /// Scans (if a source is given) and redrives until stopped, then drains.
  PipelineStats run(ingest::DirectorySource* source, std::stop_token st) {
    start();
    while (!st.stop_requested()) {
      if (store_.parked_count() > 0) redrive();
      if (source) submit_scan(*source);
      if (!sleep_(opt_.scan_interval, st)) break;
    }
    finish();
    auto s = stats();
    log::info("pipeline", "stopped", to_json(s));
    return s;
  }

  ingest::BoundedQueue<IngestEvent>& queue() { return queue_; }

  PipelineStats stats() const {
    PipelineStats s;
    s.ingested = ingested_;
    s.skipped_files = skipped_files_;
    s.already_stored = already_stored_;
    s.classified = classified_;
    s.parked = parked_;
    s.redriven = redriven_;
    s.detection_images = detection_images_;
    s.detection_records = detection_records_;
    s.blank_images = blank_images_;
    s.duplicates = duplicates_;
    s.store_failures = store_failures_;
    s.alerts_fired = alerts_fired_;
    s.queue = queue_.stats();
    return s;
  }

 private:
  void work(std::stop_token st) {
    while (auto e = queue_.pop()) {
      handle(*e, st);
      {
        std::lock_guard lock(idle_mu_);
        ++handled_;
      }
      idle_cv_.notify_all();
    }
  }

  void handle(const IngestEvent& e, std::stop_token st) {
    try {
      if (store_.has_event(e.event_id)) {
        ++already_stored_;
        log::info("store", "already_stored", {{"event_id", e.event_id}});
        return;
      }
    } catch (const std::exception& ex) {
      log::warn("store", "lookup_failed", {{"event_id", e.event_id}, {"error", ex.what()}});
    }

    auto c = client_.classify(e, st);
    if (!c) {
      ++parked_;
      return;
    }
    ++classified_;

    store::StoredIds ids;
    try {
      ids = store_.record_result(*c, e);
    } catch (const std::exception& ex) {
      ++store_failures_;
      log::error("store", "write_failed", {{"event_id", e.event_id}, {"error", ex.what()}});
      try {
        store_.park(e, std::string("store: ") + ex.what(), c->attempts);
        ++parked_;
      } catch (const std::exception& park_ex) {
        log::error("store", "park_failed", {{"event_id", e.event_id}, {"error", park_ex.what()}});
      }
      return;
    }
    if (ids.duplicate) {
      ++duplicates_;
      log::info("store", "duplicate", {{"event_id", e.event_id}});
      return;
    }
    if (c->is_blank) {
      ++blank_images_;
    } else {
      ++detection_images_;
      detection_records_ += ids.detection_ids.size();
    }
    log::info("store", "stored", {{"event_id", e.event_id}, {"camera_id", e.camera_id}, {"blank", c->is_blank},
                                  {"records", c->is_blank ? 1 : ids.detection_ids.size()},
                                  {"unknown_camera", ids.unknown_camera}});

    for (auto& a : store::evaluate_alerts(*c, e, opt_.rules)) {
      ++alerts_fired_;
      if (opt_.dry_run || !dispatcher_) {
        log::info("alerts", "fired", store::alert_payload(a));
      } else {
        dispatcher_->submit(std::move(a));
      }
    }
  }

  store::Store& store_;
  inference::InferenceClient client_;
  PipelineOptions opt_;
  Sleeper sleep_;
  store::AlertDispatcher* dispatcher_;
  ingest::BoundedQueue<IngestEvent> queue_;

  std::mutex lifecycle_;
  std::vector<std::jthread> workers_;

  std::mutex idle_mu_;
  std::condition_variable idle_cv_;
  std::atomic<std::size_t> handled_{0};

  std::atomic<std::size_t> ingested_{0}, skipped_files_{0}, already_stored_{0}, classified_{0}, parked_{0},
      redriven_{0}, detection_images_{0}, detection_records_{0}, blank_images_{0}, duplicates_{0},
      store_failures_{0}, alerts_fired_{0};
};

}  // namespace trapline::service
