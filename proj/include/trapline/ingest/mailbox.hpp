#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "trapline/core/backoff.hpp"
#include "trapline/core/log.hpp"
#include "trapline/ingest/bounded_queue.hpp"
#include "trapline/ingest/mime.hpp"

namespace trapline::ingest {

/// Bad credentials. Fatal: retrying cannot help and the operator must act.
class AuthError : public Error {
 public:
  using Error::Error;
};

/// Connection-level failure; the poller retries with backoff.
class TransientMailError : public Error {
 public:
  using Error::Error;
};

class Mailbox {
 public:
  virtual ~Mailbox() = default;
  virtual std::vector<RawMessage> fetch_unseen() = 0;
  virtual void mark_seen(const std::string& uid) = 0;
  /// Marks the message seen and sets it aside so it is never fetched again.
  virtual void quarantine(const std::string& uid, const std::string& reason) = 0;
};

/// Test and demo mailbox with fault injection.
class InMemoryMailbox : public Mailbox {
 public:
  std::string deliver(std::string data) {
    std::lock_guard lock(mu_);
    std::string uid = std::to_string(++next_uid_);
    messages_.push_back({uid, std::move(data)});
    return uid;
  }

  void fail_next_fetches(int n) {
    std::lock_guard lock(mu_);
    fetch_failures_ = n;
  }
  void fail_next_marks(int n) {
    std::lock_guard lock(mu_);
    mark_failures_ = n;
  }
  void reject_credentials(bool on) {
    std::lock_guard lock(mu_);
    auth_broken_ = on;
  }

  std::vector<RawMessage> fetch_unseen() override {
    std::lock_guard lock(mu_);
    check_auth();
    if (fetch_failures_ > 0) {
      --fetch_failures_;
      throw TransientMailError("injected fetch failure");
    }
    std::vector<RawMessage> out;
    for (const auto& m : messages_) {
      if (!seen_.contains(m.uid)) out.push_back(m);
    }
    return out;
  }

  void mark_seen(const std::string& uid) override {
    std::lock_guard lock(mu_);
    check_auth();
    if (mark_failures_ > 0) {
      --mark_failures_;
      throw TransientMailError("injected store failure");
    }
    seen_[uid] = true;
  }

  void quarantine(const std::string& uid, const std::string& reason) override {
    std::lock_guard lock(mu_);
    check_auth();
    seen_[uid] = true;
    quarantined_[uid] = reason;
  }

  std::size_t unseen_count() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& m : messages_) n += !seen_.contains(m.uid);
    return n;
  }
  std::map<std::string, std::string> quarantined() const {
    std::lock_guard lock(mu_);
    return quarantined_;
  }

 private:
  void check_auth() const {
    if (auth_broken_) throw AuthError("mailbox rejected credentials");
  }

  mutable std::mutex mu_;
  std::vector<RawMessage> messages_;
  std::map<std::string, bool> seen_;
  std::map<std::string, std::string> quarantined_;
  int next_uid_ = 0;
  int fetch_failures_ = 0;
  int mark_failures_ = 0;
  bool auth_broken_ = false;
};

struct PollerConfig {
  Millis interval{60'000};
  Millis backoff_base{5'000};
  Millis backoff_cap{300'000};
};

struct PollReport {
  std::size_t fetched = 0;
  std::size_t enqueued = 0;
  std::size_t quarantined = 0;
  bool queue_closed = false;
};

/// At-least-once: a message is marked seen only after its event is queued,
/// so a failure in between redelivers it on the next poll.
class MailPoller {
 public:
  using ClockFn = std::function<Timestamp()>;

  MailPoller(Mailbox& mailbox, BoundedQueue<IngestEvent>& queue, PollerConfig cfg = {},
             Sleeper sleeper = interruptible_sleep, ClockFn clock = now_utc)
      : mailbox_(mailbox), queue_(queue), cfg_(cfg), sleep_(std::move(sleeper)), clock_(std::move(clock)) {}

  /// One fetch/parse/enqueue pass. Mailbox errors propagate to the caller.
  PollReport poll_once() {
    PollReport r;
    auto messages = mailbox_.fetch_unseen();
    r.fetched = messages.size();
    for (const auto& m : messages) {
      IngestEvent event;
      try {
        event = parse_message(m, clock_());
      } catch (const ParseError& e) {
        log::warn("poller", "quarantined", {{"uid", m.uid}, {"reason", e.what()}});
        mailbox_.quarantine(m.uid, e.what());
        ++r.quarantined;
        continue;
      } catch (const ValidationError& e) {
        log::warn("poller", "quarantined", {{"uid", m.uid}, {"reason", e.what()}});
        mailbox_.quarantine(m.uid, e.what());
        ++r.quarantined;
        continue;
      }
      const std::string event_id = event.event_id;
      if (!queue_.push(std::move(event))) {
        r.queue_closed = true;
        return r;
      }
      mailbox_.mark_seen(m.uid);
      ++r.enqueued;
      log::debug("poller", "enqueued", {{"uid", m.uid}, {"event_id", event_id}});
    }
    return r;
  }

  /// Polls until stopped or the queue closes. Transient failures back off
  /// exponentially; an AuthError is rethrown.
  void run(std::stop_token st) {
    unsigned failures = 0;
    while (!st.stop_requested()) {
      Millis wait = cfg_.interval;
      try {
        auto r = poll_once();
        if (r.queue_closed) return;
        failures = 0;
      } catch (const AuthError& e) {
        log::error("poller", "auth_failed", {{"error", e.what()}});
        throw;
      } catch (const TransientMailError& e) {
        wait = backoff_delay(failures++, cfg_.backoff_base, cfg_.backoff_cap);
        log::warn("poller", "transient_failure",
                  {{"error", e.what()}, {"retry_in_ms", wait.count()}, {"attempt", failures}});
      }
      if (!sleep_(wait, st)) return;
    }
  }

 private:
  Mailbox& mailbox_;
  BoundedQueue<IngestEvent>& queue_;
  PollerConfig cfg_;
  Sleeper sleep_;
  ClockFn clock_;
};

}  // namespace trapline::ingest
