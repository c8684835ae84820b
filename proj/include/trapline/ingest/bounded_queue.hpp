#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>

#include "trapline/core/error.hpp"

namespace trapline::ingest {

inline constexpr std::size_t kDefaultQueueCapacity = 1024;

struct QueueStats {
  std::uint64_t enqueued = 0;
  std::uint64_t dequeued = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;

  bool conserved() const noexcept { return enqueued == dequeued + dropped + in_flight; }
};

enum class Shutdown { kDrain, kDiscard };

/// Multi-producer, multi-consumer FIFO. A full queue blocks producers
/// instead of dropping; only a discarding shutdown drops items.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity = kDefaultQueueCapacity) : capacity_(capacity) {
    if (capacity == 0) throw ValidationError("queue capacity must be positive");
  }
  BoundedQueue(const BoundedQueue&) = delete;
  BoundedQueue& operator=(const BoundedQueue&) = delete;

  /// Blocks while full. Returns false, leaving `item` untouched, once closed.
  bool push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    ++stats_.enqueued;
    not_empty_.notify_one();
    return true;
  }

  /// Blocks until an item arrives. nullopt is the terminal marker: the queue
  /// is closed and nothing is left to drain.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    ++stats_.dequeued;
    not_full_.notify_one();
    return item;
  }

  void close(Shutdown mode = Shutdown::kDrain) {
    std::lock_guard lock(mu_);
    closed_ = true;
    if (mode == Shutdown::kDiscard) {
      stats_.dropped += items_.size();
      items_.clear();
    }
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  QueueStats stats() const {
    std::lock_guard lock(mu_);
    QueueStats s = stats_;
    s.in_flight = items_.size();
    return s;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }
  std::size_t capacity() const noexcept { return capacity_; }
  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<T> items_;
  QueueStats stats_;
  bool closed_ = false;
};

}  // namespace trapline::ingest
