#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <stop_token>

namespace trapline {

using Millis = std::chrono::milliseconds;

/// base * 2^attempt, capped. attempt 0 is the first retry.
inline Millis backoff_delay(unsigned attempt, Millis base, Millis cap) {
  Millis d = base;
  for (unsigned i = 0; i < attempt && d < cap; ++i) d *= 2;
  return std::min(d, cap);
}

/// Waits `d` or until stop is requested; false means stopped.
using Sleeper = std::function<bool(Millis, std::stop_token)>;

inline bool interruptible_sleep(Millis d, std::stop_token st) {
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  return !cv.wait_for(lock, st, d, [] { return false; }) && !st.stop_requested();
}

}  // namespace trapline
