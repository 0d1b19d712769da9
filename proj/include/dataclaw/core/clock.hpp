#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

namespace dataclaw {

using TimePoint = std::chrono::system_clock::time_point;

/// Renders `2026-01-31T12:00:00.123Z` (UTC, millisecond precision).
std::string format_iso8601(TimePoint tp);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimePoint now() = 0;

  std::string now_iso() { return format_iso8601(now()); }
};

class SystemClock final : public Clock {
 public:
  TimePoint now() override { return std::chrono::system_clock::now(); }
};

// Deterministic clock for golden transcripts: every read advances by `step`.
class SteppingClock final : public Clock {
 public:
  SteppingClock(TimePoint start, std::chrono::milliseconds step)
      : start_ms_(std::chrono::duration_cast<std::chrono::milliseconds>(
                      start.time_since_epoch())
                      .count()),
        step_ms_(step.count()) {}

  TimePoint now() override {
    const std::int64_t n = ticks_.fetch_add(1);
    return TimePoint(std::chrono::milliseconds(start_ms_ + n * step_ms_));
  }

 private:
  std::int64_t start_ms_;
  std::int64_t step_ms_;
  std::atomic<std::int64_t> ticks_{0};
};

Clock& system_clock();

}  // namespace dataclaw
