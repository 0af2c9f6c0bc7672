#pragma once

#include <chrono>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace tourdesk {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Duration = std::chrono::milliseconds;

// "2022-09-01T10:00:00.000Z"
std::string format_rfc3339(Timestamp ts);
// Accepts the format above plus an optional fractional part of any length and
// a numeric offset in place of 'Z'. Throws std::invalid_argument.
Timestamp parse_rfc3339(std::string_view s);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() override;
};

// Starts at `start` and moves forward by `step` on every read.
class SteppingClock final : public Clock {
 public:
  SteppingClock(Timestamp start, Duration step) : next_(start), step_(step) {}
  Timestamp now() override;

 private:
  std::mutex mu_;
  Timestamp next_;
  Duration step_;
};

// Returns whatever was last set; tests move it explicitly.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start) : now_(start) {}
  Timestamp now() override;
  void set(Timestamp t);
  void advance(Duration d);

 private:
  std::mutex mu_;
  Timestamp now_;
};

// Plays back recorded instants in order, then keeps returning the last one.
class ReplayClock final : public Clock {
 public:
  explicit ReplayClock(std::deque<Timestamp> instants) : instants_(std::move(instants)) {}
  Timestamp now() override;

 private:
  std::deque<Timestamp> instants_;
  std::optional<Timestamp> last_;
};

}  // namespace tourdesk
