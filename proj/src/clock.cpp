#include "tourdesk/clock.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace tourdesk {

std::string format_rfc3339(Timestamp ts) {
  using namespace std::chrono;
  auto day = floor<days>(ts);
  year_month_day ymd{day};
  hh_mm_ss tod{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()), static_cast<int>(tod.subseconds().count()));
  return buf;
}

namespace {

int read_int(std::string_view s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) throw std::invalid_argument("timestamp too short");
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
  if (ec != std::errc{} || ptr != s.data() + pos + len) {
    throw std::invalid_argument("bad timestamp digits: " + std::string(s));
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || (s[pos] != c && !(c == 'T' && (s[pos] == 't' || s[pos] == ' ')))) {
    throw std::invalid_argument("malformed timestamp: " + std::string(s));
  }
}

}  // namespace

Timestamp parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  int y = read_int(s, 0, 4);
  expect(s, 4, '-');
  int mo = read_int(s, 5, 2);
  expect(s, 7, '-');
  int d = read_int(s, 8, 2);
  expect(s, 10, 'T');
  int h = read_int(s, 11, 2);
  expect(s, 13, ':');
  int mi = read_int(s, 14, 2);
  expect(s, 16, ':');
  int sec = read_int(s, 17, 2);
  std::size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw std::invalid_argument("empty fraction: " + std::string(s));
    for (int k = digits; k < 3; ++k) millis *= 10;
  }
  minutes offset{0};
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    int sign = s[pos] == '-' ? -1 : 1;
    int oh = read_int(s, pos + 1, 2);
    expect(s, pos + 3, ':');
    int om = read_int(s, pos + 4, 2);
    offset = minutes{sign * (oh * 60 + om)};
    pos += 6;
  } else {
    throw std::invalid_argument("missing zone designator: " + std::string(s));
  }
  if (pos != s.size()) throw std::invalid_argument("trailing characters: " + std::string(s));
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) {
    throw std::invalid_argument("out-of-range timestamp: " + std::string(s));
  }
  auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{millis};
  return time_point_cast<milliseconds>(tp - offset);
}

Timestamp SystemClock::now() {
  return std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now());
}

Timestamp SteppingClock::now() {
  std::lock_guard lock(mu_);
  auto t = next_;
  next_ += step_;
  return t;
}

Timestamp ManualClock::now() {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::set(Timestamp t) {
  std::lock_guard lock(mu_);
  now_ = t;
}

void ManualClock::advance(Duration d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

Timestamp ReplayClock::now() {
  if (!instants_.empty()) {
    last_ = instants_.front();
    instants_.pop_front();
  }
  if (!last_) throw std::logic_error("replay clock has no recorded instants");
  return *last_;
}

}  // namespace tourdesk
