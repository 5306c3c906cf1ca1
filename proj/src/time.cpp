#include "retain/time.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "retain/error.hpp"

namespace retain {

namespace {

int read_int(std::string_view text, size_t pos, size_t width) {
  if (pos + width > text.size()) {
    throw Error(ErrorKind::parse, "timestamp too short: '" + std::string(text) + "'");
  }
  int value = 0;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + width, value);
  if (ec != std::errc{} || ptr != first + width) {
    throw Error(ErrorKind::parse, "malformed timestamp: '" + std::string(text) + "'");
  }
  return value;
}

void expect(std::string_view text, size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(ErrorKind::parse, "malformed timestamp: '" + std::string(text) + "'");
  }
}

}  // namespace

std::string format_iso8601(Instant t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()),
                static_cast<int>(tod.subseconds().count()));
  return buf;
}

Instant parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  int y = read_int(text, 0, 4);
  expect(text, 4, '-');
  int mo = read_int(text, 5, 2);
  expect(text, 7, '-');
  int d = read_int(text, 8, 2);
  if (text.size() <= 10 || (text[10] != 'T' && text[10] != ' ')) {
    throw Error(ErrorKind::parse, "malformed timestamp: '" + std::string(text) + "'");
  }
  int h = read_int(text, 11, 2);
  expect(text, 13, ':');
  int mi = read_int(text, 14, 2);
  expect(text, 16, ':');
  int s = read_int(text, 17, 2);
  size_t pos = 19;

  long millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw Error(ErrorKind::parse, "malformed timestamp: '" + std::string(text) + "'");
    for (int i = digits; i < 3; ++i) millis *= 10;
  }

  long offset_minutes = 0;
  if (pos < text.size() && text[pos] == 'Z') {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    int sign = text[pos] == '-' ? -1 : 1;
    int oh = read_int(text, pos + 1, 2);
    expect(text, pos + 3, ':');
    int om = read_int(text, pos + 4, 2);
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw Error(ErrorKind::parse, "timestamp lacks a UTC offset: '" + std::string(text) + "'");
  }
  if (pos != text.size()) {
    throw Error(ErrorKind::parse, "trailing characters in timestamp: '" + std::string(text) + "'");
  }

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw Error(ErrorKind::parse, "timestamp out of range: '" + std::string(text) + "'");
  }
  auto t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{millis} -
           minutes{offset_minutes};
  return time_point_cast<milliseconds>(t);
}

double fractional_days(Instant from, Instant to) {
  using namespace std::chrono;
  return duration<double, days::period>(to - from).count();
}

Instant add_minutes(Instant t, double minutes) {
  using namespace std::chrono;
  return t + milliseconds{static_cast<long long>(std::llround(minutes * 60'000.0))};
}

Instant add_days(Instant t, double days) { return add_minutes(t, days * 1440.0); }

}  // namespace retain
