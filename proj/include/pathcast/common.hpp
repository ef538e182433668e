#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathcast {

// Error categories map onto the CLI exit codes (validation -> 2,
// missing_artifact -> 3, everything else -> 1).
enum class ErrorKind { validation, missing_artifact, runtime };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
  throw Error(ErrorKind::validation, msg);
}
[[noreturn]] inline void fail_missing(const std::string& msg) {
  throw Error(ErrorKind::missing_artifact, msg);
}
[[noreturn]] inline void fail_runtime(const std::string& msg) {
  throw Error(ErrorKind::runtime, msg);
}

// ---------------------------------------------------------------------------
// Calendar dates. Stored as days since 1970-01-01; all arithmetic is civil.
// ---------------------------------------------------------------------------
struct Date {
  std::int32_t days = 0;  // days since epoch

  bool operator==(const Date&) const = default;
  auto operator<=>(const Date&) const = default;
  Date operator+(int n) const { return Date{days + n}; }
  Date operator-(int n) const { return Date{days - n}; }
  int operator-(const Date& o) const { return days - o.days; }
};

Date make_date(int year, int month, int day);
void civil_from_date(Date d, int& year, int& month, int& day);
// ISO weekday: 1 = Monday ... 7 = Sunday.
int iso_weekday(Date d);
Date parse_date(const std::string& iso);      // "YYYY-MM-DD"
std::string format_date(Date d);

// Timestamps are minutes since the epoch in the market-local frame.
using Minute = std::int64_t;

constexpr int kMinutesPerDay = 1440;

inline Minute midnight_minute(Date d) { return Minute(d.days) * kMinutesPerDay; }
inline Date date_of_minute(Minute m) {
  return Date{static_cast<std::int32_t>(m >= 0 ? m / kMinutesPerDay
                                               : (m - (kMinutesPerDay - 1)) / kMinutesPerDay)};
}

// Parses "YYYY-MM-DD HH:MM[:SS]" or "YYYY-MM-DDTHH:MM[:SS][Z]"; seconds are
// truncated to the containing minute.
Minute parse_timestamp(const std::string& s);
std::string format_timestamp(Minute m);

// ---------------------------------------------------------------------------
// Number formatting. All persisted numerics go through these so that output
// is locale-free, shortest round-trip and reproducible.
// ---------------------------------------------------------------------------
std::string format_double(double v);
std::string format_int(std::int64_t v);
double parse_double(const std::string& s, bool* ok = nullptr);
std::int64_t parse_int(const std::string& s, bool* ok = nullptr);

// ---------------------------------------------------------------------------
// Hashing and atomic file IO (manifests, golden checksums).
// ---------------------------------------------------------------------------
std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::filesystem::path& p);

// Writes via temp file + rename so partially written artifacts never appear.
void atomic_write_file(const std::filesystem::path& p, const std::string& bytes);
std::string read_file(const std::filesystem::path& p);

// ---------------------------------------------------------------------------
// Deterministic parallel map: body(i) runs for i in [0, n); results must be
// written to preallocated per-i slots so the merge order never matters.
// ---------------------------------------------------------------------------
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

}  // namespace pathcast
