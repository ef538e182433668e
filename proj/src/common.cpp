#include "pathcast/common.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <cassert>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace pathcast {

namespace {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

Date make_date(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1 || day > 31)
    fail_validation("invalid civil date components");
  return Date{static_cast<std::int32_t>(days_from_civil(year, month, day))};
}

void civil_from_date(Date d, int& year, int& month, int& day) {
  civil_from_days(d.days, year, month, day);
}

int iso_weekday(Date d) {
  // 1970-01-01 was a Thursday.
  int w = static_cast<int>(((d.days % 7) + 7) % 7);  // 0 = Thursday
  return (w + 3) % 7 + 1;
}

Date parse_date(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    fail_validation("unparseable date: '" + iso + "'");
  return make_date(y, m, d);
}

std::string format_date(Date d) {
  int y, m, dd;
  civil_from_date(d, y, m, dd);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, dd);
  return buf;
}

Minute parse_timestamp(const std::string& s) {
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  int n = std::sscanf(s.c_str(), "%d-%d-%d%*1[T ]%d:%d:%d", &y, &mo, &d, &hh, &mm, &ss);
  if (n < 5) fail_validation("unparseable timestamp: '" + s + "'");
  if (hh < 0 || hh > 23 || mm < 0 || mm > 59)
    fail_validation("timestamp out of range: '" + s + "'");
  return midnight_minute(make_date(y, mo, d)) + hh * 60 + mm;
}

std::string format_timestamp(Minute m) {
  Date d = date_of_minute(m);
  int rem = static_cast<int>(m - midnight_minute(d));
  char buf[24];
  int y, mo, dd;
  civil_from_date(d, y, mo, dd);
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d", y, mo, dd, rem / 60, rem % 60);
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) fail_runtime("to_chars failed");
  return std::string(buf, p);
}

std::string format_int(std::int64_t v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

double parse_double(const std::string& s, bool* ok) {
  const std::string t = trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  bool good = (ec == std::errc()) && p == t.data() + t.size() && !t.empty();
  if (ok) {
    *ok = good;
    return good ? v : 0.0;
  }
  if (!good) fail_validation("unparseable number: '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, bool* ok) {
  const std::string t = trim(s);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  bool good = (ec == std::errc()) && p == t.data() + t.size() && !t.empty();
  if (ok) {
    *ok = good;
    return good ? v : 0;
  }
  if (!good) fail_validation("unparseable integer: '" + s + "'");
  return v;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hexd = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hexd[digest[i] >> 4]);
    out.push_back(hexd[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file_hex(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

void atomic_write_file(const std::filesystem::path& p, const std::string& bytes) {
  namespace fs = std::filesystem;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail_runtime("cannot open for write: " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) fail_runtime("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) fail_missing("cannot open file: " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  std::size_t workers = threads <= 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::mutex err_mutex;
  std::exception_ptr first_error;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace pathcast
