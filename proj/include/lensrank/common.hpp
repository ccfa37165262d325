#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace lensrank {

// User-facing failure (bad input, malformed file, invalid request).
// The CLI maps these to exit code 1.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Broken invariant inside the library itself. The CLI maps these to exit code 2.
class internal_error : public std::logic_error {
 public:
  explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

// Shortest decimal form that round-trips a double, locale independent.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw internal_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

// Fixed-point formatting; snprintf with the C locale's '.' is deterministic here
// because the library never calls setlocale.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  if (n < 0 || n >= static_cast<int>(sizeof(buf)))
    throw internal_error("format_fixed: snprintf failed");
  return std::string(buf, static_cast<std::size_t>(n));
}

inline double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw error(context + ": cannot parse number '" + std::string(text) + "'");
  return value;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// SplitMix64: tiny, well-mixed, and stable across platforms, unlike the
// distribution adapters in <random>.
class rng64 {
 public:
  explicit rng64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, bound) via rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw internal_error("rng64::below: zero bound");
    std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

template <typename T>
void deterministic_shuffle(std::vector<T>& items, rng64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

inline unsigned thread_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("LENSRANK_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      return static_cast<unsigned>(std::min<long>(v, hw));
  }
  return hw;
}

// Runs fn(i) for i in [0, n). Results must be written by index so the output
// order never depends on scheduling. The first exception wins and is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned threads = thread_budget();
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex guard;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(guard);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lensrank
