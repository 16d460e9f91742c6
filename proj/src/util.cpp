#include "divbound/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "divbound/errors.hpp"

namespace divbound {

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw ParseError("bad grid: need finite lo <= hi and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  out.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  const auto p1 = text.find(':');
  const auto p2 = text.find(':', p1 == std::string::npos ? p1 : p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos) {
    throw ParseError("grid must be lo:hi:step, got '" + text + "'");
  }
  try {
    const double lo = std::stod(text.substr(0, p1));
    const double hi = std::stod(text.substr(p1 + 1, p2 - p1 - 1));
    const double step = std::stod(text.substr(p2 + 1));
    return make_grid(lo, hi, step);
  } catch (const std::invalid_argument&) {
    throw ParseError("grid must be lo:hi:step, got '" + text + "'");
  }
}

std::string fmt_g12(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // collapse negative zero
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string fmt_g12(ExtReal x) {
  if (x.is_pos_inf()) return "inf";
  if (x.is_neg_inf()) return "-inf";
  return fmt_g12(x.value());
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::size_t thread_budget() {
  if (const char* env = std::getenv("DIVBOUND_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min(thread_budget(), n == 0 ? std::size_t{1} : n);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace divbound
