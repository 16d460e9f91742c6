#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "divbound/ext_real.hpp"

namespace divbound {

// Parses "lo:hi:step" into an inclusive grid. hi is snapped to the last full
// step so that row counts are reproducible across platforms.
std::vector<double> parse_grid(const std::string& text);

// Builds the same inclusive grid programmatically.
std::vector<double> make_grid(double lo, double hi, double step);

// Numbers are printed with 12 significant digits; infinities as "inf"/"-inf".
std::string fmt_g12(double x);
std::string fmt_g12(ExtReal x);

// FNV-1a over a string, rendered as fixed-width hex.
std::string fnv1a_hex(const std::string& data);

// Runs fn(i) for i in [0, n). Parallel when the DIVBOUND_THREADS environment
// variable (or hardware concurrency) allows; callers write results by index so
// output ordering is deterministic regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Deterministic RNG wrapper used by randomized checks.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace divbound
