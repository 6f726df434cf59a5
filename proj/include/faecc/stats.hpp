#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

namespace faecc {

// Point estimate with a symmetric-or-not 95% interval.
struct Estimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

inline constexpr double kZ95 = 1.959963984540054;

// Wald interval on a binomial proportion, widened to the Wilson interval
// when the count is near 0 or n.
inline Estimate binomial_estimate(std::size_t successes, std::size_t n) {
  Estimate e;
  e.samples = n;
  if (n == 0) return e;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  e.value = p;
  e.stderr_ = std::sqrt(p * (1.0 - p) / nn);
  const double z2 = kZ95 * kZ95;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = kZ95 * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  e.lo = std::max(0.0, centre - half);
  e.hi = std::min(1.0, centre + half);
  return e;
}

// Sample mean with a CLT interval.
inline Estimate mean_estimate(std::span<const double> xs) {
  Estimate e;
  e.samples = xs.size();
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  e.value = mean;
  e.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
  e.lo = mean - kZ95 * e.stderr_;
  e.hi = mean + kZ95 * e.stderr_;
  return e;
}

// Upper tail of the standard normal, accurate far into the tail.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace faecc
