#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "faecc/error.hpp"

namespace faecc {

namespace detail {

template <typename F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double eps,
                    int depth, bool& exhausted) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    exhausted = true;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, exhausted) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, exhausted);
}

}  // namespace detail

// Adaptive Simpson on [a, b] to absolute tolerance `abs_tol`. The interval is
// pre-split into `presplit` panels so that narrow features are not missed by
// the first three-point estimate.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 48, int presplit = 16) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / presplit;
  double total = 0.0;
  bool exhausted = false;
  double fa = f(a);
  for (int i = 0; i < presplit; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == presplit) ? b : a + (i + 1) * h;
    const double fm = f(0.5 * (lo + hi));
    const double fb = f(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::simpson_step(f, lo, hi, fa, fm, fb, whole, abs_tol / presplit, max_depth, exhausted);
    fa = fb;
  }
  if (exhausted) throw ConvergenceError("adaptive Simpson: recursion depth exhausted");
  return total;
}

struct QuadratureOptions {
  double rel_tol = 1e-6;
  double tail_tol = 1e-9;
  int max_doublings = 400;
};

// Mean time to failure as the integral of a survival function S(t) over
// [0, inf). The integrand is evaluated in the scaled variable u = t / t_ref
// on panels [0,1], [1,2], [2,4], ... until the remaining tail is below
// tail_tol of the accumulated mass. S must be non-increasing from S(0) <= 1.
template <typename Survival>
double mttf_numeric(Survival&& survival, double t_ref, const QuadratureOptions& opt = {}) {
  require(t_ref > 0.0 && std::isfinite(t_ref), "mttf_numeric: t_ref must be positive and finite");
  auto g = [&](double u) { return survival(u * t_ref); };

  const double s0 = g(0.0);
  require(s0 >= 0.0 && s0 <= 1.0 + 1e-12, "mttf_numeric: survival must start in [0, 1]");

  // Panel tolerances are relative to the panel itself so the summed error
  // stays below rel_tol of the total.
  auto panel = [&](double a, double b, double floor) {
    const double rough = (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
    const double tol = 0.05 * opt.rel_tol * std::max(std::abs(rough), floor);
    if (tol <= 0.0) return 0.0;
    return adaptive_simpson(g, a, b, tol);
  };

  double acc = panel(0.0, 1.0, std::numeric_limits<double>::min());
  double lo = 1.0;
  double s_prev = g(lo);
  if (s_prev > s0 * (1.0 + 1e-9) + 1e-300)
    throw InvalidArgument("mttf_numeric: survival function is increasing on [0, t_ref]");
  for (int k = 0; k < opt.max_doublings; ++k) {
    const double hi = 2.0 * lo;
    const double s_hi = g(hi);
    if (s_hi > s_prev * (1.0 + 1e-9) + 1e-300)
      throw InvalidArgument("mttf_numeric: survival function is increasing at u=" + std::to_string(hi));
    const double seg = panel(lo, hi, opt.tail_tol * acc);
    acc += seg;
    if (!std::isfinite(acc)) throw ConvergenceError("mttf_numeric: integral diverged");
    if (seg <= opt.tail_tol * acc && s_hi * hi <= opt.tail_tol * acc) return acc * t_ref;
    lo = hi;
    s_prev = s_hi;
  }
  throw ConvergenceError("mttf_numeric: survival did not decay within the integration horizon");
}

}  // namespace faecc
