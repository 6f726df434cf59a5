#pragma once

// Macrospin free-layer dynamics: Landau-Lifshitz-Gilbert equation with the
// Slonczewski spin-transfer torque, and critical switching current density.
//
// Units: fields in Oe, Ms in emu/cm^3, gamma in rad/(s Oe), current density
// in A/m^2, lengths in metres, times in seconds.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "faecc/error.hpp"
#include "faecc/quadrature.hpp"
#include "faecc/reliability.hpp"
#include "faecc/rng.hpp"

namespace faecc::device {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return (1.0 / norm(a)) * a; }

inline constexpr double kHbar = 1.054571817e-34;         // J s
inline constexpr double kElectronCharge = 1.602176634e-19;  // C
inline constexpr double kGyromagnetic = 1.76e7;           // rad / (s Oe)

// Angular dependence of the spin-transfer efficiency.
enum class TorqueForm {
  Cubic,      // [-4 + (1+P)^3 (3 + cos) / (4 P^1.5)]^-1
  Quadratic,  // (1+P)^2 numerator
};

struct LlgsParams {
  double ms = 850.0;        // emu/cm^3
  double alpha = 0.028;
  double gamma = kGyromagnetic;
  double polarization = 0.5;
  double t_fl = 1e-9;       // m
  double hk = 1817.0;       // Oe, perpendicular anisotropy field
  Vec3 easy_axis{0.0, 0.0, 1.0};
  Vec3 pinned{0.0, 0.0, 1.0};
  double temperature = 300.0;
  double area = std::numbers::pi / 4.0 * 64e-9 * 64e-9;  // m^2
  TorqueForm torque_form = TorqueForm::Cubic;
};

inline void validate(const LlgsParams& p) {
  require(p.polarization > 0.0 && p.polarization < 1.0, "LlgsParams: P must be in (0, 1)");
  require(p.alpha > 0.0, "LlgsParams: alpha must be > 0");
  require(p.ms > 0.0 && p.t_fl > 0.0 && p.gamma > 0.0 && p.area > 0.0 && p.temperature > 0.0,
          "LlgsParams: Ms, t_FL, gamma, area and T must be positive");
  require(p.hk >= 0.0, "LlgsParams: Hk must be >= 0");
  require(std::abs(norm(p.easy_axis) - 1.0) < 1e-9, "LlgsParams: easy axis must be a unit vector");
  require(std::abs(norm(p.pinned) - 1.0) < 1e-9, "LlgsParams: pinned-layer direction must be a unit vector");
}

inline double volume_cm3(const LlgsParams& p) { return p.area * p.t_fl * 1e6; }

// Thermal stability factor Ms Hk V / (2 k_B T).
inline double thermal_stability(const LlgsParams& p) {
  return p.ms * p.hk * volume_cm3(p) / (2.0 * reliability::kBoltzmannErgPerK * p.temperature);
}

// Copy of p with Hk chosen to give the requested thermal stability factor.
inline LlgsParams with_thermal_stability(LlgsParams p, double ebn) {
  require(ebn > 0.0, "with_thermal_stability: ebn must be > 0");
  p.hk = 2.0 * ebn * reliability::kBoltzmannErgPerK * p.temperature / (p.ms * volume_cm3(p));
  return p;
}

inline double torque_efficiency(double cos_theta, double polarization, TorqueForm form) {
  const double pw = form == TorqueForm::Cubic ? 3.0 : 2.0;
  const double denom = -4.0 + std::pow(1.0 + polarization, pw) * (3.0 + cos_theta) / (4.0 * std::pow(polarization, 1.5));
  return 1.0 / denom;
}

// Spin-torque field a_J in Oe for current density j (A/m^2), without g.
inline double spin_torque_field(const LlgsParams& p, double j) {
  const double ms_si = p.ms * 1e3;  // A/m
  return 1e4 * kHbar * j / (2.0 * kElectronCharge * ms_si * p.t_fl);
}

inline Vec3 effective_field(const LlgsParams& p, const Vec3& m) { return (p.hk * dot(m, p.easy_axis)) * p.easy_axis; }

// Anisotropy energy density normalised by Ms: -Hk (m.e)^2 / 2.
inline double energy(const LlgsParams& p, const Vec3& m) {
  const double c = dot(m, p.easy_axis);
  return -0.5 * p.hk * c * c;
}

// dm/dt solved for the implicit Gilbert term:
// (1 + alpha^2) dm/dt = T + alpha m x T,
// T = gamma (H x m) + gamma a_J g(theta) m x (m x p).
inline Vec3 llgs_rhs(const LlgsParams& p, const Vec3& m, double j) {
  const Vec3 h = effective_field(p, m);
  Vec3 torque = p.gamma * cross(h, m);
  if (j != 0.0) {
    const double g = torque_efficiency(dot(m, p.pinned), p.polarization, p.torque_form);
    torque = torque + (p.gamma * spin_torque_field(p, j) * g) * cross(m, cross(m, p.pinned));
  }
  return (1.0 / (1.0 + p.alpha * p.alpha)) * (torque + p.alpha * cross(m, torque));
}

struct SimulateOptions {
  double dt = 1e-12;
  std::size_t sample_every = 10;  // steps between emitted samples; 0 = final state only
  std::optional<double> stop_below;  // stop once m.easy_axis drops below this
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec3> m;
  double max_norm_drift = 0.0;  // largest | |m| - 1 | before renormalisation
  bool stopped_early = false;

  const Vec3& final_state() const { return m.back(); }
};

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t_ns,mx,my,mz\n";
  char buf[128];
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9e,%.9e,%.9e,%.9e\n", tr.t[i] * 1e9, tr.m[i][0], tr.m[i][1], tr.m[i][2]);
    os << buf;
  }
}

// Classical RK4 with renormalisation after every step.
inline Trajectory llgs_simulate(const LlgsParams& p, const Vec3& m0, double j, double duration,
                                const SimulateOptions& opt = {}) {
  validate(p);
  require(std::abs(norm(m0) - 1.0) < 1e-9, "llgs_simulate: m0 must be a unit vector");
  require(opt.dt > 0.0 && duration >= 0.0, "llgs_simulate: need dt > 0 and duration >= 0");
  const auto steps = static_cast<std::size_t>(std::ceil(duration / opt.dt - 1e-9));
  Trajectory tr;
  Vec3 m = m0;
  tr.t.push_back(0.0);
  tr.m.push_back(m);
  double t = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double h = std::min(opt.dt, duration - t);
    const Vec3 k1 = llgs_rhs(p, m, j);
    const Vec3 k2 = llgs_rhs(p, m + (0.5 * h) * k1, j);
    const Vec3 k3 = llgs_rhs(p, m + (0.5 * h) * k2, j);
    const Vec3 k4 = llgs_rhs(p, m + h * k3, j);
    const Vec3 next = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double drift = std::abs(norm(next) - 1.0);
    if (!std::isfinite(drift) || drift > 1e-3)
      throw ConvergenceError("llgs_simulate: norm drift " + std::to_string(drift) + " at t=" + std::to_string(t) +
                             " s, reduce the step size");
    tr.max_norm_drift = std::max(tr.max_norm_drift, drift);
    m = normalized(next);
    t = i == steps ? duration : t + h;
    const bool stop = opt.stop_below && dot(m, p.easy_axis) < *opt.stop_below;
    if (stop || i == steps || (opt.sample_every && i % opt.sample_every == 0)) {
      tr.t.push_back(t);
      tr.m.push_back(m);
    }
    if (stop) {
      tr.stopped_early = true;
      break;
    }
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Thermal initial angle: density proportional to sin(theta) exp(-ebn sin^2 theta)
// on [0, pi/2].

inline double initial_angle_cdf(double theta, double ebn) {
  // Substituting u = cos(theta): integrand exp(-ebn (1 - u^2)) on [cos theta, 1].
  auto f = [ebn](double u) { return std::exp(-ebn * (1.0 - u * u)); };
  const double total = adaptive_simpson(f, 0.0, 1.0, 1e-14);
  return adaptive_simpson(f, std::cos(theta), 1.0, 1e-14) / total;
}

inline double initial_angle_quantile(double q, double ebn) {
  require(q > 0.0 && q < 1.0, "initial_angle_quantile: q must be in (0, 1)");
  require(ebn > 0.0, "initial_angle_quantile: ebn must be > 0");
  double lo = 0.0, hi = std::numbers::pi / 2.0;
  for (int i = 0; i < 100 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (initial_angle_cdf(mid, ebn) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double median_initial_angle(double ebn) { return initial_angle_quantile(0.5, ebn); }

inline double sample_initial_angle(const CounterRng& rng, const DrawKey& key, double ebn) {
  return initial_angle_quantile(rng.uniform(key), ebn);
}

// Unit vector at polar angle theta from axis e.
inline Vec3 tilted(const Vec3& e, double theta) {
  const Vec3 ref = std::abs(e[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const Vec3 u = normalized(cross(e, ref));
  return normalized(std::cos(theta) * e + std::sin(theta) * u);
}

// ---------------------------------------------------------------------------

struct CriticalCurrentOptions {
  double rel_tol = 0.01;
  double j_start = 1e10;  // A/m^2, first bracket top
  double j_max = 1e14;
  double switch_threshold = -0.9;
  double dt = 1e-12;
  std::optional<double> initial_angle;  // default: median thermal angle
};

// Whether current density j switches the free layer from the easy axis to
// its opposite within the pulse.
inline bool switches(const LlgsParams& p, double j, double pulse, double theta0, const CriticalCurrentOptions& opt) {
  const auto tr = llgs_simulate(p, tilted(p.easy_axis, theta0), j, pulse,
                                {.dt = opt.dt, .sample_every = 0, .stop_below = opt.switch_threshold});
  return dot(tr.final_state(), p.easy_axis) < opt.switch_threshold;
}

// Smallest current density (within rel_tol) that switches the free layer
// within pulse_width, starting from the thermal initial angle.
inline double critical_current_density(const LlgsParams& p, double pulse_width,
                                       const CriticalCurrentOptions& opt = {}) {
  validate(p);
  require(pulse_width > 0.0, "critical_current_density: pulse width must be > 0");
  const double theta0 = opt.initial_angle ? *opt.initial_angle : median_initial_angle(thermal_stability(p));
  double lo = 0.0, hi = opt.j_start;
  while (!switches(p, hi, pulse_width, theta0, opt)) {
    lo = hi;
    hi *= 2.0;
    if (hi > opt.j_max)
      throw ConvergenceError("critical_current_density: no switching at J = " + std::to_string(opt.j_max) + " A/m^2");
  }
  while ((hi - lo) > opt.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (switches(p, mid, pulse_width, theta0, opt) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace faecc::device
