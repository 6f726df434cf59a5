#pragma once

// Bit-cell circuit model (parametric MTJ resistance, alpha-power access
// transistor, load-line operating point) and the Monte-Carlo estimators for
// write, read-decision and read-disturb failure probabilities.
//
// The estimators sample area, transistor width and Vth per trial and treat
// oxide thickness analytically: for each sample the threshold t_MgO at which
// the cell just fails is solved for, and its Gaussian tail probability is
// averaged over samples.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "faecc/error.hpp"
#include "faecc/llgs.hpp"
#include "faecc/parallel.hpp"
#include "faecc/rng.hpp"
#include "faecc/stats.hpp"

namespace faecc::device {

enum class MtjState { P, AP };

struct MtjElectrical {
  double ra_p = 5.0;       // Ohm um^2 at t_ref, parallel state
  double t_ref = 1e-9;     // m
  double kappa = 3.5;      // 1/nm, RA(t) = ra_p exp(kappa (t - t_ref))
  double tmr0 = 1.0;
  double area = std::numbers::pi / 4.0 * 64e-9 * 64e-9;  // m^2
  double t_mgo = 1e-9;     // m
};

inline void validate(const MtjElectrical& m) {
  require(m.ra_p > 0.0 && m.t_ref > 0.0 && m.kappa > 0.0 && m.tmr0 > 0.0 && m.area > 0.0 && m.t_mgo > 0.0,
          "MtjElectrical: all parameters must be positive");
}

inline double resistance(const MtjElectrical& m, MtjState s) {
  const double ra = m.ra_p * std::exp(m.kappa * (m.t_mgo - m.t_ref) * 1e9);
  const double rp = ra / (m.area * 1e12);
  return s == MtjState::P ? rp : rp * (1.0 + m.tmr0);
}

// Oxide thickness at which the cell has resistance r in state s.
inline double thickness_for_resistance(const MtjElectrical& m, MtjState s, double r) {
  const double rp = s == MtjState::P ? r : r / (1.0 + m.tmr0);
  return m.t_ref + std::log(rp * m.area * 1e12 / m.ra_p) / m.kappa * 1e-9;
}

// Alpha-power-law transistor: I_sat = k W (Vgs - Vth)^a,
// Vdsat = kv (Vgs - Vth)^(a/2); I = I_sat (2 - x) x below saturation
// (x = Vds / Vdsat) and I_sat (1 + lambda (Vds - Vdsat)) above.
struct TransistorModel {
  double vth = 0.4;          // V
  double k_gain = 2915.0;    // A / (V^a m)
  double alpha_sat = 1.3;
  double kv = 0.7;           // V^(1 - a/2)
  double width = 100e-9;     // m
  double lambda = 0.1;       // 1/V
};

inline void validate(const TransistorModel& t) {
  require(t.width > 0.0, "TransistorModel: width must be > 0");
  require(t.k_gain > 0.0 && t.alpha_sat >= 1.0 && t.alpha_sat <= 2.0 && t.kv > 0.0 && t.lambda >= 0.0,
          "TransistorModel: need k > 0, 1 <= alpha <= 2, kv > 0, lambda >= 0");
}

inline double drain_current(const TransistorModel& t, double vgs, double vds) {
  const double vov = vgs - t.vth;
  if (vov <= 0.0 || vds <= 0.0) return 0.0;
  const double isat = t.k_gain * t.width * std::pow(vov, t.alpha_sat);
  const double vdsat = t.kv * std::pow(vov, 0.5 * t.alpha_sat);
  if (vds >= vdsat) return isat * (1.0 + t.lambda * (vds - vdsat));
  const double x = vds / vdsat;
  return isat * (2.0 - x) * x;
}

// Vds at which the transistor conducts current i (inverse of drain_current
// in Vds), or +inf if it cannot within vds_max.
inline double vds_for_current(const TransistorModel& t, double vgs, double i, double vds_max) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (i <= 0.0) return 0.0;
  const double vov = vgs - t.vth;
  if (vov <= 0.0) return inf;
  const double isat = t.k_gain * t.width * std::pow(vov, t.alpha_sat);
  const double vdsat = t.kv * std::pow(vov, 0.5 * t.alpha_sat);
  double vds = inf;
  if (i <= isat) {
    const double u = i / isat;
    vds = vdsat * u / (1.0 + std::sqrt(1.0 - u));  // 1 - sqrt(1 - u) without cancellation
  } else if (t.lambda > 0.0) {
    vds = vdsat + (i / isat - 1.0) / t.lambda;
  }
  return vds <= vds_max ? vds : inf;
}

struct OperatingPoint {
  double v_mtj = 0.0;
  double current = 0.0;
};

// Series MTJ and transistor (gate at vgs) across v_bias: solves
// I_D(v_bias - V) = V / R by bisection on V in [0, v_bias].
inline OperatingPoint load_line_operating_point(const TransistorModel& tr, double r_mtj, double v_bias,
                                                double vgs) {
  validate(tr);
  require(r_mtj > 0.0 && v_bias >= 0.0, "load_line_operating_point: need R > 0 and V_bias >= 0");
  auto excess = [&](double v) { return drain_current(tr, vgs, v_bias - v) - v / r_mtj; };  // decreasing in v
  double lo = 0.0, hi = v_bias;
  for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  const double v = 0.5 * (lo + hi);
  return {v, drain_current(tr, vgs, v_bias - v)};
}

inline OperatingPoint load_line_operating_point(const TransistorModel& tr, const MtjElectrical& mtj, MtjState s,
                                                double v_bias, double vgs) {
  validate(mtj);
  return load_line_operating_point(tr, resistance(mtj, s), v_bias, vgs);
}

// ---------------------------------------------------------------------------

struct DeviceMc {
  std::uint64_t seed = 1;
  std::size_t trials = 10000;
  double sigma_fraction = 0.02;  // relative std-dev of area, t_MgO, W and Vth
  unsigned workers = 0;
};

inline void validate(const DeviceMc& mc) {
  require(mc.trials >= 1, "DeviceMc: trials must be >= 1");
  require(mc.sigma_fraction >= 0.0 && mc.sigma_fraction < 0.2, "DeviceMc: sigma_fraction must be in [0, 0.2)");
}

// One sampled bit cell: every quantity except the oxide thickness.
struct CellSample {
  double area;
  double width;
  double vth;
};

inline CellSample sample_cell(const DeviceMc& mc, const MtjElectrical& mtj, const TransistorModel& tr,
                              std::size_t trial) {
  const CounterRng rng(mc.seed);
  auto z = [&](std::uint32_t which) {
    return rng.normal({.trial = static_cast<std::uint32_t>(trial), .bit = which, .lane = kLaneDevice});
  };
  const double s = mc.sigma_fraction;
  return {mtj.area * std::max(0.2, 1.0 + s * z(0)), tr.width * std::max(0.2, 1.0 + s * z(1)),
          tr.vth * (1.0 + s * z(2))};
}

// P(t_MgO > t) for the nominal thickness distribution.
inline double thickness_exceeds(const MtjElectrical& mtj, double sigma_fraction, double t) {
  const double sd = sigma_fraction * mtj.t_mgo;
  if (sd == 0.0) return t < mtj.t_mgo ? 1.0 : 0.0;
  return normal_sf((t - mtj.t_mgo) / sd);
}

inline double thickness_below(const MtjElectrical& mtj, double sigma_fraction, double t) {
  const double sd = sigma_fraction * mtj.t_mgo;
  if (sd == 0.0) return t > mtj.t_mgo ? 1.0 : 0.0;
  return normal_sf((mtj.t_mgo - t) / sd);
}

// Critical current density as a function of free-layer area, tabulated on a
// grid and interpolated linearly. The free layer keeps its anisotropy field,
// so the thermal stability (and the initial angle) scales with area.
class CriticalCurrentTable {
 public:
  CriticalCurrentTable(const LlgsParams& p, double pulse, double area_lo, double area_hi, std::size_t points = 9,
                       const CriticalCurrentOptions& opt = {}) {
    require(points >= 2 && area_hi > area_lo && area_lo > 0.0, "CriticalCurrentTable: bad area grid");
    for (std::size_t i = 0; i < points; ++i) {
      LlgsParams q = p;
      q.area = area_lo + (area_hi - area_lo) * double(i) / double(points - 1);
      area_.push_back(q.area);
      jc_.push_back(critical_current_density(q, pulse, opt));
    }
  }

  double operator()(double area) const {
    if (area <= area_.front()) return jc_.front();
    if (area >= area_.back()) return jc_.back();
    const auto it = std::upper_bound(area_.begin(), area_.end(), area);
    const std::size_t i = static_cast<std::size_t>(it - area_.begin()) - 1;
    const double f = (area - area_[i]) / (area_[i + 1] - area_[i]);
    return jc_[i] + f * (jc_[i + 1] - jc_[i]);
  }

  const std::vector<double>& areas() const { return area_; }
  const std::vector<double>& values() const { return jc_; }

 private:
  std::vector<double> area_;
  std::vector<double> jc_;
};

inline CriticalCurrentTable make_jc_table(const LlgsParams& p, const MtjElectrical& mtj, double pulse,
                                          double sigma_fraction, const CriticalCurrentOptions& opt = {}) {
  const double spread = std::max(6.0 * sigma_fraction, 0.01);
  LlgsParams q = p;
  q.area = mtj.area;
  return CriticalCurrentTable(q, pulse, mtj.area * (1.0 - spread), mtj.area * (1.0 + spread), 9, opt);
}

namespace detail {

inline Estimate average(const DeviceMc& mc, const std::function<double(std::size_t)>& per_sample) {
  std::vector<double> v(mc.trials);
  parallel_for(mc.trials, mc.workers, [&](std::size_t i) { v[i] = per_sample(i); });
  auto e = mean_estimate(v);
  e.lo = std::max(0.0, e.lo);
  e.hi = std::min(1.0, e.hi);
  return e;
}

}  // namespace detail

// Write (P -> AP, gate and bit line at V_dd): a cell fails when its current
// density stays below its critical density, i.e. when its oxide is thicker
// than the largest t_MgO the drive can still push J_c through.
inline Estimate write_failure_probability(const TransistorModel& tr, const MtjElectrical& mtj,
                                          const CriticalCurrentTable& jc, double v_dd, const DeviceMc& mc) {
  validate(tr);
  validate(mtj);
  validate(mc);
  return detail::average(mc, [&](std::size_t i) {
    const auto c = sample_cell(mc, mtj, tr, i);
    TransistorModel t = tr;
    t.width = c.width;
    t.vth = c.vth;
    MtjElectrical m = mtj;
    m.area = c.area;
    const double i_need = jc(c.area) * c.area;
    const double vds = vds_for_current(t, v_dd, i_need, v_dd);
    if (!(vds < v_dd)) return 1.0;
    const double r_max = (v_dd - vds) / i_need;
    return thickness_exceeds(mtj, mc.sigma_fraction, thickness_for_resistance(m, MtjState::P, r_max));
  });
}

inline Estimate write_failure_probability(const TransistorModel& tr, const MtjElectrical& mtj, const LlgsParams& p,
                                          double v_dd, double pulse, const DeviceMc& mc) {
  return write_failure_probability(tr, mtj, make_jc_table(p, mtj, pulse, mc.sigma_fraction), v_dd, mc);
}

struct ReadDecision {
  double probability = 0.0;
  double i_ref = 0.0;
  double i_p = 0.0;   // nominal cell currents
  double i_ap = 0.0;
  std::vector<double> grid;
  std::vector<double> curve;  // failure probability at each grid point
  double refined_probability = 0.0;  // golden-section minimum around the grid optimum
  double refined_i_ref = 0.0;
};

// Golden-section search for the minimum of a unimodal f on [a, b].
template <typename F>
std::pair<double, double> golden_section_minimize(F&& f, double a, double b, double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Failure probability of a sense decision with reference current i_ref:
// 1/2 P(I_P < i_ref) + 1/2 P(I_AP > i_ref).
class ReadDecisionModel {
 public:
  ReadDecisionModel(const TransistorModel& tr, const MtjElectrical& mtj, double v_read, double v_gate,
                    const DeviceMc& mc)
      : tr_(tr), mtj_(mtj), v_read_(v_read), v_gate_(v_gate), mc_(mc) {
    validate(tr);
    validate(mtj);
    validate(mc);
    require(v_read > 0.0, "read_decision_failure: V_read must be > 0");
    for (std::size_t i = 0; i < mc.trials; ++i) samples_.push_back(sample_cell(mc, mtj, tr, i));
    i_p_ = load_line_operating_point(tr, mtj, MtjState::P, v_read, v_gate).current;
    i_ap_ = load_line_operating_point(tr, mtj, MtjState::AP, v_read, v_gate).current;
    if (!(i_p_ > i_ap_)) throw InvalidArgument("read_decision_failure: nominal I_P must exceed I_AP");
  }

  double i_p() const { return i_p_; }
  double i_ap() const { return i_ap_; }

  double operator()(double i_ref) const {
    std::vector<double> v(samples_.size());
    parallel_for(samples_.size(), mc_.workers, [&](std::size_t k) {
      const auto& c = samples_[k];
      TransistorModel t = tr_;
      t.width = c.width;
      t.vth = c.vth;
      MtjElectrical m = mtj_;
      m.area = c.area;
      const double vds = vds_for_current(t, v_gate_, i_ref, v_read_);
      if (!(vds < v_read_)) {
        v[k] = 0.5;  // even R = 0 stays below i_ref: every P cell reads as AP
        return;
      }
      const double r = (v_read_ - vds) / i_ref;  // cell resistance giving exactly i_ref
      const double p_low = thickness_exceeds(mtj_, mc_.sigma_fraction, thickness_for_resistance(m, MtjState::P, r));
      const double ap_high = thickness_below(mtj_, mc_.sigma_fraction, thickness_for_resistance(m, MtjState::AP, r));
      v[k] = 0.5 * p_low + 0.5 * ap_high;
    });
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
  }

 private:
  TransistorModel tr_;
  MtjElectrical mtj_;
  double v_read_, v_gate_;
  DeviceMc mc_;
  std::vector<CellSample> samples_;
  double i_p_ = 0.0, i_ap_ = 0.0;
};

// Linear search for the reference current between the nominal AP and P
// read currents.
inline ReadDecision read_decision_failure(const TransistorModel& tr, const MtjElectrical& mtj, double v_read,
                                          double v_gate, const DeviceMc& mc, std::size_t grid_points = 101) {
  require(grid_points >= 3, "read_decision_failure: need at least 3 grid points");
  const ReadDecisionModel model(tr, mtj, v_read, v_gate, mc);
  ReadDecision out;
  out.i_p = model.i_p();
  out.i_ap = model.i_ap();
  out.probability = 2.0;
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double i_ref = out.i_ap + (out.i_p - out.i_ap) * double(g) / double(grid_points - 1);
    const double f = model(i_ref);
    out.grid.push_back(i_ref);
    out.curve.push_back(f);
    if (f < out.probability) {
      out.probability = f;
      out.i_ref = i_ref;
    }
  }
  const double step = (out.i_p - out.i_ap) / double(grid_points - 1);
  const auto [x, fx] = golden_section_minimize(model, std::max(out.i_ap, out.i_ref - step),
                                               std::min(out.i_p, out.i_ref + step), 1e-4 * step);
  out.refined_i_ref = fx <= out.probability ? x : out.i_ref;
  out.refined_probability = std::min(fx, out.probability);
  return out;
}

// Read disturb: the read current flows in the P -> AP direction, so
// P-state cells with oxide thin enough to pass J_c during the read pulse flip.
inline Estimate disturb_failure_probability(const TransistorModel& tr, const MtjElectrical& mtj,
                                            const CriticalCurrentTable& jc_read, double v_read, double v_gate,
                                            const DeviceMc& mc) {
  validate(tr);
  validate(mtj);
  validate(mc);
  require(v_read >= 0.0, "disturb_failure_probability: V_read must be >= 0");
  return detail::average(mc, [&](std::size_t i) {
    const auto c = sample_cell(mc, mtj, tr, i);
    TransistorModel t = tr;
    t.width = c.width;
    t.vth = c.vth;
    MtjElectrical m = mtj;
    m.area = c.area;
    const double i_need = jc_read(c.area) * c.area;
    const double vds = vds_for_current(t, v_gate, i_need, v_read);
    if (!(vds < v_read)) return 0.0;  // cannot reach J_c even with R = 0
    const double r_min = (v_read - vds) / i_need;
    return thickness_below(mtj, mc.sigma_fraction, thickness_for_resistance(m, MtjState::P, r_min));
  });
}

inline Estimate disturb_failure_probability(const TransistorModel& tr, const MtjElectrical& mtj, const LlgsParams& p,
                                            double v_read, double v_gate, double read_pulse, const DeviceMc& mc) {
  return disturb_failure_probability(tr, mtj, make_jc_table(p, mtj, read_pulse, mc.sigma_fraction), v_read, v_gate,
                                     mc);
}

}  // namespace faecc::device
