#pragma once

// Experiments behind the command-line explorer. Each command writes CSV to
// an ostream and returns its exit status.

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "faecc/array_mc.hpp"
#include "faecc/config.hpp"
#include "faecc/device.hpp"
#include "faecc/reliability.hpp"

namespace faecc::explorer {

namespace rel = faecc::reliability;

enum ExitCode : int { kOk = 0, kValidation = 1, kVerification = 2 };

inline std::string sci(double x) { return fmt::format("{:.9e}", x); }

inline ecc::Mode parse_mode(const std::string& s) {
  if (s == "secded") return ecc::Mode::SECDED;
  if (s == "dected") return ecc::Mode::DECTED;
  if (s == "faecc") return ecc::Mode::FAECC;
  throw InvalidArgument("unknown ECC mode '" + s + "'");
}

// Soft errors a code of the given mode corrects.
inline std::uint64_t soft_capability(ecc::Mode m) { return m == ecc::Mode::DECTED ? 2 : 1; }

// Word length of a t-error-correcting BCH code plus overall parity, or the
// bare data word for t = 0.
inline std::uint64_t stored_bits(std::uint64_t k, int deg, std::uint64_t t) {
  return t == 0 ? k : k + std::uint64_t(deg) * t + 1;
}

inline std::uint64_t words(const ArrayConfig& a) { return a.size * 8 / a.k; }

// Sweep values: the configured sweep when it names `variable`, otherwise
// the command default.
inline std::vector<double> sweep_or(const ExperimentConfig& c, const std::string& variable, SweepConfig fallback) {
  if (!c.sweep) return sweep_values(fallback);
  if (c.sweep->variable != variable)
    throw InvalidArgument("sweep.variable '" + c.sweep->variable + "' does not apply; this command sweeps '" +
                          variable + "'");
  return sweep_values(*c.sweep);
}

inline std::vector<std::uint64_t> integer_sweep(const std::vector<double>& v, const std::string& what) {
  std::vector<std::uint64_t> out;
  for (double x : v) {
    require(x >= 0.0 && std::isfinite(x), what + " sweep values must be non-negative");
    out.push_back(static_cast<std::uint64_t>(std::llround(x)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Retention analytics

inline int cmd_ebn_curve(const ExperimentConfig& c, std::ostream& out) {
  const auto bits = integer_sweep(sweep_or(c, "bits", {"bits", 1.0, 536870912.0, 30, "log"}), "bits");
  out << "bits,required_ebn\n";
  for (std::uint64_t b : bits) {
    require(b >= 1, "bits must be >= 1");
    const rel::ArraySpec a{.k = 1, .n = 1, .s = b, .m = 0, .fit_target = c.array.fit_target};
    std::string value;
    try {
      value = sci(rel::required_ebn(a, rel::HardFaultProfile::healthy(b)).barrier.ebn);
    } catch (const ConvergenceError&) {
      value = "unattainable";
    }
    out << b << ',' << value << '\n';
  }
  return kOk;
}

inline rel::ArraySpec ecc_array(const ArrayConfig& a, std::uint64_t m) {
  return {.k = a.k, .n = stored_bits(a.k, a.deg, m), .s = words(a), .m = m, .fit_target = a.fit_target};
}

inline int cmd_ebn_ecc(const ExperimentConfig& c, std::ostream& out) {
  const auto ms = integer_sweep(sweep_or(c, "m", {"m", 0.0, 4.0, 5, "linear"}), "m");
  out << "m,required_ebn\n";
  for (std::uint64_t m : ms) {
    const auto a = ecc_array(c.array, m);
    out << m << ',' << sci(rel::required_ebn(a, rel::HardFaultProfile::healthy(a.s)).barrier.ebn) << '\n';
  }
  return kOk;
}

inline int cmd_ebn_penalty(const ExperimentConfig& c, std::ostream& out) {
  const auto ms = integer_sweep(sweep_or(c, "m", {"m", 1.0, 4.0, 4, "linear"}), "m");
  out << "m,percent_increase\n";
  for (std::uint64_t m : ms) {
    const auto a = ecc_array(c.array, m);
    const double healthy = rel::required_ebn(a, rel::HardFaultProfile::healthy(a.s)).barrier.ebn;
    const double degraded = rel::required_ebn(a, rel::expected_fault_histogram(c.array.p_defect, a)).barrier.ebn;
    out << m << ',' << sci(100.0 * (degraded - healthy) / healthy) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Codec

struct CodecTarget {
  int deg;
  std::size_t k;
  ecc::Mode mode;
};

// The small codes on which every cell of the capability table is checked
// exhaustively.
inline std::vector<CodecTarget> default_codec_targets() {
  return {{4, 11, ecc::Mode::SECDED}, {4, 11, ecc::Mode::FAECC}, {4, 5, ecc::Mode::DECTED}};
}

inline int cmd_codec_verify(const std::vector<CodecTarget>& targets, std::ostream& out) {
  out << "mode,deg,k,n,error_class,expected,realized,result\n";
  bool ok = true;
  for (const auto& t : targets) {
    const auto scheme = ecc::build_scheme(t.deg, t.k, t.mode);
    for (const auto& row : sim::capability_table(scheme, sim::capability_data_words(t.k))) {
      ok &= row.pass;
      out << ecc::to_string(t.mode) << ',' << t.deg << ',' << t.k << ',' << scheme.n() << ",\"" << row.label
          << "\"," << (row.expected ? "yes" : "no") << ',' << (row.corrected ? "yes" : "no") << ','
          << (row.pass ? "PASS" : "FAIL") << '\n';
    }
  }
  return ok ? kOk : kVerification;
}

// ---------------------------------------------------------------------------
// Device

struct DeviceModel {
  device::LlgsParams llgs;
  device::MtjElectrical mtj;
  device::TransistorModel transistor;
  device::DeviceMc mc;
  device::CriticalCurrentOptions jc;
};

inline DeviceModel device_model(const ExperimentConfig& c) {
  const auto& d = c.device;
  DeviceModel m;
  const double area = std::numbers::pi / 4.0 * d.diameter_nm * d.diameter_nm * 1e-18;
  m.llgs.ms = d.ms;
  m.llgs.alpha = d.alpha;
  m.llgs.polarization = d.polarization;
  m.llgs.t_fl = d.t_fl_nm * 1e-9;
  m.llgs.temperature = d.temperature;
  m.llgs.area = area;
  m.llgs.torque_form = d.torque == "quadratic" ? device::TorqueForm::Quadratic : device::TorqueForm::Cubic;
  m.llgs = device::with_thermal_stability(m.llgs, d.ebn);
  m.mtj = {.ra_p = d.ra_p, .t_ref = d.t_mgo_nm * 1e-9, .kappa = d.kappa, .tmr0 = d.tmr, .area = area,
           .t_mgo = d.t_mgo_nm * 1e-9};
  m.transistor = {.vth = d.vth, .k_gain = d.k_gain, .alpha_sat = d.alpha_sat, .kv = d.kv, .lambda = d.lambda};
  m.mc = {.seed = c.mc.seed, .trials = c.mc.trials, .sigma_fraction = c.mc.sigma, .workers = c.mc.workers};
  m.jc.dt = d.dt_ps * 1e-12;
  return m;
}

inline int cmd_device_sweep(const ExperimentConfig& c, std::ostream& out) {
  const auto widths = sweep_or(c, "W_nm", {"W_nm", 180.0, 320.0, 8, "linear"});
  const auto m = device_model(c);
  std::vector<double> pulses = c.device.pulse_ns, reads = c.device.v_read_mv;
  std::sort(pulses.begin(), pulses.end());
  std::sort(reads.begin(), reads.end());
  std::map<double, device::CriticalCurrentTable> write_jc;
  for (double p : pulses) write_jc.emplace(p, device::make_jc_table(m.llgs, m.mtj, p * 1e-9, m.mc.sigma_fraction, m.jc));
  const auto read_jc = device::make_jc_table(m.llgs, m.mtj, c.device.read_pulse_ns * 1e-9, m.mc.sigma_fraction, m.jc);

  std::vector<double> sorted = widths;
  std::sort(sorted.begin(), sorted.end());
  out << "W_nm,pulse_ns,V_read_mV,p_write_fail,p_read_decision,p_disturb\n";
  for (double w : sorted) {
    require(w > 0.0, "W_nm must be positive");
    auto tr = m.transistor;
    tr.width = w * 1e-9;
    std::map<double, double> write, decision, disturb;
    for (double p : pulses) write[p] = device::write_failure_probability(tr, m.mtj, write_jc.at(p), c.device.v_dd, m.mc).value;
    for (double v : reads) {
      decision[v] = device::read_decision_failure(tr, m.mtj, v * 1e-3, c.device.v_gate, m.mc, c.device.read_grid)
                        .refined_probability;
      disturb[v] = device::disturb_failure_probability(tr, m.mtj, read_jc, v * 1e-3, c.device.v_gate, m.mc).value;
    }
    for (double p : pulses)
      for (double v : reads)
        out << sci(w) << ',' << sci(p) << ',' << sci(v) << ',' << sci(write[p]) << ',' << sci(decision[v]) << ','
            << sci(disturb[v]) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Array simulation

struct SimulateReport {
  std::map<ecc::DecodeStatus, std::size_t> outcomes;
  std::size_t probes = 0;
  std::size_t wrong_data = 0;
  std::size_t write_failures = 0;
  sim::FitEstimate fit;
  double analytic_fit = std::numeric_limits<double>::quiet_NaN();
  sim::YieldEstimate yield;
};

inline SimulateReport run_simulation(const ExperimentConfig& c) {
  const auto& a = c.array;
  const auto mode = parse_mode(a.scheme);
  const auto scheme = ecc::build_scheme(a.deg, a.k, mode);
  const rel::ArraySpec spec{.k = a.k, .n = scheme.n(), .s = words(a), .m = soft_capability(mode),
                            .fit_target = a.fit_target};
  sim::FaultMap faults;
  if (!a.fault_map.empty()) {
    std::ifstream in(a.fault_map);
    if (!in) throw InvalidArgument("cannot open fault map '" + a.fault_map + "'");
    faults = sim::read_fault_map(in);
  }
  const sim::McConfig mc{.seed = c.mc.seed, .trials = c.mc.trials, .sigma_fraction = c.mc.sigma,
                         .workers = c.mc.workers};
  const sim::ErrorModel errors{.p_write_fail = a.p_write_fail, .p_read_flip = a.p_read_flip};
  auto arr = sim::build_array(spec, scheme, a.ebn, mc, {.p_defect = a.p_defect, .faults = faults, .errors = errors});

  SimulateReport r;
  const CounterRng rng(c.mc.seed);
  std::vector<ecc::Bits> data(spec.s, ecc::Bits(spec.k));
  for (std::size_t w = 0; w < spec.s; ++w) {
    for (std::size_t b = 0; b < spec.k; ++b)
      data[w][b] = rng.bits({.word = std::uint32_t(w), .bit = std::uint32_t(b), .lane = kLaneData})[0] & 1u;
    r.write_failures += arr.write_word(w, data[w], 0.0).failed_cells;
  }
  for (std::size_t w = 0; w < spec.s; ++w) {
    const auto rd = arr.read_word(w, a.age_s);
    ++r.outcomes[rd.outcome];
    r.probes += rd.probe_used;
    const bool claimed = rd.outcome != ecc::DecodeStatus::Uncorrectable && rd.outcome != ecc::DecodeStatus::DoubleDetected;
    if (claimed && rd.data != data[w]) ++r.wrong_data;
  }

  const sim::FitExperiment e{.spec = spec, .mode = mode, .ebn = a.ebn, .p_defect = a.p_defect, .faults = faults};
  r.fit = sim::measure_fit(e, std::numeric_limits<double>::infinity(), mc);
  // The closed form covers healthy arrays and per-word hard-fault profiles
  // without erasure help.
  if (faults.empty() && c.mc.sigma == 0.0 && (a.p_defect == 0.0 || mode != ecc::Mode::FAECC)) {
    const auto profile = rel::expected_fault_histogram(a.p_defect, spec);
    r.analytic_fit = rel::kFitDeviceHours /
                     (rel::array_mttf_seconds({a.ebn}, spec, profile) / rel::kSecondsPerHour);
  }
  r.yield = sim::measure_yield(spec, scheme, a.p_defect, mc);
  return r;
}

inline int cmd_simulate(const ExperimentConfig& c, std::ostream& out) {
  const auto r = run_simulation(c);
  out << "metric,value,lo,hi\n";
  for (auto s : {ecc::DecodeStatus::Clean, ecc::DecodeStatus::CorrectedSingle, ecc::DecodeStatus::CorrectedDouble,
                 ecc::DecodeStatus::DoubleDetected, ecc::DecodeStatus::Uncorrectable}) {
    const auto it = r.outcomes.find(s);
    out << "reads_" << ecc::to_string(s) << ',' << (it == r.outcomes.end() ? 0 : it->second) << ",,\n";
  }
  out << "probe_reads," << r.probes << ",,\n";
  out << "silent_corruptions," << r.wrong_data << ",,\n";
  out << "write_failed_cells," << r.write_failures << ",,\n";
  out << "fit," << sci(r.fit.fit.value) << ',' << sci(r.fit.fit.lo) << ',' << sci(r.fit.fit.hi) << '\n';
  out << "fit_failures," << r.fit.failures << ",," << '\n';
  out << "fit_analytic," << (std::isnan(r.analytic_fit) ? std::string("n/a") : sci(r.analytic_fit)) << ",,\n";
  out << "yield," << sci(r.yield.yield.value) << ',' << sci(r.yield.yield.lo) << ',' << sci(r.yield.yield.hi)
      << '\n';
  out << "yield_analytic," << sci(r.yield.analytic) << ",,\n";
  return kOk;
}

}  // namespace faecc::explorer
