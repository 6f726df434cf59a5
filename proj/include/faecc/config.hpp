#pragma once

// INI experiment configuration: [device], [array], [mc] and [sweep]
// sections. Every key has a default; unknown sections and keys are errors.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "faecc/error.hpp"

namespace faecc::explorer {

struct DeviceConfig {
  double ebn = 60.0;
  double ms = 850.0;           // emu/cm^3
  double alpha = 0.028;
  double polarization = 0.5;
  double diameter_nm = 64.0;   // free layer, circular footprint
  double t_fl_nm = 1.0;
  double temperature = 300.0;  // K
  std::string torque = "cubic";
  double dt_ps = 1.0;

  double ra_p = 5.0;           // ohm um^2 at t_mgo_nm
  double kappa = 3.5;          // 1/nm
  double tmr = 1.0;
  double t_mgo_nm = 1.0;

  double vth = 0.4;
  double k_gain = 2915.0;      // A / (V^alpha m)
  double alpha_sat = 1.3;
  double kv = 0.7;
  double lambda = 0.1;

  double v_dd = 1.0;
  double v_gate = 1.0;
  std::vector<double> pulse_ns{6.0, 8.0};
  std::vector<double> v_read_mv{100.0, 200.0};
  double read_pulse_ns = 2.0;
  std::size_t read_grid = 201;
};

struct ArrayConfig {
  std::size_t k = 128;
  int deg = 8;
  std::string scheme = "secded";
  std::uint64_t size = 4194304;  // data bytes
  double fit_target = 1.0;
  double p_defect = 1e-5;
  double ebn = 60.0;             // retention barrier for simulate
  double age_s = 3.15576e7;
  double p_write_fail = 0.0;
  double p_read_flip = 0.0;
  std::string fault_map;
};

struct McSettings {
  std::uint64_t seed = 1;
  std::size_t trials = 10000;
  double sigma = 0.02;
  unsigned workers = 0;
};

struct SweepConfig {
  std::string variable;  // empty: command default
  double start = 0.0;
  double stop = 0.0;
  std::size_t points = 0;
  std::string scale = "linear";
};

struct ExperimentConfig {
  DeviceConfig device;
  ArrayConfig array;
  McSettings mc;
  std::optional<SweepConfig> sweep;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
    throw InvalidArgument("config: " + key + ": cannot parse '" + raw + "'");
  return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, item));
  if (out.empty()) throw InvalidArgument("config: " + key + ": empty list");
  return out;
}

using Setter = std::function<void(const std::string&)>;

template <class T>
Setter num(const std::string& key, T& field) {
  return [key, &field](const std::string& v) { field = parse_number<T>(key, v); };
}

inline Setter text(std::string& field) {
  return [&field](const std::string& v) { field = trim(v); };
}

inline Setter list(const std::string& key, std::vector<double>& field) {
  return [key, &field](const std::string& v) { field = parse_list(key, v); };
}

inline std::map<std::string, Setter> setters(ExperimentConfig& c, SweepConfig& sw) {
  auto& d = c.device;
  auto& a = c.array;
  auto& m = c.mc;
  return {
      {"device.ebn", num("device.ebn", d.ebn)},
      {"device.ms", num("device.ms", d.ms)},
      {"device.alpha", num("device.alpha", d.alpha)},
      {"device.polarization", num("device.polarization", d.polarization)},
      {"device.diameter_nm", num("device.diameter_nm", d.diameter_nm)},
      {"device.t_fl_nm", num("device.t_fl_nm", d.t_fl_nm)},
      {"device.temperature", num("device.temperature", d.temperature)},
      {"device.torque", text(d.torque)},
      {"device.dt_ps", num("device.dt_ps", d.dt_ps)},
      {"device.ra_p", num("device.ra_p", d.ra_p)},
      {"device.kappa", num("device.kappa", d.kappa)},
      {"device.tmr", num("device.tmr", d.tmr)},
      {"device.t_mgo_nm", num("device.t_mgo_nm", d.t_mgo_nm)},
      {"device.vth", num("device.vth", d.vth)},
      {"device.k_gain", num("device.k_gain", d.k_gain)},
      {"device.alpha_sat", num("device.alpha_sat", d.alpha_sat)},
      {"device.kv", num("device.kv", d.kv)},
      {"device.lambda", num("device.lambda", d.lambda)},
      {"device.v_dd", num("device.v_dd", d.v_dd)},
      {"device.v_gate", num("device.v_gate", d.v_gate)},
      {"device.pulse_ns", list("device.pulse_ns", d.pulse_ns)},
      {"device.v_read_mv", list("device.v_read_mv", d.v_read_mv)},
      {"device.read_pulse_ns", num("device.read_pulse_ns", d.read_pulse_ns)},
      {"device.read_grid", num("device.read_grid", d.read_grid)},
      {"array.k", num("array.k", a.k)},
      {"array.deg", num("array.deg", a.deg)},
      {"array.scheme", text(a.scheme)},
      {"array.size", num("array.size", a.size)},
      {"array.fit_target", num("array.fit_target", a.fit_target)},
      {"array.p_defect", num("array.p_defect", a.p_defect)},
      {"array.ebn", num("array.ebn", a.ebn)},
      {"array.age_s", num("array.age_s", a.age_s)},
      {"array.p_write_fail", num("array.p_write_fail", a.p_write_fail)},
      {"array.p_read_flip", num("array.p_read_flip", a.p_read_flip)},
      {"array.fault_map", text(a.fault_map)},
      {"mc.seed", num("mc.seed", m.seed)},
      {"mc.trials", num("mc.trials", m.trials)},
      {"mc.sigma", num("mc.sigma", m.sigma)},
      {"mc.workers", num("mc.workers", m.workers)},
      {"sweep.variable", text(sw.variable)},
      {"sweep.start", num("sweep.start", sw.start)},
      {"sweep.stop", num("sweep.stop", sw.stop)},
      {"sweep.points", num("sweep.points", sw.points)},
      {"sweep.scale", text(sw.scale)},
  };
}

}  // namespace detail

// Applies one "section.key = value" assignment.
inline void set_key(ExperimentConfig& c, const std::string& dotted, const std::string& value) {
  SweepConfig sw = c.sweep.value_or(SweepConfig{});
  auto table = detail::setters(c, sw);
  const auto it = table.find(dotted);
  if (it == table.end()) throw InvalidArgument("config: unknown key '" + dotted + "'");
  it->second(value);
  if (dotted.rfind("sweep.", 0) == 0) c.sweep = sw;
}

inline void validate(const ExperimentConfig& c) {
  const auto& d = c.device;
  require(d.torque == "cubic" || d.torque == "quadratic", "config: device.torque must be cubic or quadratic");
  require(!d.pulse_ns.empty() && !d.v_read_mv.empty(), "config: device.pulse_ns and device.v_read_mv need values");
  for (double p : d.pulse_ns) require(p > 0.0, "config: device.pulse_ns must be positive");
  for (double v : d.v_read_mv) require(v > 0.0, "config: device.v_read_mv must be positive");
  require(d.read_grid >= 3, "config: device.read_grid must be >= 3");
  require(d.dt_ps > 0.0, "config: device.dt_ps must be positive");
  const auto& a = c.array;
  require(a.scheme == "secded" || a.scheme == "dected" || a.scheme == "faecc",
          "config: array.scheme must be secded, dected or faecc");
  require(a.k >= 1 && a.size >= 1 && (a.size * 8) % a.k == 0, "config: array.size * 8 must be a multiple of array.k");
  require(a.deg >= 2 && a.deg <= 16, "config: array.deg must be in [2, 16]");
  require(a.fit_target > 0.0, "config: array.fit_target must be positive");
  require(a.p_defect >= 0.0 && a.p_defect <= 1.0, "config: array.p_defect must be in [0, 1]");
  require(a.age_s >= 0.0, "config: array.age_s must be >= 0");
  require(c.mc.trials >= 1, "config: mc.trials must be >= 1");
  require(c.mc.sigma >= 0.0 && c.mc.sigma < 0.2, "config: mc.sigma must be in [0, 0.2)");
  if (c.sweep) {
    const auto& s = *c.sweep;
    require(!s.variable.empty(), "config: sweep.variable is required when [sweep] is present");
    require(s.points >= 1, "config: sweep.points must be >= 1");
    require(s.scale == "linear" || s.scale == "log", "config: sweep.scale must be linear or log");
    require(s.points == 1 || s.stop >= s.start, "config: sweep.stop must be >= sweep.start");
    require(s.scale == "linear" || s.start > 0.0, "config: log sweep needs sweep.start > 0");
  }
}

inline ExperimentConfig load_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidArgument("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) set_key(c, section + "." + key, value.data());
  }
  validate(c);
  return c;
}

inline std::vector<double> sweep_values(const SweepConfig& s) {
  std::vector<double> out;
  for (std::size_t i = 0; i < s.points; ++i) {
    const double f = s.points == 1 ? 0.0 : double(i) / double(s.points - 1);
    out.push_back(s.scale == "log" ? s.start * std::pow(s.stop / s.start, f) : s.start + (s.stop - s.start) * f);
  }
  return out;
}

}  // namespace faecc::explorer
