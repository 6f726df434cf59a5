#pragma once

// Fault-injecting STT-MRAM array with an explicit simulated clock.
//
// Every cell carries its own retention lifetime. A write pre-samples the time
// at which the stored bit will flip, so reads only observe; the flip is made
// persistent (once) by the first read that sees it. Stuck cells always read
// their stuck value.

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "faecc/ecc.hpp"
#include "faecc/error.hpp"
#include "faecc/reliability.hpp"
#include "faecc/rng.hpp"

namespace faecc::sim {

using ecc::Bits;
using ecc::DecodeStatus;
using reliability::ArraySpec;

enum class Stuck : std::uint8_t { None, Stuck0, Stuck1 };

struct CellState {
  std::uint8_t value = 0;
  Stuck stuck = Stuck::None;
  double t_life = 1.0;
  double last_write = 0.0;
  double flip_time = std::numeric_limits<double>::infinity();
};

struct ErrorModel {
  double p_write_fail = 0.0;
  double p_read_flip = 0.0;
  bool retention = true;
  bool noisy_probe = false;  // apply p_write_fail / p_read_flip inside the FaECC probe too
};

inline void validate(const ErrorModel& e) {
  require(e.p_write_fail >= 0.0 && e.p_write_fail <= 1.0, "ErrorModel: p_write_fail must be in [0,1]");
  require(e.p_read_flip >= 0.0 && e.p_read_flip <= 1.0, "ErrorModel: p_read_flip must be in [0,1]");
}

struct McConfig {
  std::uint64_t seed = 1;
  std::size_t trials = 1000;
  double sigma_fraction = 0.0;
  unsigned workers = 0;  // 0 = hardware concurrency
};

inline void validate(const McConfig& mc) {
  require(mc.trials >= 1, "McConfig: trials must be >= 1");
  require(mc.sigma_fraction >= 0.0 && std::isfinite(mc.sigma_fraction), "McConfig: sigma_fraction must be >= 0");
}

// ---------------------------------------------------------------------------
// Fault maps: text lines `word_index bit_index {0|1}`; '#' starts a comment.

struct StuckFault {
  std::size_t word = 0;
  std::size_t bit = 0;
  std::uint8_t value = 0;

  bool operator==(const StuckFault&) const = default;
};

using FaultMap = std::vector<StuckFault>;

inline FaultMap read_fault_map(std::istream& in) {
  FaultMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long w = 0, b = 0, v = 0;
    if (!(ls >> w)) continue;
    std::string rest;
    if (!(ls >> b >> v) || (ls >> rest) || w < 0 || b < 0 || (v != 0 && v != 1))
      throw InvalidArgument("fault map line " + std::to_string(lineno) + ": expected `word bit {0|1}`");
    out.push_back({static_cast<std::size_t>(w), static_cast<std::size_t>(b), static_cast<std::uint8_t>(v)});
  }
  return out;
}

inline void write_fault_map(std::ostream& os, const FaultMap& faults) {
  for (const auto& f : faults) os << f.word << ' ' << f.bit << ' ' << int(f.value) << '\n';
}

// ---------------------------------------------------------------------------

struct ReadResult {
  Bits data;
  DecodeStatus outcome = DecodeStatus::Clean;
  bool probe_used = false;
};

struct WriteResult {
  std::size_t failed_cells = 0;  // cells that kept their previous value
};

struct BuildOptions {
  double p_defect = 0.0;
  FaultMap faults;
  ErrorModel errors;
  std::uint32_t trial = 0;  // RNG stream of this array within an experiment
};

// Largest grid we are willing to allocate.
inline constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 25;

class SimArray {
 public:
  SimArray(const ArraySpec& spec, ecc::EccScheme scheme, const ErrorModel& errors, std::uint64_t seed,
           std::uint32_t trial)
      : spec_(spec), scheme_(std::move(scheme)), errors_(errors), rng_(seed), trial_(trial) {
    reliability::validate(spec_);
    validate(errors_);
    require(spec_.k == scheme_.k() && spec_.n == scheme_.n(), "SimArray: spec (k, n) does not match the ECC scheme");
    if (spec_.s > kMaxCells / spec_.n)
      throw InvalidArgument("SimArray: " + std::to_string(spec_.s) + " x " + std::to_string(spec_.n) +
                            " cells exceeds the simulator limit of " + std::to_string(kMaxCells));
    cells_.resize(spec_.s * spec_.n);
    ops_.assign(spec_.s, 0);
  }

  const ArraySpec& spec() const { return spec_; }
  const ecc::EccScheme& scheme() const { return scheme_; }
  const ErrorModel& errors() const { return errors_; }
  double clock() const { return clock_; }
  std::size_t words() const { return spec_.s; }
  std::size_t word_bits() const { return spec_.n; }

  CellState& cell(std::size_t word, std::size_t bit) { return cells_.at(index(word, bit)); }
  const CellState& cell(std::size_t word, std::size_t bit) const { return cells_.at(index(word, bit)); }

  void set_trace(std::ostream* os) {
    trace_ = os;
    if (trace_) *trace_ << "t,addr,op,outcome,probe_used\n";
  }

  void inject_stuck(std::size_t word, std::size_t bit, std::uint8_t value) {
    cell(word, bit).stuck = value ? Stuck::Stuck1 : Stuck::Stuck0;
  }

  // Flips the stored value of a cell now, as a retention event would.
  void inject_flip(std::size_t word, std::size_t bit) { cell(word, bit).value ^= 1u; }

  std::vector<std::size_t> stuck_positions(std::size_t word) const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < spec_.n; ++b)
      if (cell(word, b).stuck != Stuck::None) out.push_back(b);
    return out;
  }

  WriteResult write_word(std::size_t addr, std::span<const std::uint8_t> data, double t_now) {
    const Bits cw = ecc::encode(scheme_, data);
    advance(addr, t_now);
    const auto r = store(addr, cw, t_now, errors_.p_write_fail);
    log(t_now, addr, "write", r.failed_cells ? "partial" : "ok", false);
    return r;
  }

  // Stores n raw bits without encoding.
  WriteResult write_raw(std::size_t addr, std::span<const std::uint8_t> cw, double t_now) {
    require(cw.size() == spec_.n, "write_raw: codeword length mismatch");
    advance(addr, t_now);
    return store(addr, cw, t_now, errors_.p_write_fail);
  }

  Bits raw_read(std::size_t addr, double t_now) {
    advance(addr, t_now);
    return sense(addr, t_now, errors_.p_read_flip);
  }

  // Read, SECDED decode, and on a double-error syndrome
  // invert-rewrite-read to locate stuck cells and pick the candidate pair.
  ReadResult faecc_read(std::size_t addr, double t_now) {
    require(scheme_.mode() == ecc::Mode::FAECC, "faecc_read: scheme mode must be FAECC");
    advance(addr, t_now);
    const Bits r1 = sense(addr, t_now, errors_.p_read_flip);
    auto out = ecc::decode_secded(scheme_, r1);
    bool probe = false;
    if (out.status == DecodeStatus::DoubleDetected) {
      probe = true;
      const double pw = errors_.noisy_probe ? errors_.p_write_fail : 0.0;
      const double pr = errors_.noisy_probe ? errors_.p_read_flip : 0.0;
      Bits inverted(r1.size());
      for (std::size_t i = 0; i < r1.size(); ++i) inverted[i] = r1[i] ^ 1u;
      store(addr, inverted, t_now, pw);
      const Bits r2 = sense(addr, t_now, pr);
      const auto stuck = ecc::locate_stuck_bits(r1, r2);
      out = ecc::resolve_double_with_erasure(scheme_, r1, stuck);
      store(addr, out.recovered() ? out.codeword : r1, t_now, pw);
    } else if (out.status == DecodeStatus::CorrectedSingle) {
      store(addr, out.codeword, t_now, errors_.p_write_fail);
    }
    return finish(t_now, addr, std::move(out), probe);
  }

  // Mode-dispatching read. SECDED and DECTED lines are scrubbed after a
  // successful correction.
  ReadResult read_word(std::size_t addr, double t_now) {
    if (scheme_.mode() == ecc::Mode::FAECC) return faecc_read(addr, t_now);
    advance(addr, t_now);
    const Bits r = sense(addr, t_now, errors_.p_read_flip);
    auto out = ecc::decode(scheme_, r);
    if (out.status == DecodeStatus::CorrectedSingle || out.status == DecodeStatus::CorrectedDouble)
      store(addr, out.codeword, t_now, errors_.p_write_fail);
    return finish(t_now, addr, std::move(out), false);
  }

 private:
  std::size_t index(std::size_t word, std::size_t bit) const {
    if (word >= spec_.s || bit >= spec_.n)
      throw OutOfRange("SimArray: address (" + std::to_string(word) + ", " + std::to_string(bit) + ") out of range");
    return word * spec_.n + bit;
  }

  void advance(std::size_t addr, double t_now) {
    if (addr >= spec_.s) throw OutOfRange("SimArray: word address " + std::to_string(addr) + " out of range");
    if (!(t_now >= clock_)) throw InvalidArgument("SimArray: time " + std::to_string(t_now) + " precedes clock");
    clock_ = t_now;
  }

  DrawKey key(std::size_t addr, std::size_t bit, Lane lane) const {
    return {.trial = trial_,
            .word = static_cast<std::uint32_t>(addr),
            .bit = static_cast<std::uint32_t>(bit),
            .event = ops_[addr],
            .lane = lane};
  }

  static void settle(CellState& c, double t_now) {
    if (c.flip_time <= t_now) {
      c.value ^= 1u;
      c.flip_time = std::numeric_limits<double>::infinity();
    }
  }

  WriteResult store(std::size_t addr, std::span<const std::uint8_t> cw, double t_now, double p_fail) {
    WriteResult r;
    for (std::size_t b = 0; b < spec_.n; ++b) {
      CellState& c = cells_[addr * spec_.n + b];
      settle(c, t_now);
      if (c.stuck != Stuck::None) {
        c.value = c.stuck == Stuck::Stuck1;
      } else if (p_fail > 0.0 && rng_.uniform(key(addr, b, kLaneWriteFail)) < p_fail) {
        ++r.failed_cells;
      } else {
        c.value = cw[b] & 1u;
      }
      c.last_write = t_now;
      c.flip_time = errors_.retention && c.stuck == Stuck::None
                        ? t_now + rng_.exponential(key(addr, b, kLaneFlipTime), c.t_life)
                        : std::numeric_limits<double>::infinity();
    }
    ++ops_[addr];
    return r;
  }

  Bits sense(std::size_t addr, double t_now, double p_flip) {
    Bits out(spec_.n);
    for (std::size_t b = 0; b < spec_.n; ++b) {
      CellState& c = cells_[addr * spec_.n + b];
      settle(c, t_now);
      std::uint8_t v = c.stuck == Stuck::None ? c.value : static_cast<std::uint8_t>(c.stuck == Stuck::Stuck1);
      if (p_flip > 0.0 && rng_.uniform(key(addr, b, kLaneReadNoise)) < p_flip) v ^= 1u;
      out[b] = v;
    }
    ++ops_[addr];
    return out;
  }

  ReadResult finish(double t_now, std::size_t addr, ecc::DecodeOutcome&& out, bool probe) {
    log(t_now, addr, "read", ecc::to_string(out.status), probe);
    ReadResult r;
    r.outcome = out.status;
    r.probe_used = probe;
    r.data = std::move(out.data);
    return r;
  }

  void log(double t, std::size_t addr, const char* op, const std::string& outcome, bool probe) {
    if (!trace_) return;
    *trace_ << std::scientific << t << ',' << addr << ',' << op << ',' << outcome << ',' << (probe ? 1 : 0) << '\n';
    *trace_ << std::defaultfloat;
  }

  ArraySpec spec_;
  ecc::EccScheme scheme_;
  ErrorModel errors_;
  CounterRng rng_;
  std::uint32_t trial_;
  std::vector<CellState> cells_;
  std::vector<std::uint32_t> ops_;  // per-word operation counter, keys the RNG
  double clock_ = 0.0;
  std::ostream* trace_ = nullptr;
};

// Each cell draws E_BN ~ Normal(ebn, sigma_fraction * ebn) clipped at 1;
// stuck cells come from p_defect and from the explicit fault map.
inline SimArray build_array(const ArraySpec& spec, const ecc::EccScheme& scheme, double ebn_nominal,
                            const McConfig& mc, const BuildOptions& opt = {}) {
  validate(mc);
  require(ebn_nominal > 0.0 && ebn_nominal <= reliability::kMaxEbn, "build_array: ebn_nominal out of range");
  require(opt.p_defect >= 0.0 && opt.p_defect <= 1.0, "build_array: p_defect must be in [0,1]");
  SimArray arr(spec, scheme, opt.errors, mc.seed, opt.trial);
  const CounterRng rng(mc.seed);
  const double sd = mc.sigma_fraction * ebn_nominal;
  const double nominal_life = reliability::lifetime_seconds({ebn_nominal});
  for (std::size_t w = 0; w < spec.s; ++w)
    for (std::size_t b = 0; b < spec.n; ++b) {
      CellState& c = arr.cell(w, b);
      const DrawKey k{.trial = opt.trial, .word = static_cast<std::uint32_t>(w), .bit = static_cast<std::uint32_t>(b)};
      if (sd > 0.0) {
        DrawKey kv = k;
        kv.lane = kLaneVariation;
        const double e = std::max(1.0, ebn_nominal + sd * rng.normal(kv));
        c.t_life = reliability::lifetime_seconds({std::min(e, reliability::kMaxEbn)});
      } else {
        c.t_life = nominal_life;
      }
      if (opt.p_defect > 0.0) {
        DrawKey kd = k;
        kd.lane = kLaneDefect;
        if (rng.uniform(kd) < opt.p_defect) {
          kd.lane = kLaneStuckValue;
          c.stuck = rng.uniform(kd) < 0.5 ? Stuck::Stuck0 : Stuck::Stuck1;
        }
      }
    }
  for (const auto& f : opt.faults) {
    if (f.word >= spec.s || f.bit >= spec.n)
      throw OutOfRange("fault map entry (" + std::to_string(f.word) + ", " + std::to_string(f.bit) +
                       ") outside the array");
    arr.inject_stuck(f.word, f.bit, f.value);
  }
  return arr;
}

}  // namespace faecc::sim
