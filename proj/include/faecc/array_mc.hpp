#pragma once

// Monte-Carlo estimators built on the array simulator: FIT, yield, survival
// by fault injection, and the exhaustive correction-capability check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "faecc/array_sim.hpp"
#include "faecc/parallel.hpp"
#include "faecc/stats.hpp"

namespace faecc::sim {

// Whether a word with `hard` stuck-at-wrong cells and `soft` retention flips
// is recovered.
inline bool correctable(ecc::Mode mode, std::size_t hard, std::size_t soft) {
  const std::size_t total = hard + soft;
  switch (mode) {
    case ecc::Mode::SECDED: return total <= 1;
    case ecc::Mode::DECTED: return total <= 2;
    case ecc::Mode::FAECC: return total <= 1 || (total == 2 && hard >= 1);
  }
  return false;
}

// Largest number of soft flips a word with `hard` faults survives, or -1.
inline int soft_tolerance(ecc::Mode mode, std::size_t hard) {
  int c = -1;
  while (correctable(mode, hard, static_cast<std::size_t>(c + 1))) ++c;
  return c;
}

// Hard-fault count of a word drawn by inverse CDF of Binomial(n, p).
inline std::size_t sample_binomial_count(double u, std::size_t n, double p) {
  if (p <= 0.0) return 0;
  double cdf = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    cdf += reliability::binomial_pmf(n, j, p);
    if (u < cdf) return j;
  }
  return n;
}

// ---------------------------------------------------------------------------
// FIT

struct FitExperiment {
  ArraySpec spec;
  ecc::Mode mode = ecc::Mode::SECDED;
  double ebn = 50.0;
  double p_defect = 0.0;
  FaultMap faults;  // stuck cells present in every trial, on top of p_defect
  bool raw = false;  // no ECC: any flip or stuck cell fails its word
};

inline int soft_tolerance(const FitExperiment& e, std::size_t hard) {
  if (e.raw) return hard == 0 ? 0 : -1;
  return soft_tolerance(e.mode, hard);
}

struct FitEstimate {
  faecc::Estimate fit;         // failures per 1e9 array-hours
  faecc::Estimate mttf_hours;  // meaningful when nothing was censored
  std::size_t failures = 0;
  std::size_t trials = 0;
  bool one_sided = false;  // no failures observed: fit.hi is a 95% upper bound
};

namespace detail {

inline std::vector<std::size_t> trial_hard_counts(const FitExperiment& e, const CounterRng& rng, std::uint32_t trial) {
  std::vector<std::size_t> j(e.spec.s, 0);
  for (const auto& f : e.faults) {
    require(f.word < e.spec.s && f.bit < e.spec.n, "measure_fit: fault map entry outside the array");
    ++j[f.word];
  }
  if (e.p_defect > 0.0)
    for (std::size_t w = 0; w < e.spec.s; ++w) {
      const double u = rng.uniform({.trial = trial, .word = static_cast<std::uint32_t>(w), .lane = kLaneDefect});
      j[w] = std::min<std::size_t>(e.spec.n, j[w] + sample_binomial_count(u, e.spec.n, e.p_defect));
    }
  return j;
}

// Homogeneous cells: the k-th retention flip of the array arrives after an
// Exp(t_life / (H - k)) gap on a uniformly chosen unflipped healthy cell.
inline double first_failure_homogeneous(const FitExperiment& e, const std::vector<std::size_t>& hard, double t_life,
                                        double horizon, const CounterRng& rng, std::uint32_t trial) {
  const std::size_t n = e.spec.n;
  std::vector<int> tol(hard.size());
  std::vector<std::uint64_t> prefix(hard.size() + 1, 0);
  bool uniform_words = true;
  for (std::size_t w = 0; w < hard.size(); ++w) {
    tol[w] = soft_tolerance(e, hard[w]);
    if (tol[w] < 0) return 0.0;
    prefix[w + 1] = prefix[w] + (n - hard[w]);
    uniform_words = uniform_words && hard[w] == 0;
  }
  const std::uint64_t healthy = prefix.back();
  std::unordered_set<std::uint64_t> flipped;
  std::vector<int> flips(hard.size(), 0);
  double t = 0.0;
  for (std::uint64_t k = 0; k < healthy; ++k) {
    const DrawKey key{.trial = trial, .word = static_cast<std::uint32_t>(k), .event = 1, .lane = kLaneEvent};
    t += rng.exponential(key, t_life / static_cast<double>(healthy - k));
    if (t > horizon) return t;
    std::uint64_t c = 0;
    for (std::uint32_t attempt = 0;; ++attempt) {
      DrawKey pk = key;
      pk.event = 2 + attempt;
      c = std::min<std::uint64_t>(healthy - 1, static_cast<std::uint64_t>(rng.uniform(pk) * double(healthy)));
      if (!flipped.count(c)) break;
    }
    flipped.insert(c);
    const std::size_t w = uniform_words
                              ? static_cast<std::size_t>(c / n)
                              : static_cast<std::size_t>(std::upper_bound(prefix.begin(), prefix.end(), c) -
                                                         prefix.begin() - 1);
    if (++flips[w] > tol[w]) return t;
  }
  return std::numeric_limits<double>::infinity();
}

// Varied cells: every healthy cell gets its own lifetime and flip time; a
// word fails at its (tolerance + 1)-th flip.
inline double first_failure_varied(const FitExperiment& e, const std::vector<std::size_t>& hard, double sigma_fraction,
                                   const CounterRng& rng, std::uint32_t trial) {
  const double sd = sigma_fraction * e.ebn;
  double first = std::numeric_limits<double>::infinity();
  std::vector<double> times;
  for (std::size_t w = 0; w < hard.size(); ++w) {
    const int tol = soft_tolerance(e, hard[w]);
    if (tol < 0) return 0.0;
    times.clear();
    for (std::size_t b = 0; b < e.spec.n - hard[w]; ++b) {
      DrawKey k{.trial = trial, .word = static_cast<std::uint32_t>(w), .bit = static_cast<std::uint32_t>(b)};
      k.lane = kLaneVariation;
      const double ebn = std::clamp(e.ebn + sd * rng.normal(k), 1.0, reliability::kMaxEbn);
      k.lane = kLaneFlipTime;
      times.push_back(rng.exponential(k, reliability::lifetime_seconds({ebn})));
    }
    if (static_cast<std::size_t>(tol) >= times.size()) continue;
    std::nth_element(times.begin(), times.begin() + tol, times.end());
    first = std::min(first, times[static_cast<std::size_t>(tol)]);
  }
  return first;
}

}  // namespace detail

inline FitEstimate measure_fit(const FitExperiment& e, double horizon_s, const McConfig& mc) {
  validate(mc);
  reliability::validate(e.spec);
  require(horizon_s > 0.0, "measure_fit: horizon must be positive");
  require(e.p_defect >= 0.0 && e.p_defect <= 1.0, "measure_fit: p_defect must be in [0,1]");
  const CounterRng rng(mc.seed);
  const double t_life = reliability::lifetime_seconds({e.ebn});
  std::vector<double> times(mc.trials);
  parallel_for(mc.trials, mc.workers, [&](std::size_t i) {
    const auto trial = static_cast<std::uint32_t>(i);
    const auto hard = detail::trial_hard_counts(e, rng, trial);
    times[i] = mc.sigma_fraction > 0.0 ? detail::first_failure_varied(e, hard, mc.sigma_fraction, rng, trial)
                                       : detail::first_failure_homogeneous(e, hard, t_life, horizon_s, rng, trial);
  });

  FitEstimate out;
  out.trials = mc.trials;
  const double to_h = 1.0 / reliability::kSecondsPerHour;
  double exposure_h = 0.0;
  for (double t : times) {
    if (t <= horizon_s) ++out.failures;
    exposure_h += std::min(t, horizon_s) * to_h;
  }
  const auto fit_of = [](double mttf_h) {
    return mttf_h > 0.0 ? reliability::kFitDeviceHours / mttf_h : std::numeric_limits<double>::infinity();
  };
  if (out.failures == mc.trials) {
    std::vector<double> hours(times.size());
    std::transform(times.begin(), times.end(), hours.begin(), [&](double t) { return t * to_h; });
    out.mttf_hours = faecc::mean_estimate(hours);
    out.fit.value = fit_of(out.mttf_hours.value);
    out.fit.lo = fit_of(out.mttf_hours.hi);
    out.fit.hi = fit_of(out.mttf_hours.lo);
    out.fit.stderr_ = out.fit.value * out.mttf_hours.stderr_ / std::max(out.mttf_hours.value, 1e-300);
    out.fit.samples = mc.trials;
    return out;
  }
  // Censored at the horizon: constant-hazard estimate from total exposure.
  const double f = static_cast<double>(out.failures);
  const double per = reliability::kFitDeviceHours / exposure_h;
  out.fit.samples = mc.trials;
  if (out.failures == 0) {
    out.one_sided = true;
    out.fit = {0.0, 0.0, 3.0 * per, 0.0, mc.trials};
  } else {
    const double half = faecc::kZ95 * std::sqrt(f);
    out.fit = {f * per, std::max(0.0, f - half) * per, (f + half) * per, std::sqrt(f) * per, mc.trials};
  }
  out.mttf_hours = {exposure_h / std::max(f, 1.0), 0.0, std::numeric_limits<double>::infinity(), 0.0, mc.trials};
  return out;
}

// ---------------------------------------------------------------------------
// Yield

struct YieldEstimate {
  faecc::Estimate yield;
  double analytic = 1.0;  // (P(defects per word <= capacity))^s
  std::size_t capacity = 0;
};

// P(Binomial(n, p) > cap).
inline double defect_tail(std::size_t n, std::size_t cap, double p) {
  if (cap >= n || p <= 0.0) return 0.0;
  return -std::expm1(reliability::log_tolerant_survival(n, cap, p));
}

// An array yields when every word has at most `capacity` defective cells.
// Word w of trial i fails when its uniform draw falls below the tail
// probability, so schemes compared under one seed see the same defects.
inline YieldEstimate measure_yield(const ArraySpec& spec, const ecc::EccScheme& scheme, double p_defect,
                                   const McConfig& mc) {
  validate(mc);
  reliability::validate(spec);
  require(p_defect >= 0.0 && p_defect <= 1.0, "measure_yield: p_defect must be in [0,1]");
  YieldEstimate out;
  out.capacity = scheme.hard_fault_capacity();
  const double tail = defect_tail(spec.n, out.capacity, p_defect);
  out.analytic = std::exp(static_cast<double>(spec.s) * std::log1p(-tail));
  const CounterRng rng(mc.seed);
  std::vector<std::uint8_t> ok(mc.trials, 1);
  if (tail > 0.0)
    parallel_for(mc.trials, mc.workers, [&](std::size_t i) {
      for (std::size_t w = 0; w < spec.s; ++w) {
        const DrawKey k{.trial = static_cast<std::uint32_t>(i), .word = static_cast<std::uint32_t>(w), .lane = kLaneDefect};
        if (rng.uniform(k) < tail) {
          ok[i] = 0;
          return;
        }
      }
    });
  out.yield = faecc::binomial_estimate(static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1)), mc.trials);
  return out;
}

// ---------------------------------------------------------------------------
// Survival by fault injection

// Fraction of arrays whose every word reads back correctly at time t. Words
// are given profile.counts[j] words with j stuck cells each (stuck at the
// complement of the stored data), retention lifetimes are all t_life.
inline faecc::Estimate fault_injection_survival(const ArraySpec& spec, const ecc::EccScheme& scheme,
                                                const reliability::HardFaultProfile& profile, double t, double t_life,
                                                const McConfig& mc) {
  validate(mc);
  reliability::validate(spec, profile);
  require(t >= 0.0 && t_life > 0.0, "fault_injection_survival: need t >= 0, t_life > 0");
  std::vector<std::size_t> hard;
  for (std::size_t j = 0; j < profile.counts.size(); ++j) hard.insert(hard.end(), profile.counts[j], j);
  const CounterRng rng(mc.seed);
  std::vector<std::uint8_t> ok(mc.trials, 0);
  parallel_for(mc.trials, mc.workers, [&](std::size_t i) {
    const auto trial = static_cast<std::uint32_t>(i);
    SimArray arr(spec, scheme, {}, mc.seed, trial);
    for (std::size_t w = 0; w < spec.s; ++w)
      for (std::size_t b = 0; b < spec.n; ++b) arr.cell(w, b).t_life = t_life;
    const Bits zeros(spec.k, 0);
    for (std::size_t w = 0; w < spec.s; ++w) {
      // Distinct random positions by partial Fisher-Yates.
      std::vector<std::size_t> pos(spec.n);
      std::iota(pos.begin(), pos.end(), 0);
      for (std::size_t r = 0; r < hard[w]; ++r) {
        const DrawKey k{.trial = trial, .word = static_cast<std::uint32_t>(w), .bit = static_cast<std::uint32_t>(r),
                        .lane = kLaneDefect};
        const auto pick = r + static_cast<std::size_t>(rng.uniform(k) * double(spec.n - r));
        std::swap(pos[r], pos[std::min(pick, spec.n - 1)]);
        arr.inject_stuck(w, pos[r], 1);  // zeros are stored, so stuck-at-1 is always wrong
      }
      arr.write_word(w, zeros, 0.0);
    }
    bool all = true;
    for (std::size_t w = 0; w < spec.s && all; ++w) {
      const auto r = arr.read_word(w, t);
      all = r.outcome != DecodeStatus::DoubleDetected && r.outcome != DecodeStatus::Uncorrectable && r.data == zeros;
    }
    ok[i] = all;
  });
  return faecc::binomial_estimate(static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1)), mc.trials);
}

// ---------------------------------------------------------------------------
// Correction capability

enum class ErrorClass { OneSoft, OneHard, TwoHard, OneSoftOneHard, TwoSoft };

inline constexpr ErrorClass kErrorClasses[] = {ErrorClass::OneSoft, ErrorClass::OneHard, ErrorClass::TwoHard,
                                               ErrorClass::OneSoftOneHard, ErrorClass::TwoSoft};

inline std::string to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::OneSoft: return "one soft";
    case ErrorClass::OneHard: return "one hard";
    case ErrorClass::TwoHard: return "two hard";
    case ErrorClass::OneSoftOneHard: return "one soft and one hard";
    case ErrorClass::TwoSoft: return "two soft";
  }
  return "?";
}

inline std::pair<std::size_t, std::size_t> hard_soft(ErrorClass c) {
  switch (c) {
    case ErrorClass::OneSoft: return {0, 1};
    case ErrorClass::OneHard: return {1, 0};
    case ErrorClass::TwoHard: return {2, 0};
    case ErrorClass::OneSoftOneHard: return {1, 1};
    case ErrorClass::TwoSoft: return {0, 2};
  }
  return {0, 0};
}

struct CapabilityResult {
  ErrorClass error_class;
  ecc::Mode mode;
  bool expected = false;
  bool corrected = false;         // every pattern recovered the data
  std::size_t patterns = 0;
  std::size_t recovered = 0;
  std::size_t silent_corruptions = 0;  // reported success with wrong data

  bool pass() const { return corrected == expected && silent_corruptions == 0; }
};

// Injects every placement of the given error class into a one-word array
// (stuck cells hold the complement of the stored bit, soft errors flip the
// stored value) and reads it back through the scheme's read path.
inline CapabilityResult verify_capability(const ecc::EccScheme& scheme, ErrorClass cls,
                                          const std::vector<Bits>& data_words) {
  const auto [nh, ns] = hard_soft(cls);
  const std::size_t n = scheme.n();
  const ArraySpec spec{.k = scheme.k(), .n = n, .s = 1, .m = scheme.hard_fault_capacity()};
  ErrorModel quiet;
  quiet.retention = false;
  CapabilityResult res{cls, scheme.mode(), correctable(scheme.mode(), nh, ns)};

  auto run = [&](const Bits& data, const std::vector<std::size_t>& hard, const std::vector<std::size_t>& soft) {
    SimArray arr(spec, scheme, quiet, 1, 0);
    arr.write_word(0, data, 0.0);
    const Bits cw = ecc::encode(scheme, data);
    for (auto p : hard) arr.inject_stuck(0, p, cw[p] ^ 1u);
    for (auto p : soft) arr.inject_flip(0, p);
    const auto r = arr.read_word(0, 0.0);
    const bool claims = r.outcome == DecodeStatus::Clean || r.outcome == DecodeStatus::CorrectedSingle ||
                        r.outcome == DecodeStatus::CorrectedDouble;
    ++res.patterns;
    if (claims && r.data == data) ++res.recovered;
    if (claims && r.data != data) ++res.silent_corruptions;
  };

  for (const auto& data : data_words) {
    require(data.size() == scheme.k(), "verify_capability: data word length mismatch");
    for (std::size_t a = 0; a < n; ++a) {
      if (nh + ns == 1) {
        run(data, nh ? std::vector<std::size_t>{a} : std::vector<std::size_t>{},
            ns ? std::vector<std::size_t>{a} : std::vector<std::size_t>{});
        continue;
      }
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        if (nh == 1) {
          run(data, {a}, {b});
        } else if (b > a) {
          if (nh == 2) run(data, {a, b}, {});
          else run(data, {}, {a, b});
        }
      }
    }
  }
  res.corrected = res.patterns > 0 && res.recovered == res.patterns;
  return res;
}

// Data words used by the capability check: all-zero, all-one and a few
// pseudo-random words.
inline std::vector<Bits> capability_data_words(std::size_t k, std::uint64_t seed = 7, std::size_t random_words = 2) {
  std::vector<Bits> out{Bits(k, 0), Bits(k, 1)};
  const CounterRng rng(seed);
  for (std::size_t r = 0; r < random_words; ++r) {
    Bits w(k);
    for (std::size_t i = 0; i < k; ++i)
      w[i] = rng.uniform({.word = static_cast<std::uint32_t>(r), .bit = static_cast<std::uint32_t>(i), .lane = kLaneData}) < 0.5;
    out.push_back(std::move(w));
  }
  return out;
}

// Capability matrix rows: "one soft or hard" combines the first two error classes.
struct CapabilityRow {
  std::string label;
  bool expected = false;
  bool corrected = false;
  bool pass = false;
};

inline std::vector<CapabilityRow> capability_table(const ecc::EccScheme& scheme, const std::vector<Bits>& data_words) {
  std::vector<CapabilityResult> r;
  for (auto c : kErrorClasses) r.push_back(verify_capability(scheme, c, data_words));
  std::vector<CapabilityRow> rows;
  rows.push_back({"one soft or hard", r[0].expected && r[1].expected, r[0].corrected && r[1].corrected,
                  r[0].pass() && r[1].pass()});
  for (std::size_t i = 2; i < r.size(); ++i)
    rows.push_back({to_string(r[i].error_class), r[i].expected, r[i].corrected, r[i].pass()});
  return rows;
}

}  // namespace faecc::sim
