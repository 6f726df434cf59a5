#pragma once

// Retention lifetime, survival and MTTF analytics for raw, ECC-protected and
// hard-fault-degraded STT-MRAM arrays, plus the inverse problem: the thermal
// stability factor needed to meet a FIT budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "faecc/error.hpp"
#include "faecc/quadrature.hpp"
#include "faecc/rng.hpp"

namespace faecc::reliability {

inline constexpr double kAttemptTimeS = 1e-9;         // lifetime prefactor
inline constexpr double kBoltzmannErgPerK = 1.3807e-16;
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kFitDeviceHours = 1e9;        // 1 FIT = 1 failure / 1e9 device-hours
inline constexpr double kMaxEbn = 700.0;              // exp() overflows near 709

// Thermal stability factor E_B / (k_B T).
struct EnergyBarrier {
  double ebn = 0.0;

  friend bool operator==(const EnergyBarrier&, const EnergyBarrier&) = default;
};

enum class Anisotropy { IMA, PMA };
enum class Footprint { Elliptic, Rectangular };

// Free-layer description. Lengths in metres (converted to CGS internally),
// Ms in emu/cm^3, fields in Oe.
struct MtjParams {
  double width_m = 64e-9;
  double aspect_ratio = 1.0;
  double thickness_m = 1e-9;
  Anisotropy anisotropy = Anisotropy::PMA;
  double ms_emu_cm3 = 850.0;
  double hk_perp_oe = 0.0;
  double temperature_k = 300.0;
  Footprint footprint = Footprint::Elliptic;
};

inline void validate(const MtjParams& p) {
  require(p.width_m > 0 && p.thickness_m > 0 && p.temperature_k > 0, "MtjParams: w, t and T must be positive");
  require(p.aspect_ratio >= 1.0, "MtjParams: aspect ratio must be >= 1");
  require(p.ms_emu_cm3 > 0, "MtjParams: Ms must be positive");
}

inline double lifetime_seconds(EnergyBarrier eb) {
  require(std::isfinite(eb.ebn) && eb.ebn >= 0.0, "lifetime_seconds: ebn must be finite and >= 0");
  if (eb.ebn > kMaxEbn) throw OutOfRange("lifetime_seconds: exp(" + std::to_string(eb.ebn) + ") overflows");
  return kAttemptTimeS * std::exp(eb.ebn);
}

// Inverse of lifetime_seconds.
inline EnergyBarrier ebn_for_lifetime(double t_life_s) {
  require(t_life_s >= kAttemptTimeS, "ebn_for_lifetime: lifetime below the attempt time");
  return {std::log(t_life_s / kAttemptTimeS)};
}

// Probability that one cell still holds its value after t seconds.
inline double retention_survival(double t, double t_life) {
  require(t >= 0.0, "retention_survival: t must be >= 0");
  require(t_life > 0.0, "retention_survival: t_life must be > 0");
  return std::exp(-t / t_life);
}

// 1 - retention_survival, without cancellation for t << t_life.
inline double bit_error_probability(double t, double t_life) {
  require(t >= 0.0 && t_life > 0.0, "bit_error_probability: need t >= 0, t_life > 0");
  return -std::expm1(-t / t_life);
}

inline double free_layer_volume_cm3(const MtjParams& p) {
  const double w = p.width_m * 100.0;
  const double t = p.thickness_m * 100.0;
  const double base = w * w * p.aspect_ratio;
  return (p.footprint == Footprint::Elliptic ? std::numbers::pi / 4.0 * base : base) * t;
}

// In-plane shape anisotropy field, H_k ~ 4 pi Ms t (AR - 1) / (w AR), in Oe.
inline double ima_shape_field_oe(const MtjParams& p) {
  return 4.0 * std::numbers::pi * p.ms_emu_cm3 * p.thickness_m * (p.aspect_ratio - 1.0) /
         (p.width_m * p.aspect_ratio);
}

struct GeometryBarrier {
  EnergyBarrier barrier;
  bool degenerate = false;  // IMA with no shape anisotropy (AR == 1)
};

// E_B = H_k Ms V / 2 in erg, normalised by k_B T.
inline GeometryBarrier ebn_from_geometry(const MtjParams& p) {
  validate(p);
  const double hk = p.anisotropy == Anisotropy::IMA ? ima_shape_field_oe(p) : p.hk_perp_oe;
  const double eb_erg = hk * p.ms_emu_cm3 * free_layer_volume_cm3(p) / 2.0;
  const double ebn = eb_erg / (kBoltzmannErgPerK * p.temperature_k);
  if (!(ebn > 0.0)) return {{0.0}, true};
  return {{ebn}, false};
}

// Perpendicular anisotropy field that gives a PMA free layer the requested
// thermal stability factor.
inline double pma_field_for_ebn(const MtjParams& p, EnergyBarrier target) {
  validate(p);
  return 2.0 * target.ebn * kBoltzmannErgPerK * p.temperature_k / (p.ms_emu_cm3 * free_layer_volume_cm3(p));
}

inline double fit_to_mttf_hours(double fit) {
  require(fit > 0.0, "fit_to_mttf_hours: FIT must be > 0");
  return kFitDeviceHours / fit;
}

inline double mttf_hours_to_fit(double mttf_hours) {
  require(mttf_hours > 0.0, "mttf_hours_to_fit: MTTF must be > 0");
  return kFitDeviceHours / mttf_hours;
}

// Exponential lifetime: the mean equals t_life.
inline double mttf_single(double t_life) { return t_life; }

inline double mttf_raw_array(double t_life, std::uint64_t n_bits) {
  require(n_bits > 0, "mttf_raw_array: array must contain at least one bit");
  return t_life / static_cast<double>(n_bits);
}

// ---------------------------------------------------------------------------
// Word and array survival.

inline double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Survival of a group of `bits` independent cells that tolerates up to
// `tolerated` flipped cells, each flipped with probability q. Returned as a
// log so products over 1e5+ words stay accurate when survival is ~1.
inline double log_tolerant_survival(std::uint64_t bits, std::uint64_t tolerated, double q) {
  if (tolerated >= bits || q <= 0.0) return 0.0;
  if (q >= 1.0) return -std::numeric_limits<double>::infinity();
  const double lq = std::log(q);
  const double lp = std::log1p(-q);
  // Upper tail: P(more than `tolerated` flips). Terms fall monotonically past
  // the mode, so the sum stops once they are negligible.
  const double mode = static_cast<double>(bits) * q;
  double tail = 0.0;
  for (std::uint64_t i = tolerated + 1; i <= bits; ++i) {
    const double term = std::exp(log_choose(bits, i) + static_cast<double>(i) * lq +
                                 static_cast<double>(bits - i) * lp);
    tail += term;
    if (static_cast<double>(i) > mode + 1.0 && term <= 1e-18 * tail) break;
  }
  if (tail < 0.5) return std::log1p(-tail);
  double head = 0.0;
  for (std::uint64_t i = 0; i <= tolerated; ++i)
    head += std::exp(log_choose(bits, i) + static_cast<double>(i) * lq + static_cast<double>(bits - i) * lp);
  return std::log(head);
}

// Probability that an n-bit word with m-bit correction is still decodable at
// time t: sum_{i<=m} C(n,i) (1-P_b)^(n-i) P_b^i with P_b = 1 - exp(-t/t_life).
inline double word_survival(double t, double t_life, std::uint64_t n, std::uint64_t m) {
  require(m <= n, "word_survival: m must be <= n");
  return std::exp(log_tolerant_survival(n, m, bit_error_probability(t, t_life)));
}

struct ArraySpec {
  std::uint64_t k = 128;  // data bits per word
  std::uint64_t n = 137;  // stored bits per word
  std::uint64_t s = 1;    // words
  std::uint64_t m = 1;    // correctable errors per word
  double fit_target = 1.0;

  std::uint64_t total_bits() const { return n * s; }
};

inline void validate(const ArraySpec& a) {
  require(a.k >= 1 && a.n >= a.k, "ArraySpec: need n >= k >= 1");
  require(a.s >= 1, "ArraySpec: need at least one word");
  require(a.m <= a.n, "ArraySpec: m must be <= n");
  require(a.fit_target > 0.0, "ArraySpec: fit_target must be > 0");
}

// counts[j] = number of words carrying j hard (non-retention) faults.
struct HardFaultProfile {
  std::vector<std::uint64_t> counts;

  static HardFaultProfile healthy(std::uint64_t words) { return {{words}}; }

  std::uint64_t words() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
  std::uint64_t max_faults() const {
    for (std::size_t j = counts.size(); j-- > 0;)
      if (counts[j] != 0) return j;
    return 0;
  }
};

inline void validate(const ArraySpec& a, const HardFaultProfile& p) {
  validate(a);
  require(!p.counts.empty(), "HardFaultProfile: empty");
  require(p.words() == a.s, "HardFaultProfile: word counts must sum to s");
  require(p.max_faults() <= a.n, "HardFaultProfile: more faults than bits in a word");
}

// Whether a word with j stuck cells is exposed to retention on all n cells
// (the literal product form) or only on its n - j healthy cells. Stuck cells
// read their stuck value whatever the free layer does, so HealthyBits is what
// a fault-injecting simulation measures.
enum class RetentionBasis { HealthyBits, AllBits };

// Words whose hard faults already exceed the correction capability.
inline bool yield_failing(const ArraySpec& a, const HardFaultProfile& p) { return p.max_faults() > a.m; }

// log P(word with j hard faults survives to t). Words with j > m tolerate no
// retention errors at all.
inline double log_word_survival_with_faults(double q, const ArraySpec& a, std::uint64_t j,
                                            RetentionBasis basis = RetentionBasis::HealthyBits) {
  const std::uint64_t exposed = basis == RetentionBasis::HealthyBits ? a.n - j : a.n;
  const std::uint64_t tolerated = j <= a.m ? a.m - j : 0;
  return log_tolerant_survival(exposed, tolerated, q);
}

inline double log_array_survival(double t, double t_life, const ArraySpec& a, const HardFaultProfile& p,
                                 RetentionBasis basis = RetentionBasis::HealthyBits) {
  const double q = bit_error_probability(t, t_life);
  double acc = 0.0;
  for (std::size_t j = 0; j < p.counts.size(); ++j) {
    if (p.counts[j] == 0) continue;
    acc += static_cast<double>(p.counts[j]) * log_word_survival_with_faults(q, a, j, basis);
  }
  return acc;
}

// prod_j P_word,j(t)^{n_j}; with the healthy profile this is P_word(t)^s.
inline double array_survival(double t, double t_life, const ArraySpec& a, const HardFaultProfile& p,
                             RetentionBasis basis = RetentionBasis::HealthyBits) {
  validate(a, p);
  return std::exp(log_array_survival(t, t_life, a, p, basis));
}

// ---------------------------------------------------------------------------
// Inverse problem.

struct RequiredEbnOptions {
  double ebn_lo = 10.0;
  double ebn_hi = 120.0;
  double mttf_rel_tol = 1e-4;
  RetentionBasis basis = RetentionBasis::HealthyBits;
  QuadratureOptions quadrature{};
};

struct RequiredEbn {
  EnergyBarrier barrier;
  double mttf_seconds = 0.0;
  double target_seconds = 0.0;
  bool yield_failing = false;
  bool at_lower_bound = false;
  int iterations = 0;
};

inline double array_mttf_seconds(EnergyBarrier eb, const ArraySpec& a, const HardFaultProfile& p,
                                 const RequiredEbnOptions& opt = {}) {
  const double t_life = lifetime_seconds(eb);
  const double t_ref = t_life / static_cast<double>(a.n * a.s);
  return mttf_numeric([&](double t) { return std::exp(log_array_survival(t, t_life, a, p, opt.basis)); }, t_ref,
                      opt.quadrature);
}

// Smallest thermal stability factor whose array MTTF meets the FIT target,
// found by bisection on [ebn_lo, ebn_hi].
inline RequiredEbn required_ebn(const ArraySpec& a, const HardFaultProfile& p, const RequiredEbnOptions& opt = {}) {
  validate(a, p);
  RequiredEbn out;
  out.target_seconds = fit_to_mttf_hours(a.fit_target) * kSecondsPerHour;
  out.yield_failing = yield_failing(a, p);
  auto mttf = [&](double ebn) { return array_mttf_seconds({ebn}, a, p, opt); };

  double lo = opt.ebn_lo;
  double hi = opt.ebn_hi;
  double m_hi = mttf(hi);
  if (m_hi < out.target_seconds)
    throw ConvergenceError("required_ebn: target MTTF unattainable below ebn=" + std::to_string(hi));
  const double m_lo = mttf(lo);
  if (m_lo >= out.target_seconds) {
    out.barrier = {lo};
    out.mttf_seconds = m_lo;
    out.at_lower_bound = true;
    return out;
  }
  for (int it = 0; it < 200; ++it) {
    out.iterations = it + 1;
    if ((m_hi - out.target_seconds) / out.target_seconds < opt.mttf_rel_tol || hi - lo < 1e-13) break;
    const double mid = 0.5 * (lo + hi);
    const double m_mid = mttf(mid);
    if (m_mid >= out.target_seconds) {
      hi = mid;
      m_hi = m_mid;
    } else {
      lo = mid;
    }
  }
  out.barrier = {hi};
  out.mttf_seconds = m_hi;
  return out;
}

// ---------------------------------------------------------------------------
// Hard-fault histograms.

inline double binomial_pmf(std::uint64_t n, std::uint64_t j, double p) {
  if (p <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return j == n ? 1.0 : 0.0;
  return std::exp(log_choose(n, j) + static_cast<double>(j) * std::log(p) +
                  static_cast<double>(n - j) * std::log1p(-p));
}

// Expected number of words with j defective cells when defects hit cells
// independently with probability p_defect; rounded, with the residual placed
// in n_0 so the counts sum to s.
inline HardFaultProfile expected_fault_histogram(double p_defect, const ArraySpec& a) {
  require(p_defect >= 0.0 && p_defect <= 1.0, "expected_fault_histogram: p_defect must be in [0, 1]");
  validate(a);
  HardFaultProfile prof;
  prof.counts.assign(a.n + 1, 0);
  const double s = static_cast<double>(a.s);
  std::uint64_t assigned = 0;
  for (std::uint64_t j = 1; j <= a.n; ++j) {
    prof.counts[j] = static_cast<std::uint64_t>(std::llround(s * binomial_pmf(a.n, j, p_defect)));
    assigned += prof.counts[j];
  }
  // Rounding can overshoot s when the distribution is spread out; trim from
  // the heaviest-faulted words first.
  for (std::uint64_t j = a.n; assigned > a.s && j >= 1; --j) {
    const std::uint64_t cut = std::min(prof.counts[j], assigned - a.s);
    prof.counts[j] -= cut;
    assigned -= cut;
  }
  prof.counts[0] = a.s - assigned;
  while (prof.counts.size() > 1 && prof.counts.back() == 0) prof.counts.pop_back();
  return prof;
}

// Sampled histogram: each word draws its defect count from Binomial(n, p) by
// inverse CDF on a counter-based stream, so results depend only on the seed.
inline HardFaultProfile sampled_fault_histogram(double p_defect, const ArraySpec& a, std::uint64_t seed) {
  require(p_defect >= 0.0 && p_defect <= 1.0, "sampled_fault_histogram: p_defect must be in [0, 1]");
  validate(a);
  std::vector<double> cdf;
  double c = 0.0;
  for (std::uint64_t j = 0; j <= a.n; ++j) {
    c += binomial_pmf(a.n, j, p_defect);
    cdf.push_back(c);
    if (c >= 1.0 - 1e-17) break;
  }
  cdf.back() = 1.0;
  HardFaultProfile prof;
  prof.counts.assign(cdf.size(), 0);
  const CounterRng rng(seed);
  for (std::uint64_t w = 0; w < a.s; ++w) {
    const double u = rng.uniform(
        {.trial = static_cast<std::uint32_t>(w >> 32), .word = static_cast<std::uint32_t>(w), .lane = kLaneHistogram});
    std::size_t j = 0;
    while (cdf[j] < u) ++j;
    ++prof.counts[j];
  }
  while (prof.counts.size() > 1 && prof.counts.back() == 0) prof.counts.pop_back();
  return prof;
}

}  // namespace faecc::reliability
