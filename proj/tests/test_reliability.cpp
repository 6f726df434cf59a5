#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <random>
#include <unordered_map>

#include "faecc/reliability.hpp"

namespace rel = faecc::reliability;

namespace {

// Exhaustive oracle: probability that at most m of n cells flipped, summing
// over every one of the 2^n flip patterns.
double enumerate_word_survival(unsigned n, unsigned m, double pb) {
  double total = 0.0;
  for (std::uint32_t pattern = 0; pattern < (1u << n); ++pattern) {
    const unsigned w = static_cast<unsigned>(__builtin_popcount(pattern));
    if (w > m) continue;
    total += std::pow(pb, w) * std::pow(1.0 - pb, n - w);
  }
  return total;
}

// Independent quadrature route for integral_0^inf S(t) dt.
template <typename F>
double boost_integral(F f) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-12);
}

// Exact event-driven sampler of the first uncorrectable time of a
// homogeneous array: cells flip once at Exp(t_life) times, so the k-th flip
// of the array arrives after an Exp((N - k) / t_life) gap and lands on a
// uniformly chosen unflipped cell.
double sample_first_failure(std::uint64_t n, std::uint64_t s, std::uint64_t m, double t_life, std::mt19937_64& gen) {
  const std::uint64_t cells = n * s;
  std::unordered_map<std::uint64_t, unsigned> word_flips;
  std::unordered_map<std::uint64_t, bool> flipped;
  std::uniform_int_distribution<std::uint64_t> pick(0, cells - 1);
  std::exponential_distribution<double> unit(1.0);
  double t = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    t += unit(gen) * t_life / static_cast<double>(cells - k);
    std::uint64_t c;
    do c = pick(gen);
    while (flipped.count(c));
    flipped[c] = true;
    if (++word_flips[c / n] > m) return t;
  }
}

}  // namespace

TEST(Lifetime, Values) {
  EXPECT_DOUBLE_EQ(rel::lifetime_seconds({0.0}), 1e-9);
  EXPECT_NEAR(rel::lifetime_seconds({std::log(3.6e21)}), 3.6e12, 3.6e12 * 1e-12);
  EXPECT_NEAR(rel::lifetime_seconds({50.0}), 5.184705528587072e12, 1e0);
}

TEST(Lifetime, LogIdentityAndMonotone) {
  double prev = 0.0;
  for (double x = 0.0; x <= 650.0; x += 3.25) {
    const double t = rel::lifetime_seconds({x});
    EXPECT_GT(t, prev);
    prev = t;
    EXPECT_NEAR(std::log(t) - std::log(1e-9), x, 1e-12 * std::max(1.0, x));
  }
}

TEST(Lifetime, OverflowAndDomain) {
  EXPECT_THROW(rel::lifetime_seconds({701.0}), faecc::OutOfRange);
  EXPECT_THROW(rel::lifetime_seconds({-1.0}), faecc::InvalidArgument);
  EXPECT_THROW(rel::lifetime_seconds({std::nan("")}), faecc::InvalidArgument);
}

TEST(RetentionSurvival, Values) {
  EXPECT_EQ(rel::retention_survival(0.0, 5.0), 1.0);
  EXPECT_NEAR(rel::retention_survival(5.0, 5.0), 0.36787944117144233, 1e-15);
  // One device at 1 FIT over ten 365-day years.
  const double t = 10 * 365 * 24 * 3600.0;
  const double t_life = 1e9 * 3600.0;
  EXPECT_NEAR(1.0 - rel::retention_survival(t, t_life), 8.76e-5, 1e-7);
  EXPECT_THROW(rel::retention_survival(-1.0, 1.0), faecc::InvalidArgument);
  EXPECT_THROW(rel::retention_survival(1.0, 0.0), faecc::InvalidArgument);
}

TEST(Geometry, ImaWithUnitAspectIsDegenerate) {
  rel::MtjParams p;
  p.anisotropy = rel::Anisotropy::IMA;
  p.aspect_ratio = 1.0;
  const auto g = rel::ebn_from_geometry(p);
  EXPECT_EQ(g.barrier.ebn, 0.0);
  EXPECT_TRUE(g.degenerate);
}

TEST(Geometry, PmaTableNominalMatchesSiRoute) {
  rel::MtjParams p;  // 64 nm x 1 nm PMA, Ms 850, 300 K
  p.hk_perp_oe = rel::pma_field_for_ebn(p, {50.0});
  const auto g = rel::ebn_from_geometry(p);
  EXPECT_FALSE(g.degenerate);
  EXPECT_GE(g.barrier.ebn, 50.0 - 1e-9);
  EXPECT_LE(g.barrier.ebn, 70.0);

  // SI route: E = mu0 Hk Ms V / 2 with Hk in A/m, Ms in A/m, V in m^3.
  const double mu0 = 4e-7 * std::numbers::pi;
  const double hk_si = p.hk_perp_oe * 1e3 / (4 * std::numbers::pi);
  const double ms_si = 850e3;
  const double v = std::numbers::pi / 4 * 64e-9 * 64e-9 * 1e-9;
  const double e = mu0 * hk_si * ms_si * v / 2.0;
  EXPECT_NEAR(e / (1.3807e-23 * 300.0), g.barrier.ebn, 1e-9);
}

TEST(Geometry, BarrierScalesLinearlyWithVolume) {
  rel::MtjParams p;
  p.hk_perp_oe = 2000.0;
  const double base = rel::ebn_from_geometry(p).barrier.ebn;
  p.thickness_m *= 2.0;
  EXPECT_NEAR(rel::ebn_from_geometry(p).barrier.ebn, 2.0 * base, 1e-9 * base);

  rel::MtjParams ima;
  ima.anisotropy = rel::Anisotropy::IMA;
  ima.aspect_ratio = 2.0;
  ima.width_m = 50e-9;
  ima.thickness_m = 2e-9;
  const double e1 = rel::ebn_from_geometry(ima).barrier.ebn;
  // E_B ~ t^2 w (AR - 1) at fixed AR: doubling w doubles E_B.
  ima.width_m *= 2.0;
  EXPECT_NEAR(rel::ebn_from_geometry(ima).barrier.ebn, 2.0 * e1, 1e-9 * e1);
  ima.footprint = rel::Footprint::Rectangular;
  EXPECT_NEAR(rel::ebn_from_geometry(ima).barrier.ebn, 2.0 * e1 * 4.0 / std::numbers::pi, 1e-9 * e1);
}

TEST(Fit, Conversions) {
  EXPECT_EQ(rel::fit_to_mttf_hours(1.0), 1e9);
  EXPECT_EQ(rel::fit_to_mttf_hours(2.0), 5e8);
  EXPECT_EQ(rel::fit_to_mttf_hours(0.5), 2e9);
  EXPECT_THROW(rel::fit_to_mttf_hours(0.0), faecc::InvalidArgument);
  EXPECT_EQ(rel::mttf_single(1.0), 1.0);
  EXPECT_EQ(rel::mttf_single(3.6e12), 3.6e12);
  EXPECT_EQ(rel::mttf_raw_array(8.0, 1), 8.0);
  EXPECT_EQ(rel::mttf_raw_array(8.0, 2), 4.0);
  EXPECT_THROW(rel::mttf_raw_array(8.0, 0), faecc::InvalidArgument);
}

TEST(WordSurvival, MatchesEnumeration) {
  for (unsigned n = 1; n <= 12; ++n)
    for (unsigned m = 0; m <= n; ++m)
      for (double x : {1e-4, 0.01, 0.3, 1.0, 4.0}) {
        const double pb = -std::expm1(-x);
        const double expect = enumerate_word_survival(n, m, pb);
        EXPECT_NEAR(rel::word_survival(x, 1.0, n, m), expect, 1e-12 * expect + 1e-300) << n << " " << m << " " << x;
      }
}

TEST(WordSurvival, KnownValues) {
  // n=3, m=1, P_b=0.1: 0.9^3 + 3 * 0.1 * 0.9^2 = 0.972.
  const double t = -std::log(0.9);
  EXPECT_NEAR(rel::word_survival(t, 1.0, 3, 1), 0.972, 1e-14);
  EXPECT_EQ(rel::word_survival(123.0, 1.0, 7, 7), 1.0);
  EXPECT_NEAR(rel::word_survival(0.37, 2.0, 1, 0), std::exp(-0.37 / 2.0), 1e-15);
  EXPECT_THROW(rel::word_survival(1.0, 1.0, 3, 4), faecc::InvalidArgument);
}

TEST(WordSurvival, MonotoneInTimeAndCorrection) {
  for (unsigned m = 0; m < 5; ++m) {
    double prev = 1.0;
    for (double x = 0.0; x < 3.0; x += 0.01) {
      const double v = rel::word_survival(x, 1.0, 137, m);
      EXPECT_LE(v, prev + 1e-15);
      EXPECT_GE(rel::word_survival(x, 1.0, 137, m + 1), v - 1e-15);
      prev = v;
    }
  }
}

TEST(ArraySurvival, HealthyProfileIsPowerOfWord) {
  rel::ArraySpec a{.k = 128, .n = 137, .s = 262144, .m = 1};
  const auto prof = rel::HardFaultProfile::healthy(a.s);
  // Reference power computed in extended precision: a double-rounded word
  // survival raised to s = 2^18 would itself carry ~s * eps error.
  for (double x : {1e-7, 1e-6, 1e-5, 3e-5}) {
    const long double q = -std::expm1(static_cast<long double>(-x));
    const long double w = std::pow(1.0L - q, 137.0L) + 137.0L * q * std::pow(1.0L - q, 136.0L);
    const double expect = static_cast<double>(std::pow(w, static_cast<long double>(a.s)));
    EXPECT_NEAR(rel::array_survival(x, 1.0, a, prof), expect, 1e-12 * expect + 1e-300);
  }
  rel::ArraySpec one{.k = 4, .n = 9, .s = 1, .m = 1};
  EXPECT_NEAR(rel::array_survival(0.2, 1.0, one, rel::HardFaultProfile::healthy(1)),
              rel::word_survival(0.2, 1.0, 9, 1), 1e-15);
  rel::ArraySpec two = one;
  two.s = 2;
  EXPECT_NEAR(rel::array_survival(0.2, 1.0, two, rel::HardFaultProfile::healthy(2)),
              std::pow(rel::word_survival(0.2, 1.0, 9, 1), 2), 1e-15);
}

TEST(ArraySurvival, DegradedWordsAndBasis) {
  rel::ArraySpec a{.k = 4, .n = 9, .s = 4, .m = 1};
  const rel::HardFaultProfile prof{{3, 1}};
  const double q = -std::expm1(-0.01);
  const double healthy = std::pow(1 - q, 9) + 9 * q * std::pow(1 - q, 8);
  EXPECT_NEAR(rel::array_survival(0.01, 1.0, a, prof), std::pow(healthy, 3) * std::pow(1 - q, 8), 1e-14);
  EXPECT_NEAR(rel::array_survival(0.01, 1.0, a, prof, rel::RetentionBasis::AllBits),
              std::pow(healthy, 3) * std::pow(1 - q, 9), 1e-14);
  EXPECT_FALSE(rel::yield_failing(a, prof));

  // j > m: word survives only while its healthy cells all hold.
  const rel::HardFaultProfile over{{3, 0, 1}};
  EXPECT_TRUE(rel::yield_failing(a, over));
  EXPECT_NEAR(rel::array_survival(0.01, 1.0, a, over), std::pow(healthy, 3) * std::pow(1 - q, 7), 1e-14);

  const rel::HardFaultProfile wrong{{2, 1}};
  EXPECT_THROW(rel::array_survival(0.01, 1.0, a, wrong), faecc::InvalidArgument);
}

TEST(ArraySurvival, SmallArrayAgreesWithMonteCarlo) {
  // n=9, m=1, s=4, one word with a hard fault, t/t_life = 0.01.
  rel::ArraySpec a{.k = 4, .n = 9, .s = 4, .m = 1};
  const rel::HardFaultProfile prof{{3, 1}};
  const double analytic = rel::array_survival(0.01, 1.0, a, prof);
  std::mt19937_64 gen(7);
  std::exponential_distribution<double> life(1.0);
  const int trials = 100000;
  int ok = 0;
  for (int tr = 0; tr < trials; ++tr) {
    bool alive = true;
    for (int w = 0; w < 4 && alive; ++w) {
      const int hard = w == 0 ? 1 : 0;
      int flips = 0;
      for (int b = hard; b < 9; ++b) flips += life(gen) < 0.01;
      alive = hard + flips <= 1;
    }
    ok += alive;
  }
  const double p = double(ok) / trials;
  EXPECT_NEAR(p, analytic, 3 * std::sqrt(analytic * (1 - analytic) / trials));
}

TEST(Quadrature, ExponentialMeanAcrossScales) {
  for (double tau : {1e-3, 1.0, 1e9, 1e15}) {
    const double got = faecc::mttf_numeric([&](double t) { return std::exp(-t / tau); }, tau);
    EXPECT_NEAR(got, tau, 1e-6 * tau);
    // A poorly chosen reference scale still converges.
    const double off = faecc::mttf_numeric([&](double t) { return std::exp(-t / tau); }, tau * 1e-4);
    EXPECT_NEAR(off, tau, 1e-6 * tau);
  }
}

TEST(Quadrature, RawArrayAndSingleCell) {
  const double t_life = 3.6e12;
  EXPECT_NEAR(faecc::mttf_numeric([&](double t) { return rel::retention_survival(t, t_life); }, t_life),
              rel::mttf_single(t_life), 1e-6 * t_life);
  for (std::uint64_t n : {2ull, 137ull, 33554432ull}) {
    const double expect = rel::mttf_raw_array(t_life, n);
    const double got = faecc::mttf_numeric([&](double t) { return std::exp(-double(n) * t / t_life); }, t_life / n);
    EXPECT_NEAR(got, expect, 1e-6 * expect);
  }
}

TEST(Quadrature, EccSurvivalAgreesWithIndependentQuadrature) {
  for (std::uint64_t m : {1ull, 2ull, 4ull}) {
    rel::ArraySpec a{.k = 128, .n = 128 + 8 * m + 1, .s = 4096, .m = m};
    const auto prof = rel::HardFaultProfile::healthy(a.s);
    auto s = [&](double x) { return rel::array_survival(x, 1.0, a, prof); };
    const double ours = faecc::mttf_numeric(s, 1.0 / double(a.n * a.s));
    const double ref = boost_integral(s);
    EXPECT_NEAR(ours, ref, 1e-6 * ref) << "m=" << m;
  }
}

TEST(Quadrature, RejectsIncreasingAndNonDecaying) {
  EXPECT_THROW(faecc::mttf_numeric([](double t) { return std::min(1.0, 0.5 + t); }, 1.0), faecc::InvalidArgument);
  EXPECT_THROW(faecc::mttf_numeric([](double) { return 1.0; }, 1.0), faecc::ConvergenceError);
  EXPECT_THROW(faecc::mttf_numeric([](double t) { return std::exp(-t); }, 0.0), faecc::InvalidArgument);
}

TEST(Quadrature, SecdedArrayMttfAgreesWithEventSampler) {
  // 4 MB of 128-bit words under SECDED, in units of t_life.
  const std::uint64_t n = 137, s = 262144, m = 1;
  rel::ArraySpec a{.k = 128, .n = n, .s = s, .m = m};
  const auto prof = rel::HardFaultProfile::healthy(s);
  const double analytic =
      faecc::mttf_numeric([&](double x) { return rel::array_survival(x, 1.0, a, prof); }, 1.0 / double(n * s));
  std::mt19937_64 gen(11);
  const int trials = 6000;
  double sum = 0.0;
  for (int i = 0; i < trials; ++i) sum += sample_first_failure(n, s, m, 1.0, gen);
  EXPECT_NEAR(sum / trials, analytic, 0.02 * analytic);
}

TEST(RequiredEbn, SingleBitOneFit) {
  rel::ArraySpec a{.k = 1, .n = 1, .s = 1, .m = 0, .fit_target = 1.0};
  const auto r = rel::required_ebn(a, rel::HardFaultProfile::healthy(1));
  EXPECT_NEAR(r.barrier.ebn, std::log(3.6e21), 0.01);
  EXPECT_NEAR(r.barrier.ebn, 50.0, 0.5);
  EXPECT_GE(r.mttf_seconds, r.target_seconds);
  EXPECT_LT((r.mttf_seconds - r.target_seconds) / r.target_seconds, 1e-4);
}

TEST(RequiredEbn, RawFourMegabyte) {
  rel::ArraySpec a{.k = 128, .n = 128, .s = 262144, .m = 0};
  const auto r = rel::required_ebn(a, rel::HardFaultProfile::healthy(a.s));
  EXPECT_NEAR(r.barrier.ebn, std::log(33554432.0 * 3.6e21), 0.05);
  EXPECT_NEAR(r.barrier.ebn, 66.97, 0.05);
}

TEST(RequiredEbn, MonotoneInSizeAndCorrection) {
  double prev = 0.0;
  for (std::uint64_t s : {1ull, 64ull, 4096ull, 262144ull}) {
    rel::ArraySpec a{.k = 128, .n = 137, .s = s, .m = 1};
    const double e = rel::required_ebn(a, rel::HardFaultProfile::healthy(s)).barrier.ebn;
    EXPECT_GE(e, prev);
    prev = e;
  }
  prev = 1e9;
  for (std::uint64_t m = 0; m <= 4; ++m) {
    rel::ArraySpec a{.k = 128, .n = m == 0 ? 128 : 128 + 8 * m + 1, .s = 262144, .m = m};
    const double e = rel::required_ebn(a, rel::HardFaultProfile::healthy(a.s)).barrier.ebn;
    EXPECT_LT(e, prev) << "m=" << m;
    prev = e;
  }
}

TEST(RequiredEbn, DefectPenaltyPositiveAndShrinking) {
  double prev_penalty = 1e9;
  for (std::uint64_t m = 1; m <= 4; ++m) {
    rel::ArraySpec a{.k = 128, .n = 128 + 8 * m + 1, .s = 262144, .m = m};
    const double healthy = rel::required_ebn(a, rel::HardFaultProfile::healthy(a.s)).barrier.ebn;
    const auto prof = rel::expected_fault_histogram(1e-5, a);
    const double degraded = rel::required_ebn(a, prof).barrier.ebn;
    const double penalty = degraded - healthy;
    EXPECT_GT(penalty, 0.0) << "m=" << m;
    EXPECT_LT(penalty, prev_penalty) << "m=" << m;
    prev_penalty = penalty;
  }
}

TEST(RequiredEbn, UnattainableTarget) {
  rel::ArraySpec a{.k = 1, .n = 1, .s = 1, .m = 0, .fit_target = 1e-40};
  EXPECT_THROW(rel::required_ebn(a, rel::HardFaultProfile::healthy(1)), faecc::ConvergenceError);
}

TEST(FaultHistogram, ExpectedCounts) {
  rel::ArraySpec a{.k = 128, .n = 137, .s = 262144, .m = 1};
  const auto none = rel::expected_fault_histogram(0.0, a);
  ASSERT_EQ(none.counts.size(), 1u);
  EXPECT_EQ(none.counts[0], a.s);

  const auto prof = rel::expected_fault_histogram(1e-5, a);
  // s n p (1-p)^(n-1) = 358.65
  ASSERT_GE(prof.counts.size(), 2u);
  EXPECT_EQ(prof.counts[1], 359u);
  EXPECT_EQ(prof.words(), a.s);

  for (double p : {1e-3, 0.05, 0.5, 1.0}) EXPECT_EQ(rel::expected_fault_histogram(p, a).words(), a.s) << p;
  EXPECT_THROW(rel::expected_fault_histogram(-0.1, a), faecc::InvalidArgument);
  EXPECT_THROW(rel::expected_fault_histogram(1.1, a), faecc::InvalidArgument);
}

TEST(FaultHistogram, SampledIsSeededAndConserving) {
  rel::ArraySpec a{.k = 128, .n = 137, .s = 262144, .m = 1};
  const auto x = rel::sampled_fault_histogram(1e-5, a, 5);
  const auto y = rel::sampled_fault_histogram(1e-5, a, 5);
  EXPECT_EQ(x.counts, y.counts);
  EXPECT_EQ(x.words(), a.s);
  ASSERT_GE(x.counts.size(), 2u);
  // Binomial(s, ~1.37e-3) around 358.6, sd ~ 19.
  EXPECT_NEAR(double(x.counts[1]), 358.6, 4 * 19.0);
}
