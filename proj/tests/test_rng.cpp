#include <gtest/gtest.h>

#include <cmath>

#include "faecc/parallel.hpp"
#include "faecc/rng.hpp"

using faecc::CounterRng;
using faecc::DrawKey;
using faecc::Philox4x32;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                        {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, SameKeySameDraw) {
  const CounterRng a(42), b(42), c(43);
  const DrawKey k{.trial = 3, .word = 7, .bit = 5, .event = 1, .lane = faecc::kLaneFlipTime};
  EXPECT_EQ(a.uniform(k), b.uniform(k));
  EXPECT_NE(a.uniform(k), c.uniform(k));
  DrawKey other = k;
  other.lane = faecc::kLaneWriteFail;
  EXPECT_NE(a.uniform(k), a.uniform(other));
}

TEST(CounterRng, UniformAndNormalMoments) {
  const CounterRng rng(2024);
  const int n = 200000;
  double su = 0, sz = 0, szz = 0;
  for (int i = 0; i < n; ++i) {
    const DrawKey k{.word = static_cast<std::uint32_t>(i)};
    const double u = rng.uniform(k);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal(k);
    sz += z;
    szz += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sz / n, 0.0, 4 / std::sqrt(double(n)));
  EXPECT_NEAR(szz / n, 1.0, 4 * std::sqrt(2.0 / n));
}

TEST(ParallelFor, ResultsIndependentOfWorkerCount) {
  const CounterRng rng(9);
  auto run = [&](unsigned workers) {
    std::vector<double> out(1000);
    faecc::parallel_for(out.size(), workers,
                        [&](std::size_t i) { out[i] = rng.exponential({.trial = std::uint32_t(i)}, 2.0); });
    return out;
  };
  EXPECT_EQ(run(1), run(4));
}
