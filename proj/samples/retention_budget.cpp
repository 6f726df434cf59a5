// Thermal stability needed by a 1 MB cache with 128-bit words under each ECC
// strength, with and without manufacturing defects.

#include <cstdio>

#include "faecc/reliability.hpp"

namespace rel = faecc::reliability;

int main() {
  const std::uint64_t words = 1048576 * 8 / 128;
  std::printf("m  n    healthy  p_defect=1e-5\n");
  for (std::uint64_t m = 0; m <= 2; ++m) {
    const rel::ArraySpec a{.k = 128, .n = m ? 128 + 8 * m + 1 : 128, .s = words, .m = m};
    const double healthy = rel::required_ebn(a, rel::HardFaultProfile::healthy(words)).barrier.ebn;
    const double defects = rel::required_ebn(a, rel::expected_fault_histogram(1e-5, a)).barrier.ebn;
    std::printf("%llu  %llu  %.3f   %.3f\n", (unsigned long long)m, (unsigned long long)a.n, healthy, defects);
  }
}
