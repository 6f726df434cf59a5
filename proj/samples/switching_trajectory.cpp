// Critical current of the nominal free layer for an 8 ns pulse, then the
// magnetization trajectory at 1.2 J_c as CSV on stdout.

#include <cstdio>
#include <iostream>

#include "faecc/llgs.hpp"

using namespace faecc::device;

int main() {
  const auto p = with_thermal_stability(LlgsParams{}, 60.0);
  const double jc = critical_current_density(p, 8e-9);
  std::fprintf(stderr, "Hk = %.1f Oe, J_c(8 ns) = %.4e A/m^2\n", p.hk, jc);
  const auto m0 = tilted(p.easy_axis, median_initial_angle(60.0));
  write_trajectory_csv(std::cout, llgs_simulate(p, m0, 1.2 * jc, 8e-9, {.sample_every = 50}));
}
