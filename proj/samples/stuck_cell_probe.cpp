// A word with one stuck cell and one retention flip: SECDED detects a double
// error, the FaECC probe finds the stuck cell and corrects both.

#include <cstdio>
#include <iostream>

#include "faecc/array_sim.hpp"

using namespace faecc;

int main() {
  const auto scheme = ecc::build_scheme(8, 128, ecc::Mode::FAECC);
  const reliability::ArraySpec spec{.k = 128, .n = scheme.n(), .s = 4, .m = 1};
  sim::SimArray arr(spec, scheme, {.retention = false}, 1, 0);
  arr.set_trace(&std::cout);

  ecc::Bits data(128, 0);
  for (std::size_t i = 0; i < data.size(); i += 3) data[i] = 1;
  arr.inject_stuck(2, 10, 1);  // data bit 10 is 0, so the cell is wrong
  arr.write_word(2, data, 0.0);
  arr.inject_flip(2, 77);

  const auto first = arr.read_word(2, 1.0);
  const auto second = arr.read_word(2, 2.0);
  std::printf("first read:  %s, probe %s, data %s\n", ecc::to_string(first.outcome).c_str(),
              first.probe_used ? "used" : "unused", first.data == data ? "intact" : "corrupt");
  std::printf("second read: %s, data %s\n", ecc::to_string(second.outcome).c_str(),
              second.data == data ? "intact" : "corrupt");
}
