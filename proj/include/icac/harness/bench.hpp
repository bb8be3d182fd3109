#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace icac {

struct BenchRow {
  int batch = 0;
  double cacla_us = 0.0;  // feature-space actor update, per minibatch
  double ddpg_us = 0.0;   // full sampled-policy-gradient actor update
};

struct BenchTable {
  std::vector<BenchRow> rows;
  // per-doubling time ratios between consecutive measured sizes
  std::vector<double> cacla_doubling;
  std::vector<double> ddpg_doubling;
};

// Wall time of the actor update for the CACLA-style actor (a few hundred
// parameters on the feature vector) vs the DDPG-style actor (conv net on
// pixels, plus the grad_a Q pass) across minibatch sizes.
BenchTable bench_update_costs(const std::vector<int>& sizes = {8, 32, 128},
                              std::uint64_t seed = 42);

void print_bench(const BenchTable& t, std::ostream& os);

}  // namespace icac
