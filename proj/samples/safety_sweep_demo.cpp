// Sweeps the mixture-safety simulator over a grid of support sizes and prints
// how often the derivative cut stays inside the true support.

#include <cstdio>

#include "diffsamp/diffsamp.hpp"

int main() {
  using namespace diffsamp;

  const size_t vocab = 128;
  std::printf("vocab=%zu  (condition 2 boundary: D(D+1) < %zu)\n", vocab, 2 * vocab);
  std::printf("%8s %12s %10s %10s\n", "support", "cond2", "trials", "safe");

  for (size_t support : {4, 8, 15, 16, 24, 48, 96}) {
    SamplerSpec spec;
    spec.vocab_sizes = {vocab};
    spec.support_min = support;
    spec.support_max = support;
    const SafetyReport report = monte_carlo_safety(spec, 2000, 7);
    uint64_t safe = 0;
    for (const auto& [key, cell] : report.cells) {
      safe += cell.safe;
    }
    std::printf("%8zu %12s %10llu %10llu\n", support,
                prop2_inequality(support, vocab) ? "holds" : "fails",
                static_cast<unsigned long long>(report.trials),
                static_cast<unsigned long long>(safe));
  }
  return 0;
}
