// Minimal library walkthrough: truncate one distribution with every strategy
// and print the kept tokens with their renormalized probabilities.

#include <cstdio>

#include "diffsamp/diffsamp.hpp"

int main() {
  using namespace diffsamp;

  const ProbDist dist = normalize({0.37, 0.25, 0.07, 0.04, 0.03, 0.02, 0.01,
                                   0.008, 0.006, 0.004});
  const SortedView sorted = sort_desc(dist);
  const StrategyConfig cfg;  // p_lb = 0.9, p_min = 0.1, the usual defaults

  const Strategy strategies[] = {Strategy::Greedy,  Strategy::TopP,
                                 Strategy::MinP,    Strategy::Eta,
                                 Strategy::Typical, Strategy::DiffCut,
                                 Strategy::DiffLb,  Strategy::DiffMinp};

  for (Strategy strategy : strategies) {
    const TruncationResult r = truncate(strategy, sorted, cfg);
    std::printf("%-10s keeps %zu:", strategy_name(strategy), r.kept_count());
    for (size_t token : r.kept) {
      std::printf(" %zu(%.3f)", token, r.renorm[token]);
    }
    std::printf("\n");
  }

  // Seeded sampling after truncation stays inside the kept set.
  const TruncationResult cut = diff_cut(sorted);
  const ProbDist heated = apply_temperature(cut, 2.0);
  std::printf("diff_cut + tau=2 sample: token %zu\n", sample_index(heated, 42));
  return 0;
}
