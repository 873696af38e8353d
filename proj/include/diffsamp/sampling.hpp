#pragma once

/**
 * Temperature scaling, seeded categorical selection, and trace replay.
 *
 * Temperature rescales probabilities as p^(1/tau) over the existing support,
 * so it never adds or removes tokens. Replaying a trace applies one of two
 * pipeline orders per step:
 *
 *   position = after    truncate, then temperature, then sample
 *   position = before   temperature, then truncate, then sample
 *
 * The after-order keeps the truncation's kept set invariant under any tau;
 * the before-order can move a derivative cut because rescaling reshapes the
 * gaps. tau = 0 always means greedy selection, never a division.
 */

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "diffsamp/common.hpp"
#include "diffsamp/distribution.hpp"
#include "diffsamp/rng.hpp"
#include "diffsamp/truncation.hpp"

namespace diffsamp {

struct TemperatureSpec {
  enum class Position { Before, After };

  double tau = 1.0;
  Position position = Position::After;
};

// p^(1/tau), renormalized over the support; zero entries stay zero.
inline ProbDist apply_temperature(const ProbDist& d, double tau) {
  if (!(tau > 0.0)) {
    throw InvalidParamError("apply_temperature: tau must be positive");
  }
  std::vector<double> out(d.size(), 0.0);
  double max_log = -std::numeric_limits<double>::infinity();
  for (double p : d.probs) {
    if (p > 0.0) {
      max_log = std::max(max_log, std::log(p) / tau);
    }
  }
  double sum = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    if (d.probs[i] > 0.0) {
      out[i] = std::exp(std::log(d.probs[i]) / tau - max_log);
      sum += out[i];
    }
  }
  for (double& v : out) {
    v /= sum;
  }
  return ProbDist{std::move(out)};
}

inline ProbDist apply_temperature(const TruncationResult& r, double tau) {
  return apply_temperature(r.renorm, tau);
}

// Inverse-CDF draw: one uniform variate scanned against the cumulative sums
// of the descending-sorted support. Deterministic given (d, seed).
inline size_t sample_index(const ProbDist& d, uint64_t seed) {
  const SortedView s = sort_desc(d);
  Xoshiro256ss rng(seed);
  const double u = rng.uniform01();
  double total = 0.0;
  for (double p : s.sorted_probs) {
    total += p;
  }
  double cum = 0.0;
  size_t last = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.sorted_probs[i] <= 0.0) {
      break;
    }
    cum += s.sorted_probs[i];
    last = i;
    if (u * total < cum) {
      return s.perm[i];
    }
  }
  return s.perm[last];
}

struct Trace {
  std::string id;
  std::vector<std::vector<double>> steps;  // raw probabilities per position
};

// Replays a trace under one strategy. Seeds are derived per (trace id, step)
// so records can be processed in any order or in parallel.
inline std::vector<size_t> run_trace(const Trace& trace, Strategy strategy,
                                     const StrategyConfig& cfg,
                                     const TemperatureSpec& temp,
                                     uint64_t base_seed) {
  if (temp.tau < 0.0) {
    throw InvalidParamError("run_trace: tau must be non-negative");
  }
  std::vector<size_t> tokens;
  tokens.reserve(trace.steps.size());
  for (size_t step = 0; step < trace.steps.size(); ++step) {
    try {
      const ProbDist d = normalize(trace.steps[step]);
      const uint64_t seed = derive_seed(base_seed, trace.id, step);
      if (temp.tau == 0.0) {
        // tau = 0 denotes greedy selection for every strategy.
        tokens.push_back(greedy_mask(sort_desc(d)).kept.front());
        continue;
      }
      if (temp.position == TemperatureSpec::Position::After) {
        const TruncationResult r = truncate(strategy, sort_desc(d), cfg);
        tokens.push_back(sample_index(apply_temperature(r, temp.tau), seed));
      } else {
        const ProbDist scaled = apply_temperature(d, temp.tau);
        const TruncationResult r = truncate(strategy, sort_desc(scaled), cfg);
        tokens.push_back(sample_index(r.renorm, seed));
      }
    } catch (const Error& e) {
      throw Error("trace '" + trace.id + "' step " + std::to_string(step) +
                  ": " + e.what());
    }
  }
  return tokens;
}

}  // namespace diffsamp
