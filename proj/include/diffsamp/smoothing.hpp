#pragma once

/**
 * Mixture laboratory for smoothing-safety analysis.
 *
 * A learned distribution is modeled as lambda * P + (1 - lambda) * Q, where P
 * is a descending "true" distribution whose support has size D (exact zeros
 * beyond it) and Q is band-limited noise with every entry inside
 * ((1 - delta)/V, (1 + delta)/V). Derivative truncation of the mixture is
 * "safe" when every kept token belongs to the true support.
 *
 * Two sufficient conditions are checked per model:
 *
 *   condition 1   the largest consecutive gap of P (including the drop to
 *                 zero at the support boundary) exceeds 1/V
 *   condition 2   D * (D + 1) < 2 * V, the exact integer form of the
 *                 equidistant worst case
 *
 * monte_carlo_safety draws models at random and counts trials where either
 * condition holds yet truncation keeps a token from outside the support;
 * the count is expected to stay at zero.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "diffsamp/common.hpp"
#include "diffsamp/distribution.hpp"
#include "diffsamp/rng.hpp"
#include "diffsamp/truncation.hpp"

namespace diffsamp {

struct TrueDistribution {
  std::vector<double> probs;  // descending, exactly zero beyond the support
  size_t support = 0;         // D, in [1, vocab]

  size_t vocab() const { return probs.size(); }
};

struct SmoothingDistribution {
  std::vector<double> q;
  double delta = 0.5;  // noise amplitude in (0, 1)
};

struct MixtureModel {
  TrueDistribution true_dist;
  SmoothingDistribution smooth;
  double lambda = 1.0;      // mixing weight in (0, 1]
  double lambda_bar = 0.8;  // constant lower bound for lambda
  double alpha = 0.001;     // smoothing contribution scale in [0, 1]

  size_t vocab() const { return true_dist.vocab(); }
};

// Largest consecutive gap of the true distribution, including the final drop
// from the last support token to zero.
inline double support_max_gap(const TrueDistribution& t) {
  double best = 0.0;
  for (size_t i = 0; i < t.support; ++i) {
    const double next = (i + 1 < t.vocab()) ? t.probs[i + 1] : 0.0;
    best = std::max(best, t.probs[i] - next);
  }
  return best;
}

// Entropy-dependent lower bound for lambda; the effective floor is the max of
// this and the constant lambda_bar.
inline double lambda_floor(const MixtureModel& m) {
  const double h = entropy(ProbDist{m.true_dist.probs});
  const double entropy_bound =
      1.0 - static_cast<double>(m.vocab()) * m.alpha * std::exp(-h) / (1.0 + m.smooth.delta);
  return std::max(entropy_bound, m.lambda_bar);
}

namespace detail {

inline void validate_model(const MixtureModel& m) {
  const size_t v = m.vocab();
  if (v == 0) {
    throw InvalidModelError("mixture: empty vocabulary");
  }
  if (m.smooth.q.size() != v) {
    throw InvalidModelError("mixture: smoothing size mismatch");
  }
  if (m.true_dist.support < 1 || m.true_dist.support > v) {
    throw InvalidModelError("mixture: support size out of range");
  }
  if (!(m.smooth.delta > 0.0 && m.smooth.delta < 1.0)) {
    throw InvalidModelError("mixture: delta must lie in (0, 1)");
  }
  if (!(m.lambda > 0.0 && m.lambda <= 1.0)) {
    throw InvalidModelError("mixture: lambda must lie in (0, 1]");
  }
  if (!(m.alpha >= 0.0 && m.alpha <= 1.0)) {
    throw InvalidModelError("mixture: alpha must lie in [0, 1]");
  }
  double sum = 0.0;
  for (size_t i = 0; i < v; ++i) {
    const double p = m.true_dist.probs[i];
    if (p < 0.0 || (i + 1 < v && m.true_dist.probs[i + 1] > p)) {
      throw InvalidModelError("mixture: true distribution not descending");
    }
    if (i >= m.true_dist.support && p != 0.0) {
      throw InvalidModelError("mixture: positive mass beyond the support");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw InvalidModelError("mixture: true distribution does not sum to 1");
  }
  const double lo = (1.0 - m.smooth.delta) / static_cast<double>(v);
  const double hi = (1.0 + m.smooth.delta) / static_cast<double>(v);
  double qsum = 0.0;
  for (double q : m.smooth.q) {
    if (!(q > lo && q < hi)) {
      throw InvalidModelError("mixture: smoothing entry outside the noise band");
    }
    qsum += q;
  }
  if (std::fabs(qsum - 1.0) > 1e-9) {
    throw InvalidModelError("mixture: smoothing does not sum to 1");
  }
  if (m.lambda < lambda_floor(m) - 1e-12) {
    throw InvalidModelError("mixture: lambda below its admissible floor");
  }
}

}  // namespace detail

// Element-wise mixture lambda * p + (1 - lambda) * q.
inline ProbDist mix(const MixtureModel& m) {
  detail::validate_model(m);
  std::vector<double> out(m.vocab());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = m.lambda * m.true_dist.probs[i] + (1.0 - m.lambda) * m.smooth.q[i];
  }
  return ProbDist{std::move(out)};
}

struct SafetyOutcome {
  bool safe = false;
  size_t cut_count = 0;  // K: number of kept tokens after the derivative cut
  size_t support = 0;    // D
};

// Runs the derivative cut on the sorted mixture and checks that every kept
// token index falls inside the true support. The mixture can reorder tokens
// relative to the true sort, so membership is what gets checked, not K <= D.
inline SafetyOutcome is_safe(const MixtureModel& m) {
  const ProbDist mixture = mix(m);
  const TruncationResult r = diff_cut(sort_desc(mixture));
  SafetyOutcome outcome;
  outcome.cut_count = r.kept_count();
  outcome.support = m.true_dist.support;
  outcome.safe = std::all_of(r.kept.begin(), r.kept.end(), [&m](size_t idx) {
    return idx < m.true_dist.support;
  });
  return outcome;
}

inline bool prop1_condition(const MixtureModel& m) {
  return support_max_gap(m.true_dist) > 1.0 / static_cast<double>(m.vocab());
}

// Exact integer inequality, preferred over the sqrt(2V) approximation.
inline bool prop2_inequality(size_t support, size_t vocab) {
  return support * (support + 1) < 2 * vocab;
}

inline bool prop2_condition(const MixtureModel& m) {
  return prop2_inequality(m.true_dist.support, m.vocab());
}

struct SamplerSpec {
  std::vector<size_t> vocab_sizes{16, 64, 256, 1024};
  size_t support_min = 1;     // 0-or-1 means "from 1"; capped at vocab
  size_t support_max = 0;     // 0 means "up to vocab"
  double delta_min = 0.01;
  double delta_max = 0.99;
  double alpha = 0.001;
  double lambda_bar = 0.8;
};

inline void validate_spec(const SamplerSpec& spec) {
  if (spec.vocab_sizes.empty()) {
    throw InvalidParamError("sampler spec: no vocabulary sizes");
  }
  for (size_t v : spec.vocab_sizes) {
    if (v < 2) {
      throw InvalidParamError("sampler spec: vocabulary size must be >= 2");
    }
  }
  if (!(spec.delta_min > 0.0 && spec.delta_max < 1.0 && spec.delta_min <= spec.delta_max)) {
    throw InvalidParamError("sampler spec: delta range must lie inside (0, 1)");
  }
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
    throw InvalidParamError("sampler spec: alpha must lie in [0, 1]");
  }
  if (!(spec.lambda_bar > 0.0 && spec.lambda_bar <= 1.0)) {
    throw InvalidParamError("sampler spec: lambda_bar must lie in (0, 1]");
  }
  if (spec.support_max != 0 && spec.support_min > spec.support_max) {
    throw InvalidParamError("sampler spec: empty support range");
  }
}

// Draws one admissible model: true distribution from sorted normalized
// exponentials zeroed beyond a drawn support size, smoothing uniform in the
// open band (renormalized, redrawn if renormalization exits the band), and
// lambda uniform between its floor and 1.
inline MixtureModel draw_model(const SamplerSpec& spec, size_t vocab, Xoshiro256ss& rng) {
  MixtureModel m;
  m.alpha = spec.alpha;
  m.lambda_bar = spec.lambda_bar;

  const size_t lo = std::max<size_t>(1, spec.support_min);
  const size_t hi = std::min(vocab, spec.support_max == 0 ? vocab : spec.support_max);
  const size_t support = lo + static_cast<size_t>(rng.next() % (hi - lo + 1));

  std::vector<double> probs(vocab, 0.0);
  double sum = 0.0;
  for (size_t i = 0; i < support; ++i) {
    probs[i] = -std::log(rng.uniform_open(0.0, 1.0));
    sum += probs[i];
  }
  for (size_t i = 0; i < support; ++i) {
    probs[i] /= sum;
  }
  std::sort(probs.begin(), probs.begin() + static_cast<long>(support),
            std::greater<double>());
  m.true_dist = TrueDistribution{std::move(probs), support};

  m.smooth.delta = rng.uniform_open(spec.delta_min, spec.delta_max);
  const double band_lo = (1.0 - m.smooth.delta) / static_cast<double>(vocab);
  const double band_hi = (1.0 + m.smooth.delta) / static_cast<double>(vocab);
  for (;;) {
    std::vector<double> q(vocab);
    double qsum = 0.0;
    for (double& entry : q) {
      entry = rng.uniform_open(band_lo, band_hi);
      qsum += entry;
    }
    bool inside = true;
    for (double& entry : q) {
      entry /= qsum;
      if (!(entry > band_lo && entry < band_hi)) {
        inside = false;
      }
    }
    if (inside) {
      m.smooth.q = std::move(q);
      break;
    }
  }

  const double floor = lambda_floor(m);
  m.lambda = floor >= 1.0 ? 1.0 : floor + rng.uniform01() * (1.0 - floor);
  return m;
}

struct SafetyCell {
  uint64_t safe = 0;
  uint64_t unsafe = 0;

  uint64_t total() const { return safe + unsafe; }
  bool operator==(const SafetyCell&) const = default;
};

struct SafetyReport {
  uint64_t trials = 0;
  uint64_t violations = 0;  // (condition 1 or 2 holds) and not safe
  // Keyed by (prop1, prop2) truth pair.
  std::map<std::pair<bool, bool>, SafetyCell> cells;
  // Keyed by (vocab, either condition holds).
  std::map<std::pair<size_t, bool>, SafetyCell> by_vocab;

  uint64_t covered() const {
    uint64_t n = 0;
    for (const auto& [key, cell] : cells) {
      if (key.first || key.second) {
        n += cell.total();
      }
    }
    return n;
  }

  // Safety rate over trials where neither condition holds; 1 when empty.
  double outside_safety_rate() const {
    const auto it = cells.find({false, false});
    if (it == cells.end() || it->second.total() == 0) {
      return 1.0;
    }
    return static_cast<double>(it->second.safe) /
           static_cast<double>(it->second.total());
  }

  void merge(const SafetyReport& other) {
    trials += other.trials;
    violations += other.violations;
    for (const auto& [key, cell] : other.cells) {
      cells[key].safe += cell.safe;
      cells[key].unsafe += cell.unsafe;
    }
    for (const auto& [key, cell] : other.by_vocab) {
      by_vocab[key].safe += cell.safe;
      by_vocab[key].unsafe += cell.unsafe;
    }
  }
};

// Vocabulary sizes are assigned round-robin by trial index and every trial
// seeds its own generator, so the report is independent of execution order.
inline SafetyReport monte_carlo_safety(const SamplerSpec& spec, uint64_t trials,
                                       uint64_t seed, uint64_t first_trial = 0) {
  validate_spec(spec);
  if (trials < 1) {
    throw InvalidParamError("monte_carlo_safety: trials must be >= 1");
  }
  SafetyReport report;
  for (uint64_t t = first_trial; t < first_trial + trials; ++t) {
    const size_t vocab = spec.vocab_sizes[t % spec.vocab_sizes.size()];
    Xoshiro256ss rng(derive_seed(seed, "trial", t));
    const MixtureModel m = draw_model(spec, vocab, rng);
    const bool p1 = prop1_condition(m);
    const bool p2 = prop2_condition(m);
    const SafetyOutcome outcome = is_safe(m);
    report.trials += 1;
    SafetyCell& cell = report.cells[{p1, p2}];
    SafetyCell& vcell = report.by_vocab[{vocab, p1 || p2}];
    if (outcome.safe) {
      cell.safe += 1;
      vcell.safe += 1;
    } else {
      cell.unsafe += 1;
      vcell.unsafe += 1;
      if (p1 || p2) {
        report.violations += 1;
      }
    }
  }
  return report;
}

}  // namespace diffsamp
