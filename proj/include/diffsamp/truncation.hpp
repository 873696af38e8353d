#pragma once

/**
 * Truncation strategies over a descending-sorted next-token distribution.
 *
 * The derivative family cuts where the forward difference of the sorted
 * probabilities is most negative, i.e. after the largest consecutive gap:
 *
 *   diff_cut    unrestricted argmin of the difference vector.
 *   diff_lb     positions whose cumulative mass is still below p_lb are
 *               masked out first, so the kept prefix carries at least p_lb
 *               of the original mass (a corrected top-p).
 *   diff_minp   positions strictly before the last token whose probability
 *               exceeds p_min * max are masked out, so no discarded token is
 *               more probable than that threshold (a corrected min-p).
 *
 * The baselines (greedy, top-p, min-p, eta, locally typical) share the same
 * TruncationResult contract. All functions are pure; ties in any argmin or
 * argmax resolve to the lowest sorted position so results are deterministic.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "diffsamp/common.hpp"
#include "diffsamp/distribution.hpp"

namespace diffsamp {

struct TruncationResult {
  size_t cut_idx = 0;         // last kept sorted position, inclusive
  std::vector<size_t> kept;   // original token indices, probability-descending
  ProbDist renorm;            // full-vocabulary vector, zero outside kept

  size_t kept_count() const { return kept.size(); }
};

struct StrategyConfig {
  double p_lb = 0.9;       // mass lower bound for diff_lb
  double p_min = 0.1;      // probability-ratio upper bound for diff_minp
  double top_p = 0.9;      // nucleus mass for top_p
  double min_p = 0.1;      // ratio threshold for min_p
  double eta = 0.0003;     // eta-sampling threshold parameter
  double typical_p = 0.9;  // mass bound for locally typical
};

enum class Strategy {
  Greedy,
  TopP,
  MinP,
  Eta,
  Typical,
  DiffCut,
  DiffLb,
  DiffMinp,
};

namespace detail {

// First index of the minimum over deltas[first_eligible..N-1].
inline size_t argmin_from(const std::vector<double>& deltas, size_t first_eligible) {
  size_t best = first_eligible;
  for (size_t i = first_eligible + 1; i < deltas.size(); ++i) {
    if (deltas[i] < deltas[best]) {
      best = i;
    }
  }
  return best;
}

// Index of the last strictly positive sorted probability. The sorted vector
// always has positive total mass, so position 0 qualifies as a fallback.
inline size_t last_positive(const SortedView& s) {
  size_t j = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.sorted_probs[i] > 0.0) {
      j = i;
    }
  }
  return j;
}

// Builds the result for a kept prefix [0, cut] of the sorted order.
inline TruncationResult prefix_result(const SortedView& s, size_t cut) {
  TruncationResult r;
  r.cut_idx = cut;
  r.kept.assign(s.perm.begin(), s.perm.begin() + static_cast<long>(cut) + 1);
  double mass = 0.0;
  for (size_t i = 0; i <= cut; ++i) {
    mass += s.sorted_probs[i];
  }
  std::vector<double> out(s.size(), 0.0);
  for (size_t i = 0; i <= cut; ++i) {
    out[s.perm[i]] = s.sorted_probs[i] / mass;
  }
  r.renorm = ProbDist{std::move(out)};
  return r;
}

// Builds the result for an arbitrary set of kept sorted positions (ascending).
inline TruncationResult positions_result(const SortedView& s,
                                         const std::vector<size_t>& positions) {
  TruncationResult r;
  r.cut_idx = positions.back();
  double mass = 0.0;
  for (size_t pos : positions) {
    mass += s.sorted_probs[pos];
  }
  std::vector<double> out(s.size(), 0.0);
  r.kept.reserve(positions.size());
  for (size_t pos : positions) {
    r.kept.push_back(s.perm[pos]);
    out[s.perm[pos]] = s.sorted_probs[pos] / mass;
  }
  r.renorm = ProbDist{std::move(out)};
  return r;
}

}  // namespace detail

// Cut right after the largest consecutive gap of the sorted distribution.
inline TruncationResult diff_cut(const SortedView& s) {
  const DeltaVector dv = discrete_derivative(s);
  return detail::prefix_result(s, detail::argmin_from(dv.deltas, 0));
}

// Derivative cut restricted so the kept prefix holds at least p_lb of the
// mass: positions with cumulative sum strictly below p_lb are ineligible.
// The bound is capped at the total positive mass so p_lb = 1 stays reachable
// under floating-point sums slightly short of 1.
inline TruncationResult diff_lb(const SortedView& s, double p_lb) {
  if (!(p_lb >= 0.0 && p_lb <= 1.0)) {
    throw InvalidParamError("diff_lb: p_lb must lie in [0, 1]");
  }
  const DeltaVector dv = discrete_derivative(s);
  double total = 0.0;
  for (double p : s.sorted_probs) {
    total += p;
  }
  const double bound = std::min(p_lb, total);
  double cum = 0.0;
  size_t first_eligible = detail::last_positive(s);
  for (size_t i = 0; i < s.size(); ++i) {
    cum += s.sorted_probs[i];
    if (cum >= bound) {
      first_eligible = i;
      break;
    }
  }
  return detail::prefix_result(s, detail::argmin_from(dv.deltas, first_eligible));
}

// Derivative cut restricted so no discarded token is more probable than
// p_min * max: deltas strictly before the last position above that threshold
// are ineligible. With p_min = 1 nothing exceeds the max, the mask is empty
// and the strategy reduces to diff_cut.
inline TruncationResult diff_minp(const SortedView& s, double p_min) {
  if (!(p_min >= 0.0 && p_min <= 1.0)) {
    throw InvalidParamError("diff_minp: p_min must lie in [0, 1]");
  }
  const DeltaVector dv = discrete_derivative(s);
  const double threshold = p_min * s.sorted_probs[0];
  size_t first_eligible = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.sorted_probs[i] > threshold) {
      first_eligible = i;
    }
  }
  return detail::prefix_result(s, detail::argmin_from(dv.deltas, first_eligible));
}

// Minimal prefix whose cumulative mass reaches p (nucleus sampling).
inline TruncationResult top_p(const SortedView& s, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw InvalidParamError("top_p: p must lie in (0, 1]");
  }
  double total = 0.0;
  for (double q : s.sorted_probs) {
    total += q;
  }
  const double bound = std::min(p, total);
  double cum = 0.0;
  size_t cut = detail::last_positive(s);
  for (size_t i = 0; i < s.size(); ++i) {
    cum += s.sorted_probs[i];
    if (cum >= bound) {
      cut = i;
      break;
    }
  }
  return detail::prefix_result(s, cut);
}

// Keep every token at least as probable as p_min * max (and positive).
inline TruncationResult min_p(const SortedView& s, double p_min) {
  if (!(p_min >= 0.0 && p_min <= 1.0)) {
    throw InvalidParamError("min_p: p_min must lie in [0, 1]");
  }
  const double threshold = p_min * s.sorted_probs[0];
  size_t cut = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.sorted_probs[i] >= threshold && s.sorted_probs[i] > 0.0) {
      cut = i;
    }
  }
  return detail::prefix_result(s, cut);
}

// Entropy-scaled absolute threshold: keep tokens with probability at least
// min(eta, sqrt(eta) * exp(-H)). The argmax survives regardless.
inline TruncationResult eta_sampling(const SortedView& s, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw InvalidParamError("eta_sampling: eta must lie in (0, 1)");
  }
  const double h = entropy_of_sorted(s);
  const double threshold = std::min(eta, std::sqrt(eta) * std::exp(-h));
  size_t cut = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.sorted_probs[i] >= threshold) {
      cut = i;
    }
  }
  return detail::prefix_result(s, cut);
}

// Rank tokens by |surprisal - entropy| ascending (stable in sorted order),
// keep the minimal ranked prefix reaching mass p, and re-express the kept set
// in probability-descending order. The kept set is not necessarily a prefix
// of the sorted order and may exclude the argmax.
inline TruncationResult locally_typical(const SortedView& s, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw InvalidParamError("locally_typical: p must lie in (0, 1]");
  }
  const double h = entropy_of_sorted(s);
  const size_t n = s.size();
  std::vector<double> score(n);
  for (size_t i = 0; i < n; ++i) {
    const double q = s.sorted_probs[i];
    score[i] = q > 0.0 ? std::fabs(-std::log(q) - h)
                       : std::numeric_limits<double>::infinity();
  }
  std::vector<size_t> ranking(n);
  std::iota(ranking.begin(), ranking.end(), size_t{0});
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&score](size_t a, size_t b) { return score[a] < score[b]; });

  double total = 0.0;
  for (double q : s.sorted_probs) {
    total += q;
  }
  const double bound = std::min(p, total);
  double cum = 0.0;
  std::vector<size_t> positions;
  for (size_t r = 0; r < n; ++r) {
    positions.push_back(ranking[r]);
    cum += s.sorted_probs[ranking[r]];
    if (cum >= bound) {
      break;
    }
  }
  std::sort(positions.begin(), positions.end());
  return detail::positions_result(s, positions);
}

// Keep only the most probable token (first sorted position on ties).
inline TruncationResult greedy_mask(const SortedView& s) {
  return detail::prefix_result(s, 0);
}

inline TruncationResult truncate(Strategy strategy, const SortedView& s,
                                 const StrategyConfig& cfg) {
  switch (strategy) {
    case Strategy::Greedy:
      return greedy_mask(s);
    case Strategy::TopP:
      return top_p(s, cfg.top_p);
    case Strategy::MinP:
      return min_p(s, cfg.min_p);
    case Strategy::Eta:
      return eta_sampling(s, cfg.eta);
    case Strategy::Typical:
      return locally_typical(s, cfg.typical_p);
    case Strategy::DiffCut:
      return diff_cut(s);
    case Strategy::DiffLb:
      return diff_lb(s, cfg.p_lb);
    case Strategy::DiffMinp:
      return diff_minp(s, cfg.p_min);
  }
  throw InvalidParamError("truncate: unknown strategy");
}

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Greedy:
      return "greedy";
    case Strategy::TopP:
      return "top_p";
    case Strategy::MinP:
      return "min_p";
    case Strategy::Eta:
      return "eta";
    case Strategy::Typical:
      return "typical";
    case Strategy::DiffCut:
      return "diff_cut";
    case Strategy::DiffLb:
      return "diff_lb";
    case Strategy::DiffMinp:
      return "diff_minp";
  }
  return "unknown";
}

inline Strategy parse_strategy(const std::string& name) {
  if (name == "greedy") return Strategy::Greedy;
  if (name == "top_p") return Strategy::TopP;
  if (name == "min_p") return Strategy::MinP;
  if (name == "eta") return Strategy::Eta;
  if (name == "typical") return Strategy::Typical;
  if (name == "diff_cut") return Strategy::DiffCut;
  if (name == "diff_lb") return Strategy::DiffLb;
  if (name == "diff_minp") return Strategy::DiffMinp;
  throw InvalidParamError("unknown strategy: " + name);
}

}  // namespace diffsamp
