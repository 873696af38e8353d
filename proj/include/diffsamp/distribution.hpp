#pragma once

/**
 * Next-token distribution primitives.
 *
 * ProbDist is a normalized probability vector over an opaque integer
 * vocabulary. SortedView pairs the descending-sorted probabilities with the
 * permutation back to original token indices; DeltaVector holds the forward
 * difference of the sorted vector, whose minimum locates the largest
 * consecutive gap. Everything downstream (truncation strategies, the
 * smoothing laboratory) is built on these three values.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "diffsamp/common.hpp"

namespace diffsamp {

struct ProbDist {
  std::vector<double> probs;

  size_t size() const { return probs.size(); }
  double operator[](size_t i) const { return probs[i]; }
};

struct SortedView {
  std::vector<double> sorted_probs;  // non-increasing
  std::vector<size_t> perm;          // sorted position -> original token index

  size_t size() const { return sorted_probs.size(); }
};

struct DeltaVector {
  std::vector<double> deltas;  // every entry <= 0

  size_t size() const { return deltas.size(); }
};

// Normalizes a vector of non-negative reals into a ProbDist. Inputs are
// renormalized unconditionally (file-sourced floats rarely sum exactly to 1).
inline ProbDist normalize(std::vector<double> raw) {
  if (raw.empty()) {
    throw InvalidValueError("normalize: empty input");
  }
  double sum = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) {
      throw InvalidValueError("normalize: non-finite entry");
    }
    if (v < 0.0) {
      throw InvalidValueError("normalize: negative entry");
    }
    sum += v;
  }
  if (sum <= 0.0) {
    throw AllZeroError("normalize: no positive mass");
  }
  for (double& v : raw) {
    v /= sum;
  }
  return ProbDist{std::move(raw)};
}

// Exponential-normalization of log-space scores (max-shifted softmax).
inline ProbDist from_logits(const std::vector<double>& logits) {
  if (logits.empty()) {
    throw InvalidValueError("from_logits: empty input");
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double v : logits) {
    if (!std::isfinite(v)) {
      throw InvalidValueError("from_logits: non-finite entry");
    }
    max_logit = std::max(max_logit, v);
  }
  std::vector<double> exps(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    exps[i] = std::exp(logits[i] - max_logit);
    sum += exps[i];
  }
  for (double& v : exps) {
    v /= sum;
  }
  return ProbDist{std::move(exps)};
}

// Descending sort with stable tie-breaking by ascending original index.
inline SortedView sort_desc(const ProbDist& d) {
  SortedView view;
  view.perm.resize(d.size());
  std::iota(view.perm.begin(), view.perm.end(), size_t{0});
  std::stable_sort(view.perm.begin(), view.perm.end(),
                   [&d](size_t a, size_t b) { return d.probs[a] > d.probs[b]; });
  view.sorted_probs.resize(d.size());
  for (size_t i = 0; i < d.size(); ++i) {
    view.sorted_probs[i] = d.probs[view.perm[i]];
  }
  return view;
}

// Applies the permutation back: reconstructs the original vector bit-exactly.
inline std::vector<double> unsort(const SortedView& s) {
  std::vector<double> out(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    out[s.perm[i]] = s.sorted_probs[i];
  }
  return out;
}

// Forward difference of the sorted vector; the final entry is -p[N-1], so the
// whole vector is non-positive and telescopes to -p[0].
inline DeltaVector discrete_derivative(const SortedView& s) {
  const size_t n = s.size();
  DeltaVector dv;
  dv.deltas.resize(n);
  for (size_t i = 0; i + 1 < n; ++i) {
    dv.deltas[i] = s.sorted_probs[i + 1] - s.sorted_probs[i];
  }
  dv.deltas[n - 1] = -s.sorted_probs[n - 1];
  return dv;
}

// Shannon entropy in nats, with 0*log(0) := 0.
inline double entropy(const ProbDist& d) {
  double h = 0.0;
  for (double p : d.probs) {
    if (p > 0.0) {
      h -= p * std::log(p);
    }
  }
  return h;
}

inline double entropy_of_sorted(const SortedView& s) {
  double h = 0.0;
  for (double p : s.sorted_probs) {
    if (p > 0.0) {
      h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace diffsamp
