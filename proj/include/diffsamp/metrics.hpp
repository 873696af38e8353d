#pragma once

/**
 * Diversity and quality metrics over generated token sequences, supplied
 * embedding vectors, and noun lists.
 *
 * EAD scales distinct n-gram counts by their expectation under the corpus
 * size, V * (1 - ((V-1)/V)^C) with C the total n-gram count, and averages the
 * ratio over n = 1..5. The n-gram vocabulary constant V is shared across n
 * and defaults to the observed distinct unigram count. The against-greedy
 * variant counts only n-grams absent from the greedy sequence (identity set
 * difference, not multiplicity). Cosine diversity is 1 minus the mean
 * pairwise cosine similarity. The divergent-association score is the mean
 * pairwise cosine distance of the first n distinct resolvable nouns, times
 * 100; lists that cannot field n such nouns are invalid rather than errors.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "diffsamp/common.hpp"
#include "diffsamp/embeddings.hpp"

namespace diffsamp {

using TokenSeq = std::vector<int64_t>;

class TooFewVectorsError : public Error {
 public:
  explicit TooFewVectorsError(const std::string& msg) : Error(msg) {}
};

class DegenerateVectorError : public Error {
 public:
  explicit DegenerateVectorError(const std::string& msg) : Error(msg) {}
};

class EmptySequenceError : public Error {
 public:
  explicit EmptySequenceError(const std::string& msg) : Error(msg) {}
};

struct NgramCounts {
  size_t distinct = 0;
  size_t total = 0;
};

namespace detail {

struct NgramHash {
  size_t operator()(const std::vector<int64_t>& g) const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (int64_t v : g) {
      for (int shift = 0; shift < 64; shift += 8) {
        h ^= static_cast<uint64_t>(v >> shift) & 0xffULL;
        h *= 0x100000001b3ULL;
      }
    }
    return static_cast<size_t>(h);
  }
};

using NgramSet = std::unordered_set<std::vector<int64_t>, NgramHash>;

inline NgramSet ngram_set(const TokenSeq& seq, size_t n) {
  NgramSet set;
  if (seq.size() >= n) {
    for (size_t i = 0; i + n <= seq.size(); ++i) {
      set.emplace(seq.begin() + static_cast<long>(i),
                  seq.begin() + static_cast<long>(i + n));
    }
  }
  return set;
}

// Expected distinct count of C draws from a V-symbol vocabulary.
inline double expected_distinct(size_t vocab, size_t count) {
  const double v = static_cast<double>(vocab);
  return v * (1.0 - std::pow((v - 1.0) / v, static_cast<double>(count)));
}

}  // namespace detail

inline NgramCounts distinct_ngrams(const std::vector<TokenSeq>& seqs, size_t n) {
  if (n < 1) {
    throw InvalidParamError("distinct_ngrams: n must be >= 1");
  }
  detail::NgramSet set;
  size_t total = 0;
  for (const TokenSeq& seq : seqs) {
    if (seq.size() >= n) {
      total += seq.size() - n + 1;
      for (size_t i = 0; i + n <= seq.size(); ++i) {
        set.emplace(seq.begin() + static_cast<long>(i),
                    seq.begin() + static_cast<long>(i + n));
      }
    }
  }
  return NgramCounts{set.size(), total};
}

inline size_t observed_unigram_vocab(const std::vector<TokenSeq>& seqs) {
  std::unordered_set<int64_t> tokens;
  for (const TokenSeq& seq : seqs) {
    tokens.insert(seq.begin(), seq.end());
  }
  return tokens.size();
}

// Expectation-adjusted distinct n-grams averaged over n in [n_min, n_max].
// vocab = 0 selects the observed distinct unigram count. Orders of n with no
// n-grams at all are skipped; if every order is empty the result is 0 and
// *degenerate is set.
inline double ead(const std::vector<TokenSeq>& seqs, size_t vocab = 0,
                  size_t n_min = 1, size_t n_max = 5, bool* degenerate = nullptr) {
  if (degenerate != nullptr) {
    *degenerate = false;
  }
  if (vocab == 0) {
    vocab = std::max<size_t>(1, observed_unigram_vocab(seqs));
  } else if (vocab < observed_unigram_vocab(seqs)) {
    throw InvalidParamError("ead: vocab smaller than observed distinct tokens");
  }
  double sum = 0.0;
  size_t terms = 0;
  for (size_t n = n_min; n <= n_max; ++n) {
    const NgramCounts c = distinct_ngrams(seqs, n);
    if (c.total == 0) {
      continue;
    }
    sum += static_cast<double>(c.distinct) / detail::expected_distinct(vocab, c.total);
    ++terms;
  }
  if (terms == 0) {
    if (degenerate != nullptr) {
      *degenerate = true;
    }
    return 0.0;
  }
  return sum / static_cast<double>(terms);
}

// EAD over the sample's n-grams that do not appear in the greedy sequence.
inline double ead_against_greedy(const TokenSeq& sample, const TokenSeq& greedy,
                                 size_t vocab = 0, size_t n_min = 1, size_t n_max = 5) {
  if (sample.empty() || greedy.empty()) {
    throw EmptySequenceError("ead_against_greedy: empty sequence");
  }
  if (vocab == 0) {
    vocab = std::max<size_t>(1, observed_unigram_vocab({sample, greedy}));
  }
  double sum = 0.0;
  size_t terms = 0;
  for (size_t n = n_min; n <= n_max; ++n) {
    if (sample.size() < n) {
      continue;
    }
    const size_t total = sample.size() - n + 1;
    const detail::NgramSet greedy_set = detail::ngram_set(greedy, n);
    const detail::NgramSet sample_set = detail::ngram_set(sample, n);
    size_t fresh = 0;
    for (const auto& gram : sample_set) {
      if (greedy_set.find(gram) == greedy_set.end()) {
        ++fresh;
      }
    }
    sum += static_cast<double>(fresh) / detail::expected_distinct(vocab, total);
    ++terms;
  }
  return terms == 0 ? 0.0 : sum / static_cast<double>(terms);
}

inline double cosine_similarity(const std::vector<double>& a,
                                const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw InvalidValueError("cosine: dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateVectorError("cosine: zero-norm vector");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// 1 minus the mean cosine similarity over all unordered pairs.
inline double cosine_diversity(const std::vector<std::vector<double>>& vectors) {
  if (vectors.size() < 2) {
    throw TooFewVectorsError("cosine_diversity: need at least 2 vectors");
  }
  double sum = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < vectors.size(); ++i) {
    for (size_t j = i + 1; j < vectors.size(); ++j) {
      sum += cosine_similarity(vectors[i], vectors[j]);
      ++pairs;
    }
  }
  return 1.0 - sum / static_cast<double>(pairs);
}

inline double against_greedy_cosine(const std::vector<double>& sample,
                                    const std::vector<double>& greedy) {
  return 1.0 - cosine_similarity(sample, greedy);
}

// Exact percentage of true outcomes.
inline double accuracy(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) {
    throw InvalidParamError("accuracy: empty outcome vector");
  }
  const auto correct = static_cast<double>(
      std::count(outcomes.begin(), outcomes.end(), true));
  return 100.0 * correct / static_cast<double>(outcomes.size());
}

struct DatResult {
  std::optional<double> score;     // empty when the list is invalid
  size_t distinct_resolved = 0;    // distinct nouns found in the table

  bool valid() const { return score.has_value(); }
};

// Mean pairwise cosine distance * 100 over the first n distinct nouns that
// resolve in the embedding table, in list order. Out-of-vocabulary nouns are
// skipped before the distinct-count test; fewer than n survivors makes the
// list invalid (a value, not a fault).
inline DatResult dat_score(const std::vector<std::string>& nouns,
                           const EmbeddingTable& emb, size_t n) {
  if (n != 7 && n != 10) {
    throw InvalidParamError("dat_score: n must be 7 or 10");
  }
  std::vector<const std::vector<double>*> chosen;
  std::unordered_set<std::string> seen;
  for (const std::string& noun : nouns) {
    const std::string key = fold_case(noun);
    if (seen.count(key) > 0) {
      continue;
    }
    const std::vector<double>* vec = emb.find(key);
    if (vec == nullptr) {
      continue;
    }
    seen.insert(key);
    chosen.push_back(vec);
    if (chosen.size() == n) {
      break;
    }
  }
  DatResult result;
  result.distinct_resolved = chosen.size();
  if (chosen.size() < n) {
    return result;
  }
  double sum = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      sum += 1.0 - cosine_similarity(*chosen[i], *chosen[j]);
      ++pairs;
    }
  }
  result.score = 100.0 * sum / static_cast<double>(pairs);
  return result;
}

}  // namespace diffsamp
