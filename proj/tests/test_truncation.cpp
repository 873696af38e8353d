#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "diffsamp/distribution.hpp"
#include "diffsamp/io.hpp"
#include "diffsamp/rng.hpp"
#include "diffsamp/truncation.hpp"
#include "oracles.hpp"

using namespace diffsamp;

namespace {

ProbDist random_dist(Xoshiro256ss& rng, size_t n) {
  std::vector<double> raw(n);
  for (double& v : raw) {
    v = rng.uniform01() + 1e-12;
  }
  return normalize(std::move(raw));
}

// Peaky distributions are common in practice; mix them in so the fuzz corpus
// is not dominated by near-uniform draws.
ProbDist random_peaky_dist(Xoshiro256ss& rng, size_t n) {
  std::vector<double> raw(n);
  for (double& v : raw) {
    v = std::pow(rng.uniform01(), 4.0) + 1e-12;
  }
  return normalize(std::move(raw));
}

std::set<size_t> kept_set(const TruncationResult& r) {
  return {r.kept.begin(), r.kept.end()};
}

bool subset(const std::set<size_t>& a, const std::set<size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

DistRecord table1() {
  auto records = load_distributions(std::string(DIFFSAMP_DATA_DIR) + "/table1.jsonl");
  REQUIRE(records.size() == 1);
  return records[0];
}

size_t label_index(const DistRecord& rec, const std::string& label) {
  const auto it = std::find(rec.labels.begin(), rec.labels.end(), label);
  REQUIRE(it != rec.labels.end());
  return static_cast<size_t>(it - rec.labels.begin());
}

}  // namespace

TEST_CASE("diff_cut keeps the two head tokens of the fixture", "[truncation]") {
  const DistRecord rec = table1();
  const TruncationResult r = diff_cut(sort_desc(rec.dist));
  REQUIRE(r.kept_count() == 2);
  CHECK(rec.labels[r.kept[0]] == "generate");
  CHECK(rec.labels[r.kept[1]] == "produce");
  CHECK(100.0 * r.renorm[r.kept[0]] == Catch::Approx(59.886).margin(5e-3));
  CHECK(100.0 * r.renorm[r.kept[1]] == Catch::Approx(40.114).margin(5e-3));
}

TEST_CASE("diff_cut degenerates to greedy on a one-hot input", "[truncation]") {
  const TruncationResult r = diff_cut(sort_desc(ProbDist{{1.0, 0.0, 0.0, 0.0}}));
  CHECK(r.cut_idx == 0);
  CHECK(r.kept == std::vector<size_t>{0});
  CHECK(r.renorm.probs == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("diff_cut keeps everything on a uniform input", "[truncation]") {
  const size_t n = 6;
  const TruncationResult r = diff_cut(sort_desc(ProbDist{std::vector<double>(n, 1.0 / n)}));
  CHECK(r.cut_idx == n - 1);
  CHECK(r.kept_count() == n);
}

TEST_CASE("diff_lb matches the fixture column", "[truncation]") {
  const DistRecord rec = table1();
  const TruncationResult r = diff_lb(sort_desc(rec.dist), 0.9);
  CHECK(r.kept_count() == 28);  // through "interpret"
  CHECK(100.0 * r.renorm[label_index(rec, "generate")] == Catch::Approx(40.929).margin(5e-3));
  CHECK(100.0 * r.renorm[label_index(rec, "read")] == Catch::Approx(0.357).margin(5e-3));
  CHECK(r.renorm[label_index(rec, "interact")] == 0.0);
}

TEST_CASE("diff_lb with p_lb = 0 reduces to diff_cut", "[truncation]") {
  Xoshiro256ss rng(11);
  for (int it = 0; it < 300; ++it) {
    const ProbDist d = random_dist(rng, 2 + rng.next() % 32);
    const SortedView s = sort_desc(d);
    CHECK(diff_lb(s, 0.0).kept == diff_cut(s).kept);
  }
}

TEST_CASE("diff_minp matches the fixture column", "[truncation]") {
  const DistRecord rec = table1();
  const TruncationResult r = diff_minp(sort_desc(rec.dist), 0.1);
  CHECK(r.kept_count() == 6);  // through "perform"
  CHECK(100.0 * r.renorm[label_index(rec, "generate")] == Catch::Approx(47.537).margin(5e-3));
  CHECK(100.0 * r.renorm[label_index(rec, "perform")] == Catch::Approx(2.995).margin(5e-3));
}

TEST_CASE("diff_minp with p_min = 1 reduces to diff_cut", "[truncation]") {
  Xoshiro256ss rng(13);
  for (int it = 0; it < 300; ++it) {
    const ProbDist d = random_dist(rng, 2 + rng.next() % 32);
    const SortedView s = sort_desc(d);
    CHECK(diff_minp(s, 1.0).kept == diff_cut(s).kept);
  }
}

TEST_CASE("derivative variants match the exhaustive-cut oracle", "[truncation]") {
  Xoshiro256ss rng(17);
  for (int it = 0; it < 1000; ++it) {
    const size_t n = 2 + rng.next() % 63;
    const ProbDist d = (it % 2 == 0) ? random_dist(rng, n) : random_peaky_dist(rng, n);
    const SortedView s = sort_desc(d);
    const double p = 0.05 + 0.9 * rng.uniform01();

    CHECK(diff_cut(s).cut_idx ==
          oracles::exhaustive_cut(s.sorted_probs, oracles::CutMode::Unrestricted, 0.0));
    CHECK(diff_lb(s, p).cut_idx ==
          oracles::exhaustive_cut(s.sorted_probs, oracles::CutMode::MassLowerBound, p));
    CHECK(diff_minp(s, p).cut_idx ==
          oracles::exhaustive_cut(s.sorted_probs, oracles::CutMode::RatioUpperBound, p));
  }
}

TEST_CASE("top_p matches the fixture column", "[truncation]") {
  const DistRecord rec = table1();
  const TruncationResult r = top_p(sort_desc(rec.dist), 0.9);
  CHECK(r.kept_count() == 25);  // through ","
  CHECK(100.0 * r.renorm[label_index(rec, "generate")] == Catch::Approx(41.366).margin(5e-3));
  CHECK(r.renorm[label_index(rec, "read")] == 0.0);
}

TEST_CASE("top_p boundary behavior", "[truncation]") {
  const SortedView s = sort_desc(ProbDist{{0.5, 0.3, 0.2}});
  CHECK(top_p(s, 0.5).kept_count() == 1);  // boundary inclusive
  CHECK(top_p(s, 1.0).kept_count() == 3);

  // p = 1 keeps the positive support only.
  const SortedView with_zeros = sort_desc(ProbDist{{0.5, 0.5, 0.0, 0.0}});
  CHECK(top_p(with_zeros, 1.0).kept_count() == 2);
}

TEST_CASE("min_p matches the fixture column", "[truncation]") {
  const DistRecord rec = table1();
  const TruncationResult r = min_p(sort_desc(rec.dist), 0.1);
  CHECK(r.kept_count() == 4);
  CHECK(100.0 * r.renorm[label_index(rec, "generate")] == Catch::Approx(50.872).margin(5e-3));
}

TEST_CASE("min_p parameter extremes", "[truncation]") {
  const SortedView s = sort_desc(ProbDist{{0.4, 0.4, 0.2, 0.0}});
  CHECK(min_p(s, 0.0).kept_count() == 3);  // everything positive
  CHECK(min_p(s, 1.0).kept_count() == 2);  // exactly the argmax set
}

TEST_CASE("eta_sampling threshold cases", "[truncation]") {
  const TruncationResult hot = eta_sampling(sort_desc(ProbDist{{0.0, 1.0, 0.0}}), 0.0003);
  CHECK(hot.kept == std::vector<size_t>{1});

  // Uniform over 2: threshold = min(0.0003, sqrt(0.0003) * 0.5) = 0.0003.
  const TruncationResult both = eta_sampling(sort_desc(ProbDist{{0.5, 0.5}}), 0.0003);
  CHECK(both.kept_count() == 2);

  // Computed threshold: H = 0.015814, sqrt(eta) * exp(-H) = 0.017049, so the
  // effective threshold is eta = 0.0003 and the 0.001 tokens stay.
  const std::vector<double> p{0.998, 0.001, 0.001};
  const double h = oracles::entropy_direct(p);
  const double threshold = std::min(0.0003, std::sqrt(0.0003) * std::exp(-h));
  REQUIRE(threshold == Catch::Approx(0.0003));
  const TruncationResult r = eta_sampling(sort_desc(ProbDist{p}), 0.0003);
  CHECK(r.kept_count() == 3);

  // A token below the threshold is dropped.
  const TruncationResult drop =
      eta_sampling(sort_desc(ProbDist{{0.9998, 0.0001, 0.0001}}), 0.0003);
  CHECK(drop.kept_count() == 1);
}

TEST_CASE("eta_sampling always keeps the argmax", "[truncation]") {
  Xoshiro256ss rng(23);
  for (int it = 0; it < 2000; ++it) {
    const ProbDist d = random_peaky_dist(rng, 2 + rng.next() % 32);
    const SortedView s = sort_desc(d);
    const TruncationResult r = eta_sampling(s, 0.0003);
    REQUIRE(r.kept_count() >= 1);
    CHECK(r.kept[0] == s.perm[0]);
  }
}

TEST_CASE("locally_typical basics", "[truncation]") {
  // Uniform: every score is 0, minimal stable prefix of ceil(p * N).
  const size_t n = 5;
  const TruncationResult u =
      locally_typical(sort_desc(ProbDist{std::vector<double>(n, 1.0 / n)}), 0.5);
  CHECK(u.kept_count() == 3);  // ceil(0.5 * 5)
  CHECK(u.kept == std::vector<size_t>{0, 1, 2});

  const TruncationResult hot = locally_typical(sort_desc(ProbDist{{0.0, 1.0}}), 0.9);
  CHECK(hot.kept == std::vector<size_t>{1});
}

TEST_CASE("locally_typical matches the permutation oracle", "[truncation]") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  const SortedView s = sort_desc(ProbDist{p});
  const TruncationResult r = locally_typical(s, 0.6);
  std::set<size_t> kept_positions;
  for (size_t tok : r.kept) {
    for (size_t pos = 0; pos < s.size(); ++pos) {
      if (s.perm[pos] == tok) {
        kept_positions.insert(pos);
      }
    }
  }
  CHECK(kept_positions == oracles::typical_kept_bruteforce(s.sorted_probs, 0.6));

  Xoshiro256ss rng(31);
  for (int it = 0; it < 200; ++it) {
    const size_t n = 2 + rng.next() % 5;
    const ProbDist d = random_dist(rng, n);
    const SortedView sv = sort_desc(d);
    const double pp = 0.1 + 0.85 * rng.uniform01();
    const TruncationResult rr = locally_typical(sv, pp);
    std::set<size_t> got;
    for (size_t tok : rr.kept) {
      for (size_t pos = 0; pos < sv.size(); ++pos) {
        if (sv.perm[pos] == tok) {
          got.insert(pos);
        }
      }
    }
    CHECK(got == oracles::typical_kept_bruteforce(sv.sorted_probs, pp));
  }
}

TEST_CASE("locally_typical can exclude the argmax", "[truncation]") {
  // The argmax surprisal can sit farther from the entropy than a mid token's.
  const TruncationResult r = locally_typical(sort_desc(ProbDist{{0.57, 0.4, 0.03}}), 0.35);
  CHECK(r.kept == std::vector<size_t>{1});
}

TEST_CASE("greedy_mask keeps the stable argmax", "[truncation]") {
  const TruncationResult r = greedy_mask(sort_desc(ProbDist{{0.5, 0.3, 0.2}}));
  CHECK(r.kept == std::vector<size_t>{0});
  CHECK(r.renorm.probs == std::vector<double>{1.0, 0.0, 0.0});

  const TruncationResult ties = greedy_mask(sort_desc(ProbDist{{0.25, 0.25, 0.25, 0.25}}));
  CHECK(ties.kept == std::vector<size_t>{0});

  const DistRecord rec = table1();
  const TruncationResult g = greedy_mask(sort_desc(rec.dist));
  CHECK(rec.labels[g.kept[0]] == "generate");
}

TEST_CASE("every strategy keeps at least one token", "[truncation]") {
  Xoshiro256ss rng(41);
  const StrategyConfig cfg;
  const Strategy all[] = {Strategy::Greedy,  Strategy::TopP,    Strategy::MinP,
                          Strategy::Eta,     Strategy::Typical, Strategy::DiffCut,
                          Strategy::DiffLb,  Strategy::DiffMinp};
  for (int it = 0; it < 10000; ++it) {
    const size_t n = 1 + rng.next() % 24;
    const ProbDist d = (it % 2 == 0) ? random_dist(rng, n) : random_peaky_dist(rng, n);
    const SortedView s = sort_desc(d);
    for (Strategy strat : all) {
      const TruncationResult r = truncate(strat, s, cfg);
      REQUIRE(r.kept_count() >= 1);
      double mass = 0.0;
      for (double p : r.renorm.probs) {
        mass += p;
      }
      REQUIRE(mass == Catch::Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("kept sets are sorted-order prefixes outside locally_typical", "[truncation]") {
  Xoshiro256ss rng(43);
  const StrategyConfig cfg;
  const Strategy prefix_family[] = {Strategy::Greedy, Strategy::TopP,
                                    Strategy::MinP,   Strategy::Eta,
                                    Strategy::DiffCut, Strategy::DiffLb,
                                    Strategy::DiffMinp};
  for (int it = 0; it < 2000; ++it) {
    const ProbDist d = random_peaky_dist(rng, 2 + rng.next() % 32);
    const SortedView s = sort_desc(d);
    for (Strategy strat : prefix_family) {
      const TruncationResult r = truncate(strat, s, cfg);
      REQUIRE(r.kept_count() == r.cut_idx + 1);
      for (size_t i = 0; i < r.kept_count(); ++i) {
        REQUIRE(r.kept[i] == s.perm[i]);
      }
    }
  }
}

TEST_CASE("renormalized argmax matches the input argmax", "[truncation]") {
  // Holds for the prefix family; locally_typical may exclude the argmax by
  // construction, so it is not asserted here.
  Xoshiro256ss rng(47);
  const StrategyConfig cfg;
  const Strategy prefix_family[] = {Strategy::Greedy, Strategy::TopP,
                                    Strategy::MinP,   Strategy::Eta,
                                    Strategy::DiffCut, Strategy::DiffLb,
                                    Strategy::DiffMinp};
  for (int it = 0; it < 2000; ++it) {
    const ProbDist d = random_peaky_dist(rng, 2 + rng.next() % 32);
    const SortedView s = sort_desc(d);
    for (Strategy strat : prefix_family) {
      const TruncationResult r = truncate(strat, s, cfg);
      const auto arg = static_cast<size_t>(
          std::max_element(r.renorm.probs.begin(), r.renorm.probs.end()) -
          r.renorm.probs.begin());
      REQUIRE(arg == s.perm[0]);
    }
  }
}

TEST_CASE("relaxation laws hold on fuzzed inputs", "[truncation]") {
  Xoshiro256ss rng(53);
  for (int it = 0; it < 2000; ++it) {
    const ProbDist d = (it % 2 == 0) ? random_dist(rng, 2 + rng.next() % 48)
                                     : random_peaky_dist(rng, 2 + rng.next() % 48);
    const SortedView s = sort_desc(d);
    const double p = 0.1 + 0.8 * rng.uniform01();
    const auto cut = kept_set(diff_cut(s));
    REQUIRE(subset(cut, kept_set(diff_lb(s, p))));
    REQUIRE(subset(cut, kept_set(diff_minp(s, p))));
    REQUIRE(subset(kept_set(top_p(s, p)), kept_set(diff_lb(s, p))));
    REQUIRE(subset(kept_set(min_p(s, p)), kept_set(diff_minp(s, p))));
  }
}

TEST_CASE("derivative variants are monotone in their parameter", "[truncation]") {
  Xoshiro256ss rng(59);
  for (int it = 0; it < 1000; ++it) {
    const ProbDist d = random_dist(rng, 2 + rng.next() % 48);
    const SortedView s = sort_desc(d);
    const double a = rng.uniform01();
    const double b = rng.uniform01();
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    REQUIRE(subset(kept_set(diff_lb(s, lo)), kept_set(diff_lb(s, hi))));
    REQUIRE(subset(kept_set(diff_minp(s, hi)), kept_set(diff_minp(s, lo))));
  }
}

TEST_CASE("single-token inputs survive every strategy", "[truncation]") {
  const SortedView s = sort_desc(ProbDist{{1.0}});
  const StrategyConfig cfg;
  const Strategy all[] = {Strategy::Greedy,  Strategy::TopP,    Strategy::MinP,
                          Strategy::Eta,     Strategy::Typical, Strategy::DiffCut,
                          Strategy::DiffLb,  Strategy::DiffMinp};
  for (Strategy strat : all) {
    const TruncationResult r = truncate(strat, s, cfg);
    CHECK(r.kept == std::vector<size_t>{0});
    CHECK(r.renorm.probs == std::vector<double>{1.0});
  }
}

TEST_CASE("parameter validation", "[truncation]") {
  const SortedView s = sort_desc(ProbDist{{0.5, 0.5}});
  CHECK_THROWS_AS(diff_lb(s, -0.1), InvalidParamError);
  CHECK_THROWS_AS(diff_lb(s, 1.5), InvalidParamError);
  CHECK_THROWS_AS(diff_minp(s, -1.0), InvalidParamError);
  CHECK_THROWS_AS(top_p(s, 0.0), InvalidParamError);
  CHECK_THROWS_AS(min_p(s, 2.0), InvalidParamError);
  CHECK_THROWS_AS(eta_sampling(s, 0.0), InvalidParamError);
  CHECK_THROWS_AS(eta_sampling(s, 1.0), InvalidParamError);
  CHECK_THROWS_AS(locally_typical(s, 0.0), InvalidParamError);
  CHECK_THROWS_AS(parse_strategy("nucleus"), InvalidParamError);
}
