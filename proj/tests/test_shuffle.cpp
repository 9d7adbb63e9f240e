#include <gtest/gtest.h>

#include <map>
#include <numeric>
#include <set>

#include "cardpsm/shuffle.hpp"

using namespace cardpsm;

namespace {

using Image = std::vector<Position>;
using Dist = std::map<Image, Rational>;

Dist as_map(const OutcomeDistribution& d) {
  Dist out;
  for (const auto& [p, pr] : d.outcomes) out[Image(p.image().begin(), p.image().end())] += pr;
  return out;
}

// All cyclic rotations of `positions`, written out directly.
Dist rotations_oracle(const std::vector<Position>& positions, std::size_t degree) {
  Dist out;
  const std::size_t k = positions.size();
  for (std::size_t d = 0; d < k; ++d) {
    Image img(degree);
    std::iota(img.begin(), img.end(), Position{0});
    for (std::size_t j = 0; j < k; ++j) img[positions[j]] = positions[(j + d) % k];
    out[img] += Rational(1, k);
  }
  return out;
}

// Product measure of two independent distributions, first applied first.
Dist convolve(const Dist& first, const Dist& second) {
  Dist out;
  for (const auto& [a, pa] : first) {
    for (const auto& [b, pb] : second) {
      Image img(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) img[i] = b[a[i]];
      out[img] += pa * pb;
    }
  }
  return out;
}

Rational total(const OutcomeDistribution& d) {
  Rational s = 0;
  for (const auto& [p, pr] : d.outcomes) s += pr;
  return s;
}

}  // namespace

TEST(Support, RandomCutOverFourCards) {
  const auto d = support(random_cut({0, 1, 2, 3}, 4));
  ASSERT_EQ(d.size(), 4u);
  for (const auto& [p, pr] : d.outcomes) EXPECT_EQ(pr, Rational(1, 4));
}

TEST(Support, PileShiftOverThreePilesOfTwo) {
  const auto d = support(pile_shift_spec(PileSpec::contiguous(0, 3, 2), 6));
  ASSERT_EQ(d.size(), 3u);
  for (const auto& [p, pr] : d.outcomes) EXPECT_EQ(pr, Rational(1, 3));
  // pile j lands in slot j+1
  const auto one = pile_shift_permutation(PileSpec::contiguous(0, 3, 2), 6, 1);
  EXPECT_EQ(apply(one, SuitString::parse("hhcccc")).str(), "cchhcc");
}

TEST(Support, CompleteOverThreePositions) {
  const auto d = support(complete({0, 1, 2}, 3));
  ASSERT_EQ(d.size(), 6u);
  for (const auto& [p, pr] : d.outcomes) EXPECT_EQ(pr, Rational(1, 6));
}

TEST(Support, PileScrambleIsUniformOverPileOrders) {
  const auto d = support(pile_scramble(PileSpec::contiguous(0, 3, 2), 6));
  ASSERT_EQ(d.size(), 6u);
  std::set<std::string> seen;
  for (const auto& [p, pr] : d.outcomes) {
    EXPECT_EQ(pr, Rational(1, 6));
    seen.insert(apply(p, SuitString::parse("hhhhcc")).str());
  }
  EXPECT_EQ(seen.size(), 3u);  // piles hh|hh|cc: only the cc slot is visible
}

TEST(Compose, IdentityIsNeutral) {
  const auto s = pile_shift_spec(PileSpec::contiguous(0, 3, 1), 3);
  EXPECT_EQ(support(compose(identity_shuffle(3), s)), support(s));
  EXPECT_EQ(support(compose(s, identity_shuffle(3))), support(s));
}

TEST(Compose, TwoRandomCutsEqualOne) {
  for (std::size_t k = 1; k <= 6; ++k) {
    std::vector<Position> pos(k);
    std::iota(pos.begin(), pos.end(), Position{0});
    const auto once = rotations_oracle(pos, k);
    const auto twice = as_map(support(compose(random_cut(pos, k), random_cut(pos, k))));
    EXPECT_EQ(twice, once) << "k=" << k;
    EXPECT_EQ(convolve(once, once), once);
  }
}

TEST(Compose, RandomCutOnSubsetMatchesRotationOracle) {
  const std::vector<Position> pos{5, 1, 3};
  EXPECT_EQ(as_map(support(random_cut(pos, 6))), rotations_oracle(pos, 6));
}

TEST(Compose, DisjointPileShiftsMultiply) {
  for (std::size_t k1 = 1; k1 <= 4; ++k1) {
    for (std::size_t k2 = 1; k2 <= 4; ++k2) {
      const std::size_t degree = 2 * (k1 + k2);
      const auto a = pile_shift_spec(PileSpec::contiguous(0, k1, 2), degree);
      const auto b = pile_shift_spec(PileSpec::contiguous(2 * k1, k2, 2), degree);
      const auto d = support(compose(a, b));
      EXPECT_EQ(d.size(), k1 * k2);
      EXPECT_EQ(as_map(d), convolve(as_map(support(a)), as_map(support(b))));
      EXPECT_EQ(total(d), 1);
    }
  }
}

TEST(Compose, NonCommutingOrderMatters) {
  // a rotation followed by a transposition differs from the reverse order
  const auto rot = deterministic(Permutation({1, 2, 0}));
  const auto swap = deterministic(Permutation({1, 0, 2}));
  const auto ab = as_map(support(compose(rot, swap)));
  const auto ba = as_map(support(compose(swap, rot)));
  EXPECT_NE(ab, ba);
  EXPECT_EQ(ab, convolve(as_map(support(rot)), as_map(support(swap))));
}

TEST(WeightedShift, UniformWeightsMatchPileShift) {
  const auto piles = PileSpec::contiguous(0, 3, 1);
  std::vector<Rational> w(3, Rational(1, 3));
  EXPECT_EQ(support(weighted_shift_spec(piles, w, 3)), support(pile_shift_spec(piles, 3)));
}

TEST(WeightedShift, PointMassIsIdentity) {
  const auto d = support(weighted_shift_spec(PileSpec::contiguous(0, 3, 1), {1, 0, 0}, 3));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_TRUE(d.outcomes[0].first.is_identity());
}

TEST(WeightedShift, ExplicitWeights) {
  const auto piles = PileSpec::contiguous(0, 3, 1);
  const std::vector<Rational> w{Rational(1, 2), Rational(1, 4), Rational(1, 4)};
  const auto d = support(weighted_shift_spec(piles, w, 3));
  ASSERT_EQ(d.size(), 3u);
  for (std::size_t shift = 0; shift < 3; ++shift) {
    Image img{Position(shift % 3), Position((1 + shift) % 3), Position((2 + shift) % 3)};
    EXPECT_EQ(d.probability_of(Permutation(img)), w[shift]);
  }
}

TEST(WeightedShift, RejectsBadWeights) {
  const auto piles = PileSpec::contiguous(0, 3, 1);
  EXPECT_THROW(weighted_shift_spec(piles, {Rational(1, 2), Rational(1, 2)}, 3), Error);
  EXPECT_THROW(weighted_shift_spec(piles, {Rational(1, 2), Rational(1, 2), Rational(1, 2)}, 3), Error);
  EXPECT_THROW(weighted_shift_spec(piles, {Rational(3, 2), Rational(-1, 2), 0}, 3), Error);
}

TEST(PileSpecChecks, RejectsUnequalOrOverlappingPiles) {
  PileSpec unequal{{{0, 1}, {2}}};
  EXPECT_THROW(pile_shift_spec(unequal, 3), Error);
  PileSpec overlap{{{0, 1}, {1, 2}}};
  EXPECT_THROW(pile_shift_spec(overlap, 3), Error);
  EXPECT_THROW(random_cut({0, 4}, 3), Error);
}

TEST(Support, CapIsEnforced) {
  try {
    support(complete({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 11), 1000);
    FAIL() << "expected SupportTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::support_too_large);
  }
  EXPECT_EQ(estimated_support_size(complete({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 11)), factorial(11));
}

TEST(Sampling, SamplesLieInSupportAndAreSeedDeterministic) {
  const auto s = compose(pile_shift_spec(PileSpec::contiguous(0, 3, 2), 6), complete({2, 3, 4, 5}, 6));
  const auto d = support(s);
  Rng a(42), b(42);
  std::map<Image, std::size_t> counts;
  for (int t = 0; t < 3000; ++t) {
    const auto pa = sample(s, a);
    EXPECT_EQ(pa, sample(s, b));
    EXPECT_GT(d.probability_of(pa), 0);
    ++counts[Image(pa.image().begin(), pa.image().end())];
  }
  // 72 equally likely outcomes; every one shows up in 3000 draws
  EXPECT_EQ(counts.size(), d.size());
}

TEST(Embed, RelocatesPositions) {
  const auto s = random_cut({0, 1, 2}, 3);
  const auto e = embed(s, {4, 5, 6}, 8);
  EXPECT_EQ(e.degree(), 8u);
  EXPECT_EQ(as_map(support(e)), rotations_oracle({4, 5, 6}, 8));
}

TEST(Tally, CountsPrimitiveKinds) {
  const auto s = compose({pile_shift_spec(PileSpec::contiguous(0, 2, 2), 4), complete({0, 1}, 4),
                          pile_scramble(PileSpec::contiguous(0, 2, 2), 4), random_cut({0, 1, 2}, 4),
                          weighted_shift_spec(PileSpec::contiguous(0, 2, 2), {Rational(1, 3), Rational(2, 3)}, 4)});
  EXPECT_EQ(tally(s).str(), "PSh×2 & RC×1 & PSc×1 & CS×1");
  EXPECT_EQ(tally(identity_shuffle(3)).str(), "none");
}
