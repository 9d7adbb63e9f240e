#pragma once

// Seeded broken protocols. Each one must be rejected by the verifier.

#include <string>
#include <vector>

#include "psm.hpp"
#include "transform.hpp"

namespace cardpsm::mutants {

/// Removes every complete shuffle but keeps the full opening.
inline CompiledArtifact drop_complete(CompiledArtifact a) {
  std::vector<Shuffle> kept;
  for (const auto& part : flatten(a.protocol.shuffle)) {
    if (!std::holds_alternative<Complete>(part.node())) kept.push_back(part);
  }
  a.protocol.shuffle = kept.empty() ? identity_shuffle(a.protocol.degree()) : compose(kept);
  return a;
}

/// Replaces the first uniform pile-shift by a shift that favours d = 0 with
/// probability 1/2 and splits the rest evenly.
inline CompiledArtifact biased_weighted_shift(CompiledArtifact a) {
  std::vector<Shuffle> parts = flatten(a.protocol.shuffle);
  const std::size_t degree = a.protocol.degree();
  for (auto& part : parts) {
    const auto* ps = std::get_if<PileShift>(&part.node());
    if (!ps || ps->piles.count() < 2) continue;
    const std::size_t k = ps->piles.count();
    std::vector<Rational> w(k, Rational(1, 2 * (k - 1)));
    w[0] = Rational(1, 2);
    part = weighted_shift_spec(ps->piles, std::move(w), degree);
    break;
  }
  a.protocol.shuffle = compose(parts);
  return a;
}

/// An additive PSM for AND_2 over Z_5 whose unit group is the quadratic
/// residues {1,4}: g(0) = 1, g(1) = 2, output 1 iff the sum lies in U.
/// With two cosets the coset table matters, unlike U = Z_m^*.
inline AdditivePsm residue_and_psm() {
  AdditivePsm a;
  a.n = 2;
  a.m = 5;
  a.units = {1, 4};
  a.g = {{1, 2}, {1, 2}};
  a.dec_on_sum = {0, 1, 0, 0, 1};
  return a;
}

/// The residue AND protocol with the regroup-back step using a different,
/// individually valid coset table (betas {1,3} instead of {1,2}).
inline CompiledArtifact corrupted_coset() {
  const auto a = residue_and_psm();
  auto art = additive_to_full_open(a);
  const auto ctx = make_group_context(a.m, a.units);
  auto wrong = ctx;
  wrong.betas = {1, 3};
  validate(wrong);
  std::vector<Shuffle> parts{multiply_by_unit(ctx, a.n, wrong), add_zero_shares(a.m, a.n)};
  art.protocol.shuffle = compose(parts);
  return art;
}

/// Additive compiler output whose share step shifts only pile i instead of
/// the pair (i, n-1), so the shares no longer sum to zero.
inline CompiledArtifact non_zero_sum(const AdditivePsm& a) {
  auto art = additive_to_full_open(a);
  const auto ctx = make_group_context(a.m, a.units);
  const std::size_t degree = a.n * a.m;
  std::vector<Shuffle> parts{multiply_by_unit(ctx, a.n)};
  for (std::size_t i = 0; i + 1 < a.n; ++i) {
    PileSpec column;
    for (std::size_t j = 0; j < a.m; ++j) column.piles.push_back({static_cast<Position>(i * a.m + j)});
    parts.push_back(pile_shift_spec(std::move(column), degree));
  }
  art.protocol.shuffle = compose(parts);
  return art;
}

}  // namespace cardpsm::mutants
