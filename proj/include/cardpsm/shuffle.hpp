#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cards.hpp"
#include "error.hpp"
#include "permutation.hpp"
#include "random.hpp"
#include "rational.hpp"

namespace cardpsm {

/// Equal-size, pairwise-disjoint position lists. Piles need not be contiguous.
struct PileSpec {
  std::vector<std::vector<Position>> piles;

  std::size_t count() const noexcept { return piles.size(); }
  std::size_t pile_size() const noexcept { return piles.empty() ? 0 : piles.front().size(); }

  std::vector<Position> positions() const {
    std::vector<Position> out;
    for (const auto& p : piles) out.insert(out.end(), p.begin(), p.end());
    return out;
  }

  /// Consecutive piles of `size` cards starting at `start`.
  static PileSpec contiguous(Position start, std::size_t count, std::size_t size) {
    PileSpec spec;
    for (std::size_t j = 0; j < count; ++j) {
      std::vector<Position> pile(size);
      std::iota(pile.begin(), pile.end(), static_cast<Position>(start + j * size));
      spec.piles.push_back(std::move(pile));
    }
    return spec;
  }

  static PileSpec singletons(const std::vector<Position>& positions) {
    PileSpec spec;
    for (Position p : positions) spec.piles.push_back({p});
    return spec;
  }

  friend bool operator==(const PileSpec&, const PileSpec&) = default;
};

inline void validate(const PileSpec& spec, std::size_t degree) {
  std::vector<bool> used(degree, false);
  for (const auto& pile : spec.piles) {
    if (pile.size() != spec.pile_size()) {
      throw Error(ErrorCode::bad_pile_spec, "piles have unequal sizes");
    }
    for (Position p : pile) {
      if (p >= degree) throw Error(ErrorCode::bad_pile_spec, "position " + std::to_string(p) + " out of range");
      if (used[p]) throw Error(ErrorCode::bad_pile_spec, "position " + std::to_string(p) + " in two piles");
      used[p] = true;
    }
  }
}

class Shuffle;

struct Deterministic {
  Permutation perm;
};
/// Uniform cyclic shift of the listed positions (singleton piles).
struct RandomCut {
  std::vector<Position> positions;
};
struct PileShift {
  PileSpec piles;
};
/// Shift by j piles with probability weights[j].
struct WeightedShift {
  PileSpec piles;
  std::vector<Rational> weights;
};
struct PileScramble {
  PileSpec piles;
};
struct Complete {
  std::vector<Position> region;
};
/// parts[0] is applied first.
struct Compose {
  std::vector<Shuffle> parts;
};

using ShuffleNode =
    std::variant<Deterministic, RandomCut, PileShift, WeightedShift, PileScramble, Complete, Compose>;

/// A distribution over permutations of `degree` positions, described as a tree.
class Shuffle {
 public:
  Shuffle() : degree_(0), node_(Deterministic{}) {}
  Shuffle(std::size_t degree, ShuffleNode node) : degree_(degree), node_(std::move(node)) {}

  std::size_t degree() const noexcept { return degree_; }
  const ShuffleNode& node() const noexcept { return node_; }

 private:
  std::size_t degree_;
  ShuffleNode node_;
};

// ---------------------------------------------------------------------------
// Constructors with invariant checks

inline Shuffle deterministic(Permutation perm) {
  const auto degree = perm.degree();
  return Shuffle(degree, Deterministic{std::move(perm)});
}

inline Shuffle identity_shuffle(std::size_t degree) {
  return deterministic(Permutation::identity(degree));
}

inline Shuffle random_cut(std::vector<Position> positions, std::size_t degree) {
  validate(PileSpec::singletons(positions), degree);
  return Shuffle(degree, RandomCut{std::move(positions)});
}

inline Shuffle pile_shift_spec(PileSpec piles, std::size_t degree) {
  validate(piles, degree);
  return Shuffle(degree, PileShift{std::move(piles)});
}

inline Shuffle weighted_shift_spec(PileSpec piles, std::vector<Rational> weights, std::size_t degree) {
  validate(piles, degree);
  if (weights.size() != piles.count()) {
    throw Error(ErrorCode::bad_weights, "expected " + std::to_string(piles.count()) + " weights, got " +
                                            std::to_string(weights.size()));
  }
  Rational total = 0;
  for (const auto& w : weights) {
    if (w < 0) throw Error(ErrorCode::bad_weights, "negative weight " + to_string(w));
    total += w;
  }
  if (total != 1) throw Error(ErrorCode::bad_weights, "weights sum to " + to_string(total));
  return Shuffle(degree, WeightedShift{std::move(piles), std::move(weights)});
}

inline Shuffle pile_scramble(PileSpec piles, std::size_t degree) {
  validate(piles, degree);
  return Shuffle(degree, PileScramble{std::move(piles)});
}

inline Shuffle complete(std::vector<Position> region, std::size_t degree) {
  validate(PileSpec::singletons(region), degree);
  return Shuffle(degree, Complete{std::move(region)});
}

/// Sequential composition; nested Compose nodes are flattened.
inline Shuffle compose(const std::vector<Shuffle>& parts) {
  if (parts.empty()) throw Error(ErrorCode::invalid_argument, "empty composition");
  Compose out;
  for (const auto& s : parts) {
    if (s.degree() != parts.front().degree()) {
      throw Error(ErrorCode::degree_mismatch, "composing shuffles of degree " +
                                                  std::to_string(parts.front().degree()) + " and " +
                                                  std::to_string(s.degree()));
    }
    if (const auto* c = std::get_if<Compose>(&s.node())) {
      out.parts.insert(out.parts.end(), c->parts.begin(), c->parts.end());
    } else {
      out.parts.push_back(s);
    }
  }
  return Shuffle(parts.front().degree(), std::move(out));
}

inline Shuffle compose(const Shuffle& first, const Shuffle& second) { return compose({first, second}); }

/// Primitive nodes in application order.
inline std::vector<Shuffle> flatten(const Shuffle& s) {
  if (const auto* c = std::get_if<Compose>(&s.node())) {
    std::vector<Shuffle> out;
    for (const auto& part : c->parts) {
      auto sub = flatten(part);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
  return {s};
}

// ---------------------------------------------------------------------------
// Outcome permutations of the primitives

/// Shift by d: pile j goes to slot (j + d) mod k.
inline Permutation pile_shift_permutation(const PileSpec& spec, std::size_t degree, std::size_t d) {
  std::vector<Position> out(degree);
  std::iota(out.begin(), out.end(), Position{0});
  const std::size_t k = spec.count();
  for (std::size_t j = 0; j < k; ++j) {
    const auto& from = spec.piles[j];
    const auto& to = spec.piles[(j + d) % k];
    for (std::size_t t = 0; t < from.size(); ++t) out[from[t]] = to[t];
  }
  return Permutation(std::move(out));
}

/// Pile j goes to slot order[j].
inline Permutation pile_permutation(const PileSpec& spec, std::size_t degree,
                                    const std::vector<std::size_t>& order) {
  std::vector<Position> out(degree);
  std::iota(out.begin(), out.end(), Position{0});
  for (std::size_t j = 0; j < spec.count(); ++j) {
    const auto& from = spec.piles[j];
    const auto& to = spec.piles[order[j]];
    for (std::size_t t = 0; t < from.size(); ++t) out[from[t]] = to[t];
  }
  return Permutation(std::move(out));
}

// ---------------------------------------------------------------------------
// Exact support

struct OutcomeDistribution {
  /// Sorted by permutation; probabilities strictly positive, summing to 1.
  std::vector<std::pair<Permutation, Rational>> outcomes;

  std::size_t size() const noexcept { return outcomes.size(); }

  Rational probability_of(const Permutation& p) const {
    auto it = std::lower_bound(outcomes.begin(), outcomes.end(), p,
                               [](const auto& e, const Permutation& q) { return e.first < q; });
    if (it != outcomes.end() && it->first == p) return it->second;
    return 0;
  }

  friend bool operator==(const OutcomeDistribution&, const OutcomeDistribution&) = default;
};

inline constexpr std::size_t default_support_cap = 10'000'000;

inline BigInt factorial(std::size_t n) {
  BigInt out = 1;
  for (std::size_t i = 2; i <= n; ++i) out *= i;
  return out;
}

/// Upper bound on the number of outcomes (product over primitive factors).
inline BigInt estimated_support_size(const Shuffle& s) {
  return std::visit(
      [&](const auto& node) -> BigInt {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Deterministic>) {
          return 1;
        } else if constexpr (std::is_same_v<T, RandomCut>) {
          return std::max<std::size_t>(node.positions.size(), 1);
        } else if constexpr (std::is_same_v<T, PileShift>) {
          return std::max<std::size_t>(node.piles.count(), 1);
        } else if constexpr (std::is_same_v<T, WeightedShift>) {
          std::size_t n = 0;
          for (const auto& w : node.weights) n += (w > 0);
          return n;
        } else if constexpr (std::is_same_v<T, PileScramble>) {
          return factorial(node.piles.count());
        } else if constexpr (std::is_same_v<T, Complete>) {
          return factorial(node.region.size());
        } else {
          BigInt total = 1;
          for (const auto& part : node.parts) total *= estimated_support_size(part);
          return total;
        }
      },
      s.node());
}

namespace detail {

inline std::vector<std::pair<Permutation, Rational>> primitive_support(const Shuffle& s) {
  const std::size_t degree = s.degree();
  std::vector<std::pair<Permutation, Rational>> out;
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Deterministic>) {
          out.emplace_back(node.perm, Rational(1));
        } else if constexpr (std::is_same_v<T, RandomCut>) {
          const auto spec = PileSpec::singletons(node.positions);
          const std::size_t k = std::max<std::size_t>(spec.count(), 1);
          for (std::size_t d = 0; d < k; ++d) {
            out.emplace_back(pile_shift_permutation(spec, degree, d), Rational(1, k));
          }
        } else if constexpr (std::is_same_v<T, PileShift>) {
          const std::size_t k = std::max<std::size_t>(node.piles.count(), 1);
          for (std::size_t d = 0; d < k; ++d) {
            out.emplace_back(pile_shift_permutation(node.piles, degree, d), Rational(1, k));
          }
        } else if constexpr (std::is_same_v<T, WeightedShift>) {
          for (std::size_t d = 0; d < node.weights.size(); ++d) {
            if (node.weights[d] > 0) out.emplace_back(pile_shift_permutation(node.piles, degree, d), node.weights[d]);
          }
        } else if constexpr (std::is_same_v<T, PileScramble>) {
          std::vector<std::size_t> order(node.piles.count());
          std::iota(order.begin(), order.end(), 0);
          const Rational p(1, BigInt(factorial(order.size())));
          do {
            out.emplace_back(pile_permutation(node.piles, degree, order), p);
          } while (std::next_permutation(order.begin(), order.end()));
        } else if constexpr (std::is_same_v<T, Complete>) {
          const auto spec = PileSpec::singletons(node.region);
          std::vector<std::size_t> order(spec.count());
          std::iota(order.begin(), order.end(), 0);
          const Rational p(1, BigInt(factorial(order.size())));
          do {
            out.emplace_back(pile_permutation(spec, degree, order), p);
          } while (std::next_permutation(order.begin(), order.end()));
        }
      },
      s.node());
  return out;
}

}  // namespace detail

/// Exact outcome distribution. Throws SupportTooLarge above `cap`.
inline OutcomeDistribution support(const Shuffle& s, std::size_t cap = default_support_cap) {
  const BigInt estimate = estimated_support_size(s);
  if (estimate > cap) {
    throw Error(ErrorCode::support_too_large,
                "estimated support " + estimate.str() + " exceeds cap " + std::to_string(cap));
  }
  std::map<Permutation, Rational> acc;
  acc.emplace(Permutation::identity(s.degree()), Rational(1));
  for (const auto& part : flatten(s)) {
    if (part.degree() != s.degree()) throw Error(ErrorCode::degree_mismatch, "child degree differs");
    const auto factor = detail::primitive_support(part);
    std::map<Permutation, Rational> next;
    for (const auto& [sigma1, p1] : acc) {
      for (const auto& [sigma2, p2] : factor) {
        next[then(sigma1, sigma2)] += p1 * p2;
      }
    }
    acc = std::move(next);
  }
  OutcomeDistribution out;
  out.outcomes.assign(acc.begin(), acc.end());
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

inline Permutation sample(const Shuffle& s, Rng& rng) {
  Permutation acc = Permutation::identity(s.degree());
  for (const auto& part : flatten(s)) {
    const std::size_t degree = part.degree();
    Permutation step = std::visit(
        [&](const auto& node) -> Permutation {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Deterministic>) {
            return node.perm;
          } else if constexpr (std::is_same_v<T, RandomCut>) {
            const auto spec = PileSpec::singletons(node.positions);
            return pile_shift_permutation(spec, degree, rng.below(spec.count()));
          } else if constexpr (std::is_same_v<T, PileShift>) {
            return pile_shift_permutation(node.piles, degree, rng.below(node.piles.count()));
          } else if constexpr (std::is_same_v<T, WeightedShift>) {
            const double u = rng.unit();
            double cumulative = 0;
            std::size_t d = 0;
            for (; d + 1 < node.weights.size(); ++d) {
              cumulative += node.weights[d].template convert_to<double>();
              if (u < cumulative) break;
            }
            while (node.weights[d] == 0 && d > 0) --d;
            return pile_shift_permutation(node.piles, degree, d);
          } else if constexpr (std::is_same_v<T, PileScramble> || std::is_same_v<T, Complete>) {
            PileSpec spec;
            if constexpr (std::is_same_v<T, PileScramble>) spec = node.piles;
            else spec = PileSpec::singletons(node.region);
            std::vector<std::size_t> order(spec.count());
            std::iota(order.begin(), order.end(), 0);
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
            return pile_permutation(spec, degree, order);
          } else {
            return Permutation::identity(degree);
          }
        },
        part.node());
    acc = then(acc, step);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Relabelling and tallies

/// Re-hosts `s` inside a larger table: old position i becomes map[i].
inline Shuffle embed(const Shuffle& s, const std::vector<Position>& map, std::size_t new_degree) {
  if (map.size() != s.degree()) throw Error(ErrorCode::degree_mismatch, "embedding map size");
  auto relabel = [&](const std::vector<Position>& ps) {
    std::vector<Position> out;
    out.reserve(ps.size());
    for (Position p : ps) out.push_back(map.at(p));
    return out;
  };
  auto relabel_spec = [&](const PileSpec& spec) {
    PileSpec out;
    for (const auto& pile : spec.piles) out.piles.push_back(relabel(pile));
    return out;
  };
  return std::visit(
      [&](const auto& node) -> Shuffle {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Deterministic>) {
          std::vector<Position> image(new_degree);
          std::iota(image.begin(), image.end(), Position{0});
          for (Position i = 0; i < node.perm.degree(); ++i) image[map[i]] = map[node.perm(i)];
          return deterministic(Permutation(std::move(image)));
        } else if constexpr (std::is_same_v<T, RandomCut>) {
          return random_cut(relabel(node.positions), new_degree);
        } else if constexpr (std::is_same_v<T, PileShift>) {
          return pile_shift_spec(relabel_spec(node.piles), new_degree);
        } else if constexpr (std::is_same_v<T, WeightedShift>) {
          return weighted_shift_spec(relabel_spec(node.piles), node.weights, new_degree);
        } else if constexpr (std::is_same_v<T, PileScramble>) {
          return pile_scramble(relabel_spec(node.piles), new_degree);
        } else if constexpr (std::is_same_v<T, Complete>) {
          return complete(relabel(node.region), new_degree);
        } else {
          std::vector<Shuffle> parts;
          for (const auto& part : node.parts) parts.push_back(embed(part, map, new_degree));
          return compose(parts);
        }
      },
      s.node());
}

/// Counts of randomized primitives. WeightedShift counts as a pile-shift.
struct ShuffleTally {
  std::size_t pile_shift = 0;
  std::size_t random_cut = 0;
  std::size_t pile_scramble = 0;
  std::size_t complete = 0;

  std::string str() const {
    std::string out;
    auto add = [&](const char* name, std::size_t n) {
      if (n == 0) return;
      if (!out.empty()) out += " & ";
      out += std::string(name) + "×" + std::to_string(n);
    };
    add("PSh", pile_shift);
    add("RC", random_cut);
    add("PSc", pile_scramble);
    add("CS", complete);
    return out.empty() ? "none" : out;
  }

  friend bool operator==(const ShuffleTally&, const ShuffleTally&) = default;
};

inline ShuffleTally tally(const Shuffle& s) {
  ShuffleTally t;
  for (const auto& part : flatten(s)) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, RandomCut>) ++t.random_cut;
          else if constexpr (std::is_same_v<T, PileShift> || std::is_same_v<T, WeightedShift>) ++t.pile_shift;
          else if constexpr (std::is_same_v<T, PileScramble>) ++t.pile_scramble;
          else if constexpr (std::is_same_v<T, Complete>) ++t.complete;
        },
        part.node());
  }
  return t;
}

/// Positions a primitive node can move (empty for the identity).
inline std::vector<Position> touched_positions(const Shuffle& s) {
  std::vector<Position> out;
  for (const auto& part : flatten(s)) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Deterministic>) {
            auto m = node.perm.moved();
            out.insert(out.end(), m.begin(), m.end());
          } else if constexpr (std::is_same_v<T, RandomCut>) {
            out.insert(out.end(), node.positions.begin(), node.positions.end());
          } else if constexpr (std::is_same_v<T, Complete>) {
            out.insert(out.end(), node.region.begin(), node.region.end());
          } else if constexpr (std::is_same_v<T, PileShift> || std::is_same_v<T, WeightedShift> ||
                               std::is_same_v<T, PileScramble>) {
            auto ps = node.piles.positions();
            out.insert(out.end(), ps.begin(), ps.end());
          }
        },
        part.node());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cardpsm
