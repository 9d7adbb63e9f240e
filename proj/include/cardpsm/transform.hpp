#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cards.hpp"
#include "error.hpp"
#include "function.hpp"
#include "protocol.hpp"
#include "psm.hpp"
#include "shuffle.hpp"

namespace cardpsm {

// ---------------------------------------------------------------------------
// Artifacts

struct Provenance {
  std::string route;        // thm1 | thm2 | thm3 | fig4 | fig5
  std::string source_kind;  // psm | additive | function
  std::string source_hash;
  std::string function;        // display name; empty when unknown
  std::string function_table;  // truth table bits; empty when unknown
  std::map<std::string, std::vector<Position>> layout;
  std::size_t predicted_cards = 0;
  std::string predicted_tally;
  std::map<std::string, std::string> source_complexity;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CompiledArtifact {
  SingleShuffleProtocol protocol;
  Provenance provenance;

  friend bool operator==(const CompiledArtifact&, const CompiledArtifact&) = default;
};

inline void validate(const CompiledArtifact& a) {
  validate(a.protocol);
  const auto degree = a.protocol.degree();
  for (const auto& [name, ps] : a.provenance.layout) {
    for (Position p : ps) {
      if (p >= degree) throw Error(ErrorCode::out_of_range, "layout entry " + name + " leaves the table");
    }
  }
}

// ---------------------------------------------------------------------------
// Source fingerprints (64-bit FNV-1a over a canonical text dump)

namespace detail {

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string decoder_text(const Decoder& dec) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DecodeTable>) {
          std::string s = "table";
          for (const auto& [k, v] : d.entries) s += " " + k + ":" + std::to_string(v);
          return s;
        } else if constexpr (std::is_same_v<T, DecodeModularSum>) {
          return "sum " + std::to_string(d.m) + " " + std::to_string(d.width) + " " + bits_to_string(d.on_sum);
        } else if constexpr (std::is_same_v<T, DecodeUniqueZero>) {
          return "unique_zero " + std::to_string(d.m) + " " + std::to_string(d.width) + " " + std::to_string(d.blocks);
        } else {
          return "constant " + std::to_string(d.value);
        }
      },
      dec);
}

}  // namespace detail

inline std::string fingerprint(const PsmProtocol& p) {
  std::string text = "psm n=" + std::to_string(p.n) + " r=" + std::to_string(p.randomness_bits) + "\n";
  for (const auto& row : p.randomness) text += row.label + " " + to_string(row.probability) + "\n";
  for (std::size_t i = 0; i < p.n; ++i) {
    for (int b = 0; b < 2; ++b) {
      text += std::to_string(i) + "/" + std::to_string(b) + ":";
      for (const auto& msg : p.enc[i][b]) text += " " + bits_to_string(msg);
      text += "\n";
    }
  }
  text += detail::decoder_text(p.dec);
  return detail::hex64(detail::fnv1a(text));
}

inline std::string fingerprint(const AdditivePsm& a) {
  std::string text = "additive n=" + std::to_string(a.n) + " m=" + std::to_string(a.m) + " U=";
  for (auto u : a.units) text += std::to_string(u) + ",";
  text += " g=";
  for (const auto& g : a.g) text += std::to_string(g[0]) + "/" + std::to_string(g[1]) + ",";
  text += " dec=" + bits_to_string(a.dec_on_sum);
  return detail::hex64(detail::fnv1a(text));
}

inline std::string fingerprint(const FunctionSpec& f) {
  return detail::hex64(detail::fnv1a("function n=" + std::to_string(f.n) + " " + table_string(f)));
}

// ---------------------------------------------------------------------------
// PSM -> card protocol (full, static and adaptive opening)

namespace detail {

inline std::vector<Position> span_positions(std::size_t start, std::size_t count) {
  std::vector<Position> out(count);
  std::iota(out.begin(), out.end(), static_cast<Position>(start));
  return out;
}

/// Shared layout of the PSM compilers: per-party tables and the
/// party-major -> randomness-major regroup. `gap` cards follow each pile.
struct PsmLayout {
  std::vector<std::array<SuitString, 2>> tables;
  std::size_t pile = 0;    // 2c
  std::size_t piles = 0;   // R
  std::size_t inputs = 0;  // 2cR
  std::vector<Position> regroup;  // image of the Deterministic node
  std::map<std::string, std::vector<Position>> layout;
};

inline PsmLayout psm_layout(const PsmProtocol& p, std::size_t gap) {
  validate(p);
  PsmLayout out;
  out.piles = p.randomness.size();
  out.pile = 2 * p.total_message_bits();
  out.inputs = out.pile * out.piles;
  const std::size_t stride = out.pile + gap;
  out.regroup.assign(out.inputs + gap * out.piles, 0);
  std::size_t base = 0;  // start of party i's table
  std::size_t off = 0;   // offset of party i inside a pile
  for (std::size_t i = 0; i < p.n; ++i) {
    const std::size_t width = 2 * p.message_bits[i];
    std::array<SuitString, 2> t;
    for (std::uint8_t b = 0; b < 2; ++b) {
      for (std::size_t rho = 0; rho < out.piles; ++rho) t[b].append(encode_pair_bits(p.message(i, b, rho)));
    }
    out.tables.push_back(std::move(t));
    for (std::size_t rho = 0; rho < out.piles; ++rho) {
      out.layout["mu[" + std::to_string(i) + "][" + std::to_string(rho) + "]"] =
          span_positions(base + rho * width, width);
      for (std::size_t k = 0; k < width; ++k) {
        out.regroup[base + rho * width + k] = static_cast<Position>(rho * stride + off + k);
      }
    }
    base += width * out.piles;
    off += width;
  }
  for (std::size_t rho = 0; rho < out.piles; ++rho) {
    for (std::size_t k = 0; k < gap; ++k) {
      out.regroup[out.inputs + rho * gap + k] = static_cast<Position>(rho * stride + out.pile + k);
    }
  }
  return out;
}

/// Shift weights so that slot 0 shows pile rho with probability Pr[rho]:
/// a shift by d brings pile (R - d) mod R to slot 0.
inline std::vector<Rational> slot0_weights(const PsmProtocol& p) {
  const std::size_t R = p.randomness.size();
  std::vector<Rational> w(R);
  for (std::size_t d = 0; d < R; ++d) w[d] = p.randomness[(R - d) % R].probability;
  return w;
}

inline Shuffle selection_shift(const PsmProtocol& p, PileSpec piles, std::size_t degree) {
  if (p.uniform()) return pile_shift_spec(std::move(piles), degree);
  return weighted_shift_spec(std::move(piles), slot0_weights(p), degree);
}

inline std::map<std::string, std::string> psm_complexity(const PsmProtocol& p) {
  const auto cx = complexity(p);
  return {{"R", std::to_string(p.randomness.size())},
          {"c", std::to_string(cx.c)},
          {"r", std::to_string(cx.r)},
          {"uniform", p.uniform() ? "1" : "0"}};
}

inline CompiledArtifact psm_artifact(const PsmProtocol& p, const std::string& route, std::string predicted_tally,
                                     PsmLayout layout,
                                     SuitString helper, Shuffle shuffle, RevealPlan reveal, OutputMap output) {
  CompiledArtifact a;
  a.protocol.n = p.n;
  a.protocol.input_tables = std::move(layout.tables);
  a.protocol.helper = std::move(helper);
  a.protocol.shuffle = std::move(shuffle);
  a.protocol.reveal = std::move(reveal);
  a.protocol.output = std::move(output);
  a.provenance.route = route;
  a.provenance.source_kind = "psm";
  a.provenance.source_hash = fingerprint(p);
  a.provenance.layout = std::move(layout.layout);
  a.provenance.source_complexity = psm_complexity(p);
  a.provenance.predicted_tally = std::move(predicted_tally);
  validate(a);
  return a;
}

}  // namespace detail

/// Regroup, select a pile by (weighted) pile-shift, complete-shuffle the rest;
/// every card is opened and the first pile is decoded.
inline CompiledArtifact psm_to_full_open(const PsmProtocol& p, std::size_t cap = default_support_cap) {
  if (p.randomness.size() > cap) throw Error(ErrorCode::support_too_large, "randomness support exceeds cap");
  auto layout = detail::psm_layout(p, 0);
  const std::size_t degree = layout.inputs;
  const std::size_t pile = layout.pile;
  const std::size_t piles = layout.piles;
  Shuffle shuffle = compose({deterministic(Permutation(layout.regroup)),
                             detail::selection_shift(p, PileSpec::contiguous(0, piles, pile), degree),
                             complete(detail::span_positions(pile, degree - pile), degree)});
  OutputMap out{PsmDecode{FixedPositions{detail::span_positions(0, pile)}, p.dec}};
  auto a = detail::psm_artifact(p, "thm1", "PSh×1 & CS×1", std::move(layout), {}, std::move(shuffle), RevealFull{}, std::move(out));
  a.provenance.predicted_cards = 2 * p.total_message_bits() * p.randomness.size();
  return a;
}

/// As psm_to_full_open without the complete shuffle; only the first pile is opened.
inline CompiledArtifact psm_to_static_open(const PsmProtocol& p, std::size_t cap = default_support_cap) {
  if (p.randomness.size() > cap) throw Error(ErrorCode::support_too_large, "randomness support exceeds cap");
  auto layout = detail::psm_layout(p, 0);
  const std::size_t degree = layout.inputs;
  const std::size_t pile = layout.pile;
  Shuffle shuffle = compose({deterministic(Permutation(layout.regroup)),
                             detail::selection_shift(p, PileSpec::contiguous(0, layout.piles, pile), degree)});
  const auto opened = detail::span_positions(0, pile);
  OutputMap out{PsmDecode{FixedPositions{opened}, p.dec}};
  auto a = detail::psm_artifact(p, "thm2", "PSh×1", std::move(layout), {}, std::move(shuffle), RevealStatic{opened},
                                std::move(out));
  a.provenance.predicted_cards = 2 * p.total_message_bits() * p.randomness.size();
  return a;
}

/// Layout for selecting one of k piles with a random cut: pile j occupies
/// [j*stride, j*stride + pile_size), followed by `run` hearts and a club.
struct SelectionGadget {
  std::size_t pile_size = 0;
  std::size_t piles = 0;
  std::size_t run = 3;
  SuitString delimiters;  // k copies of h^run c
  DelimiterScan strategy;

  std::size_t stride() const noexcept { return pile_size + run + 1; }
  std::size_t degree() const noexcept { return stride() * piles; }
  std::vector<Position> pile_positions(std::size_t j) const {
    std::vector<Position> out(pile_size);
    std::iota(out.begin(), out.end(), static_cast<Position>(j * stride()));
    return out;
  }
};

/// Throws PilePatternUnsafe if `pile` contains `run` consecutive hearts.
inline void check_pile_safe(const SuitString& pile, std::size_t run) {
  std::size_t streak = 0;
  for (Suit s : pile) {
    streak = s == Suit::heart ? streak + 1 : 0;
    if (streak >= run) throw Error(ErrorCode::pile_pattern_unsafe, "pile '" + pile.str() + "' contains the delimiter run");
  }
}

/// Pair-encoded piles never hold three hearts in a row, so run >= 3 is safe for them.
inline SelectionGadget uniform_selection_gadget(std::size_t pile_size, std::size_t k, std::size_t run = 3) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "need at least one pile");
  if (run < 3) {
    throw Error(ErrorCode::pile_pattern_unsafe, "a run of " + std::to_string(run) + " hearts can occur in a pair-encoded pile");
  }
  SelectionGadget g;
  g.pile_size = pile_size;
  g.piles = k;
  g.run = run;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t h = 0; h < run; ++h) g.delimiters.push_back(Suit::heart);
    g.delimiters.push_back(Suit::club);
  }
  g.strategy = DelimiterScan{pile_size, run};
  return g;
}

/// Piles interleaved with delimiters, one random cut over the whole table,
/// adaptive opening of the pile left of the first delimiter found.
inline CompiledArtifact psm_to_adaptive(const PsmProtocol& p, std::size_t cap = default_support_cap) {
  if (p.randomness.size() > cap) throw Error(ErrorCode::support_too_large, "randomness support exceeds cap");
  if (!p.uniform()) {
    throw Error(ErrorCode::incompatible_route, "adaptive opening selects piles uniformly; randomness must be uniform");
  }
  const auto gadget = uniform_selection_gadget(2 * p.total_message_bits(), p.randomness.size());
  auto layout = detail::psm_layout(p, gadget.run + 1);
  for (const auto& t : layout.tables) {
    check_pile_safe(t[0], gadget.run);
    check_pile_safe(t[1], gadget.run);
  }
  const std::size_t degree = gadget.degree();
  for (std::size_t j = 0; j < gadget.piles; ++j) {
    layout.layout["delimiter[" + std::to_string(j) + "]"] =
        detail::span_positions(layout.inputs + j * (gadget.run + 1), gadget.run + 1);
  }
  Shuffle shuffle = compose({deterministic(Permutation(layout.regroup)),
                             random_cut(detail::span_positions(0, degree), degree)});
  OutputMap out{PsmDecode{SelectedPile{gadget.pile_size, gadget.run}, p.dec}};
  auto a = detail::psm_artifact(p, "thm3", "RC×1", std::move(layout), gadget.delimiters, std::move(shuffle),
                                RevealAdaptive{gadget.strategy}, std::move(out));
  a.provenance.predicted_cards = gadget.degree();
  return a;
}

// ---------------------------------------------------------------------------
// Additive PSM -> card protocol

/// U = {alpha_0, ..., alpha_{k-1}} with alpha_l = alpha0^(l+1) (so
/// alpha_{k-1} = 1) and Z_m^* = union of the cosets betas[s] * U.
struct GroupContext {
  std::uint32_t m = 0;
  std::vector<std::uint32_t> units;
  std::uint32_t alpha0 = 1;
  std::vector<std::uint32_t> betas;

  std::size_t k() const noexcept { return units.size(); }
  std::size_t t() const noexcept { return betas.size(); }

  std::uint32_t alpha(std::size_t l) const {
    std::uint32_t v = 1;
    for (std::size_t e = 0; e <= l; ++e) v = mod_mul(v, alpha0, m);
    return v;
  }

  friend bool operator==(const GroupContext&, const GroupContext&) = default;
};

inline std::size_t multiplicative_order(std::uint32_t a, std::uint32_t m) {
  std::uint32_t v = a % m;
  std::size_t order = 1;
  while (v != 1) {
    if (v == 0 || order > m) return 0;
    v = mod_mul(v, a, m);
    ++order;
  }
  return order;
}

inline void validate(const GroupContext& ctx) {
  if (!is_prime(ctx.m)) throw Error(ErrorCode::bad_context, std::to_string(ctx.m) + " is not prime");
  if (!is_unit_subgroup(ctx.units, ctx.m)) throw Error(ErrorCode::bad_context, "U is not a subgroup");
  if (std::find(ctx.units.begin(), ctx.units.end(), ctx.alpha0) == ctx.units.end() ||
      multiplicative_order(ctx.alpha0, ctx.m) != ctx.k()) {
    throw Error(ErrorCode::bad_context, "alpha0 does not generate U");
  }
  if (ctx.t() * ctx.k() != ctx.m - 1) throw Error(ErrorCode::bad_context, "wrong number of coset representatives");
  std::vector<bool> hit(ctx.m, false);
  for (auto beta : ctx.betas) {
    if (beta == 0 || beta >= ctx.m) throw Error(ErrorCode::bad_context, "coset representative outside Z_m^*");
    for (auto u : ctx.units) {
      const auto v = mod_mul(beta, u, ctx.m);
      if (hit[v]) throw Error(ErrorCode::bad_context, "cosets overlap");
      hit[v] = true;
    }
  }
}

/// alpha0 = least generator of U; betas = least unused representatives, ascending.
inline GroupContext make_group_context(std::uint32_t m, std::vector<std::uint32_t> units) {
  if (!is_prime(m)) throw Error(ErrorCode::not_prime, std::to_string(m) + " is not prime");
  std::sort(units.begin(), units.end());
  if (!is_unit_subgroup(units, m)) throw Error(ErrorCode::bad_context, "U is not a subgroup of Z_m^*");
  GroupContext ctx;
  ctx.m = m;
  ctx.units = units;
  ctx.alpha0 = 0;
  for (auto a : units) {
    if (multiplicative_order(a, m) == units.size()) {
      ctx.alpha0 = a;
      break;
    }
  }
  if (ctx.alpha0 == 0) throw Error(ErrorCode::bad_context, "U is not cyclic");
  std::vector<bool> covered(m, false);
  for (std::uint32_t b = 1; b < m; ++b) {
    if (covered[b]) continue;
    ctx.betas.push_back(b);
    for (auto u : units) covered[mod_mul(b, u, m)] = true;
  }
  validate(ctx);
  return ctx;
}

/// All subgroups of Z_m^* (one per divisor of m-1), each sorted.
inline std::vector<std::vector<std::uint32_t>> unit_subgroups(std::uint32_t m) {
  std::vector<std::vector<std::uint32_t>> out;
  if (!is_prime(m)) throw Error(ErrorCode::not_prime, std::to_string(m) + " is not prime");
  std::uint32_t g = 1;
  for (std::uint32_t a = 1; a < m; ++a) {
    if (multiplicative_order(a, m) == m - 1) {
      g = a;
      break;
    }
  }
  for (std::uint32_t k = 1; k <= m - 1; ++k) {
    if ((m - 1) % k) continue;
    // the unique subgroup of order k is generated by g^((m-1)/k)
    std::uint32_t h = 1;
    for (std::uint32_t e = 0; e < (m - 1) / k; ++e) h = mod_mul(h, g, m);
    std::vector<std::uint32_t> sub;
    std::uint32_t v = 1;
    for (std::uint32_t e = 0; e < k; ++e) {
      sub.push_back(v);
      v = mod_mul(v, h, m);
    }
    std::sort(sub.begin(), sub.end());
    out.push_back(std::move(sub));
  }
  return out;
}

namespace detail {

/// Forward regroup of the multiply-by-unit fragment on n one-hot piles:
/// value 0 of pile i -> i; value beta_s*alpha_l of pile i -> n + l*t*n + s*n + i.
inline Permutation unit_regroup(const GroupContext& ctx, std::size_t n) {
  validate(ctx);
  const std::size_t m = ctx.m;
  const std::size_t t = ctx.t();
  std::vector<Position> image(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    image[i * m] = static_cast<Position>(i);
    for (std::size_t s = 0; s < t; ++s) {
      for (std::size_t l = 0; l < ctx.k(); ++l) {
        const auto gamma = mod_mul(ctx.betas[s], ctx.alpha(l), ctx.m);
        image[i * m + gamma] = static_cast<Position>(n + l * t * n + s * n + i);
      }
    }
  }
  return Permutation(std::move(image));
}

}  // namespace detail

/// Fragment over n piles of m cards mapping E(y_i) to E(u*y_i) with u uniform
/// on U. A shift by d piles gives u = alpha0^d. `inverse_ctx` drives the
/// regroup back (it equals `ctx` except in mutation tests).
inline Shuffle multiply_by_unit(const GroupContext& ctx, std::size_t n, const GroupContext& inverse_ctx) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "need at least one pile");
  if (inverse_ctx.m != ctx.m || inverse_ctx.k() != ctx.k()) throw Error(ErrorCode::bad_context, "contexts disagree");
  const std::size_t degree = n * ctx.m;
  const auto forward = detail::unit_regroup(ctx, n);
  const auto back = detail::unit_regroup(inverse_ctx, n).inverse();
  const std::size_t q = ctx.t() * n;
  return compose({deterministic(forward), pile_shift_spec(PileSpec::contiguous(static_cast<Position>(n), ctx.k(), q), degree),
                  deterministic(back)});
}

inline Shuffle multiply_by_unit(const GroupContext& ctx, std::size_t n) { return multiply_by_unit(ctx, n, ctx); }

namespace detail {

inline Permutation negate_pile(std::size_t pile, std::size_t m, std::size_t degree) {
  std::vector<Position> image(degree);
  std::iota(image.begin(), image.end(), Position{0});
  const auto neg = negation_permutation(m);
  for (std::size_t j = 0; j < m; ++j) image[pile * m + j] = static_cast<Position>(pile * m + neg(static_cast<Position>(j)));
  return Permutation(std::move(image));
}

}  // namespace detail

/// Fragment over n piles of m cards mapping E(y_i) to E(y_i - r_i) with
/// uniformly random zero-sum r. Pile n-1 is the running accumulator; a shift
/// by d on the pair (i, n-1) gives r_i = d.
inline Shuffle add_zero_shares(std::size_t m, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::too_few_parties, "zero shares need at least two piles");
  if (m < 1) throw Error(ErrorCode::invalid_argument, "modulus must be >= 1");
  const std::size_t degree = n * m;
  std::vector<Shuffle> parts;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    PileSpec columns;
    for (std::size_t j = 0; j < m; ++j) {
      columns.piles.push_back({static_cast<Position>(i * m + j), static_cast<Position>((n - 1) * m + j)});
    }
    parts.push_back(deterministic(detail::negate_pile(i, m, degree)));
    parts.push_back(pile_shift_spec(std::move(columns), degree));
    parts.push_back(deterministic(detail::negate_pile(i, m, degree)));
  }
  return compose(parts);
}

/// One-hot inputs E(g_i(b)), multiply by a unit, add zero shares, open everything.
inline CompiledArtifact additive_to_full_open(const AdditivePsm& a) {
  validate(a);
  const auto ctx = make_group_context(a.m, a.units);
  CompiledArtifact out;
  auto& p = out.protocol;
  p.n = a.n;
  for (std::size_t i = 0; i < a.n; ++i) {
    p.input_tables.push_back({one_hot_encode(a.g[i][0], a.m), one_hot_encode(a.g[i][1], a.m)});
    out.provenance.layout["pile[" + std::to_string(i) + "]"] = detail::span_positions(i * a.m, a.m);
  }
  std::vector<Shuffle> parts{multiply_by_unit(ctx, a.n)};
  if (a.n >= 2) parts.push_back(add_zero_shares(a.m, a.n));
  p.shuffle = compose(parts);
  p.reveal = RevealFull{};
  p.output = OutputMap{AdditiveDecode{a.m, a.n, a.dec_on_sum}};
  out.provenance.route = "fig4";
  out.provenance.source_kind = "additive";
  out.provenance.source_hash = fingerprint(a);
  out.provenance.predicted_cards = a.m * a.n;
  out.provenance.predicted_tally = "PSh×" + std::to_string(a.n);
  out.provenance.source_complexity = {{"m", std::to_string(a.m)}, {"n", std::to_string(a.n)}};
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------
// AND protocol -> any f

using AndFactory = std::function<SingleShuffleProtocol(std::size_t)>;

/// AND_n via the additive compiler over the given prime (default: least prime > n).
inline AndFactory additive_and_factory(std::uint32_t modulus = 0) {
  return [modulus](std::size_t n) {
    const std::uint32_t m = modulus ? modulus : least_prime_above(n);
    return additive_to_full_open(and_additive_psm(n, m)).protocol;
  };
}

/// One AND block per accepting input a^(j) (lexicographic), party i feeding
/// [x_i == a_i^(j)] to block j; blocks are pile-scrambled and the output is
/// 1 iff exactly one block outputs 1.
inline CompiledArtifact and_to_general(const FunctionSpec& f, const AndFactory& factory) {
  const auto accepting = accepting_inputs(f);
  const std::size_t N = accepting.size();
  CompiledArtifact out;
  auto& p = out.protocol;
  p.n = f.n;
  out.provenance.route = "fig5";
  out.provenance.source_kind = "function";
  out.provenance.source_hash = fingerprint(f);
  out.provenance.function_table = table_string(f);
  if (N == 0) {
    p.input_tables.assign(f.n, {SuitString{}, SuitString{}});
    p.shuffle = identity_shuffle(0);
    p.reveal = RevealFull{};
    p.output = OutputMap{OutputConstant{0}};
    out.provenance.predicted_cards = 0;
    out.provenance.predicted_tally = "none";
    out.provenance.source_complexity = {{"N", "0"}, {"l0", "0"}};
    validate(out);
    return out;
  }
  const auto block = factory(f.n);
  validate(block);
  if (!std::holds_alternative<RevealFull>(block.reveal) || !block.helper.empty() || block.n != f.n) {
    throw Error(ErrorCode::incompatible_route, "AND block must be a full-open protocol on the input cards only");
  }
  const std::size_t l0 = block.degree();
  const std::size_t degree = N * l0;

  std::vector<Position> regroup(degree);
  std::size_t base = 0;
  std::size_t off = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    const std::size_t width = block.input_tables[i][0].size();
    std::array<SuitString, 2> t;
    for (std::uint8_t b = 0; b < 2; ++b) {
      for (std::size_t j = 0; j < N; ++j) t[b].append(block.input_tables[i][accepting[j][i] == b ? 1 : 0]);
    }
    p.input_tables.push_back(std::move(t));
    for (std::size_t j = 0; j < N; ++j) {
      out.provenance.layout["party[" + std::to_string(i) + "].block[" + std::to_string(j) + "]"] =
          detail::span_positions(base + j * width, width);
      for (std::size_t k = 0; k < width; ++k) regroup[base + j * width + k] = static_cast<Position>(j * l0 + off + k);
    }
    base += width * N;
    off += width;
  }

  std::vector<Shuffle> parts{deterministic(Permutation(std::move(regroup)))};
  for (std::size_t j = 0; j < N; ++j) {
    parts.push_back(embed(block.shuffle, detail::span_positions(j * l0, l0), degree));
  }
  parts.push_back(pile_scramble(PileSpec::contiguous(0, N, l0), degree));
  p.shuffle = compose(parts);
  p.reveal = RevealFull{};
  p.output = OutputMap{BlockUnique{N, l0, std::make_shared<const OutputMap>(block.output)}};

  out.provenance.predicted_cards = N * l0;
  auto per_block = tally(block.shuffle);
  ShuffleTally predicted{per_block.pile_shift * N, per_block.random_cut * N, per_block.pile_scramble * N + 1,
                         per_block.complete * N};
  out.provenance.predicted_tally = predicted.str();
  out.provenance.source_complexity = {{"N", std::to_string(N)}, {"l0", std::to_string(l0)}};
  validate(out);
  return out;
}

}  // namespace cardpsm
