#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cards.hpp"
#include "error.hpp"
#include "psm.hpp"
#include "rational.hpp"
#include "shuffle.hpp"

namespace cardpsm {

// ---------------------------------------------------------------------------
// Transcripts

struct RevealEvent {
  Position position = 0;
  Suit suit = Suit::heart;
  friend bool operator==(const RevealEvent&, const RevealEvent&) = default;
  friend auto operator<=>(const RevealEvent&, const RevealEvent&) = default;
};

struct RevealTranscript {
  std::vector<RevealEvent> events;

  std::size_t size() const noexcept { return events.size(); }

  /// "3h 0c 1c": position then suit, in reveal order.
  std::string str() const {
    std::string out;
    for (const auto& e : events) {
      if (!out.empty()) out += ' ';
      out += std::to_string(e.position) + to_char(e.suit);
    }
    return out;
  }

  /// Suit at every position, or nullopt where nothing was revealed.
  std::vector<std::optional<Suit>> board(std::size_t degree) const {
    std::vector<std::optional<Suit>> out(degree);
    for (const auto& e : events) out.at(e.position) = e.suit;
    return out;
  }

  friend bool operator==(const RevealTranscript&, const RevealTranscript&) = default;
  friend auto operator<=>(const RevealTranscript&, const RevealTranscript&) = default;
};

// ---------------------------------------------------------------------------
// Adaptive strategy: the delimiter scanner

/// Scans positions 0, 1, ... until `run` hearts followed by a club have been
/// seen at consecutive positions, then reveals the pile_size positions to the
/// left of that delimiter (cyclically) and stops.
struct DelimiterScan {
  std::size_t pile_size = 0;
  std::size_t run = 3;

  static constexpr const char* name = "delimiter_scan";

  /// Start of the first delimiter found by the scan, if any.
  std::optional<std::size_t> find_delimiter(const RevealTranscript& t, std::size_t degree) const {
    const auto board = t.board(degree);
    auto matches = [&](std::size_t club, bool cyclic) {
      if (!board[club] || *board[club] != Suit::club) return false;
      for (std::size_t k = 1; k <= run; ++k) {
        if (!cyclic && club < k) return false;
        const std::size_t q = (club + degree - k) % degree;
        if (!board[q] || *board[q] != Suit::heart) return false;
      }
      return true;
    };
    // scan events come first and sit at positions 0, 1, 2, ...
    std::size_t scanned = 0;
    while (scanned < t.events.size() && t.events[scanned].position == scanned) {
      if (matches(scanned, false)) return (scanned + degree - run) % degree;
      ++scanned;
    }
    if (scanned == degree) {
      for (std::size_t club = 0; club < std::min(run, degree); ++club) {
        if (matches(club, true)) return (club + degree - run) % degree;
      }
    }
    return std::nullopt;
  }

  /// Positions of the selected pile, left to right.
  std::vector<Position> selected_pile(std::size_t delimiter_start, std::size_t degree) const {
    std::vector<Position> out;
    for (std::size_t k = 0; k < pile_size; ++k) {
      out.push_back(static_cast<Position>((delimiter_start + degree * (pile_size + 1) - pile_size + k) % degree));
    }
    return out;
  }

  /// Next position to reveal, or nullopt for Stop.
  std::optional<Position> next(const RevealTranscript& t, std::size_t degree) const {
    if (const auto start = find_delimiter(t, degree)) {
      const auto board = t.board(degree);
      for (Position p : selected_pile(*start, degree)) {
        if (!board[p]) return p;
      }
      return std::nullopt;
    }
    std::size_t scanned = 0;
    while (scanned < t.events.size() && t.events[scanned].position == scanned) ++scanned;
    if (scanned < t.events.size() || scanned >= degree) return std::nullopt;
    return static_cast<Position>(scanned);
  }

  friend bool operator==(const DelimiterScan&, const DelimiterScan&) = default;
};

// ---------------------------------------------------------------------------
// Reveal plans and output maps

struct RevealFull {
  friend bool operator==(const RevealFull&, const RevealFull&) = default;
};
struct RevealStatic {
  std::vector<Position> positions;
  friend bool operator==(const RevealStatic&, const RevealStatic&) = default;
};
struct RevealAdaptive {
  DelimiterScan strategy;
  friend bool operator==(const RevealAdaptive&, const RevealAdaptive&) = default;
};
using RevealPlan = std::variant<RevealFull, RevealStatic, RevealAdaptive>;

inline std::string opening_name(const RevealPlan& plan) {
  switch (plan.index()) {
    case 0: return "full-open";
    case 1: return "static-open";
    default: return "adaptive-open";
  }
}

struct FixedPositions {
  std::vector<Position> positions;
  friend bool operator==(const FixedPositions&, const FixedPositions&) = default;
};
/// The pile chosen by a delimiter scan.
struct SelectedPile {
  std::size_t pile_size = 0;
  std::size_t run = 3;
  friend bool operator==(const SelectedPile&, const SelectedPile&) = default;
};

/// Pair-decodes the cards of `source` into a PSM message tuple and applies `dec`.
struct PsmDecode {
  std::variant<FixedPositions, SelectedPile> source;
  Decoder dec;
  friend bool operator==(const PsmDecode&, const PsmDecode&) = default;
};
/// n one-hot piles of m cards; output dec_on_sum[sum of heart positions mod m].
struct AdditiveDecode {
  std::uint32_t m = 0;
  std::size_t n = 0;
  std::vector<std::uint8_t> dec_on_sum;
  friend bool operator==(const AdditiveDecode&, const AdditiveDecode&) = default;
};
struct OutputTable {
  std::map<std::string, std::uint8_t> entries;  // keyed by RevealTranscript::str()
  friend bool operator==(const OutputTable&, const OutputTable&) = default;
};
struct OutputConstant {
  std::uint8_t value = 0;
  friend bool operator==(const OutputConstant&, const OutputConstant&) = default;
};
struct OutputMap;
/// `blocks` consecutive blocks of block_size cards, each decoded by `inner`
/// on its own block-relative transcript; output 1 iff exactly one block says 1.
struct BlockUnique {
  std::size_t blocks = 0;
  std::size_t block_size = 0;
  std::shared_ptr<const OutputMap> inner;
  friend bool operator==(const BlockUnique& a, const BlockUnique& b);
};

struct OutputMap {
  std::variant<PsmDecode, AdditiveDecode, BlockUnique, OutputTable, OutputConstant> rule;
  friend bool operator==(const OutputMap&, const OutputMap&) = default;
};

inline bool operator==(const BlockUnique& a, const BlockUnique& b) {
  if (a.blocks != b.blocks || a.block_size != b.block_size) return false;
  if (!a.inner || !b.inner) return a.inner == b.inner;
  return *a.inner == *b.inner;
}

namespace detail {

inline SuitString read_suits(const std::vector<std::optional<Suit>>& board, const std::vector<Position>& ps) {
  SuitString out;
  for (Position p : ps) {
    if (p >= board.size() || !board[p]) {
      throw Error(ErrorCode::output_undefined, "position " + std::to_string(p) + " was not revealed");
    }
    out.push_back(*board[p]);
  }
  return out;
}

inline std::vector<Position> range_positions(std::size_t start, std::size_t count) {
  std::vector<Position> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = static_cast<Position>(start + k);
  return out;
}

}  // namespace detail

/// Throws OutputUndefined when the transcript cannot be decoded.
inline std::uint8_t evaluate(const OutputMap& map, const RevealTranscript& t, std::size_t degree) {
  return std::visit(
      [&](const auto& rule) -> std::uint8_t {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, PsmDecode>) {
          std::vector<Position> ps;
          if (const auto* fixed = std::get_if<FixedPositions>(&rule.source)) {
            ps = fixed->positions;
          } else {
            const auto& sel = std::get<SelectedPile>(rule.source);
            const DelimiterScan scan{sel.pile_size, sel.run};
            const auto start = scan.find_delimiter(t, degree);
            if (!start) throw Error(ErrorCode::output_undefined, "no delimiter in transcript");
            ps = scan.selected_pile(*start, degree);
          }
          try {
            const auto bits = decode_pair_bits(detail::read_suits(t.board(degree), ps));
            return decode(rule.dec, bits_to_string(bits));
          } catch (const Error& e) {
            if (e.code() == ErrorCode::malformed_pair || e.code() == ErrorCode::odd_length) {
              throw Error(ErrorCode::output_undefined, e.what());
            }
            throw;
          }
        } else if constexpr (std::is_same_v<T, AdditiveDecode>) {
          const auto board = t.board(degree);
          std::uint32_t sum = 0;
          for (std::size_t i = 0; i < rule.n; ++i) {
            const auto pile = detail::read_suits(board, detail::range_positions(i * rule.m, rule.m));
            std::size_t y = 0;
            try {
              y = one_hot_decode(pile);
            } catch (const Error& e) {
              throw Error(ErrorCode::output_undefined, e.what());
            }
            sum = static_cast<std::uint32_t>((sum + y) % rule.m);
          }
          return rule.dec_on_sum.at(sum);
        } else if constexpr (std::is_same_v<T, BlockUnique>) {
          std::vector<RevealTranscript> parts(rule.blocks);
          for (const auto& e : t.events) {
            const std::size_t j = e.position / rule.block_size;
            if (j >= rule.blocks) throw Error(ErrorCode::output_undefined, "event outside every block");
            parts[j].events.push_back({static_cast<Position>(e.position - j * rule.block_size), e.suit});
          }
          std::size_t ones = 0;
          for (const auto& part : parts) ones += evaluate(*rule.inner, part, rule.block_size);
          return ones == 1 ? 1 : 0;
        } else if constexpr (std::is_same_v<T, OutputTable>) {
          auto it = rule.entries.find(t.str());
          if (it == rule.entries.end()) throw Error(ErrorCode::output_undefined, "no output entry for transcript");
          return it->second;
        } else {
          return rule.value;
        }
      },
      map.rule);
}

/// Positions the output map reads, when statically known.
inline std::optional<std::vector<Position>> read_positions(const OutputMap& map) {
  if (const auto* d = std::get_if<PsmDecode>(&map.rule)) {
    if (const auto* fixed = std::get_if<FixedPositions>(&d->source)) return fixed->positions;
    return std::nullopt;
  }
  if (std::holds_alternative<OutputConstant>(map.rule)) return std::vector<Position>{};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Protocol

/// input_tables[i][b] is party i's suit string for input bit b. `helper`
/// cards are constant and sit after every party's cards.
struct SingleShuffleProtocol {
  std::size_t n = 0;
  std::vector<std::array<SuitString, 2>> input_tables;
  SuitString helper;
  Shuffle shuffle;
  RevealPlan reveal = RevealFull{};
  OutputMap output{OutputConstant{}};

  std::size_t degree() const {
    std::size_t total = helper.size();
    for (const auto& t : input_tables) total += t[0].size();
    return total;
  }

  friend bool operator==(const SingleShuffleProtocol& a, const SingleShuffleProtocol& b);
};

bool shuffle_equal(const Shuffle& a, const Shuffle& b);

namespace detail {

inline bool node_equal(const ShuffleNode& a, const ShuffleNode& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, Deterministic>) return x.perm == y.perm;
        else if constexpr (std::is_same_v<T, RandomCut>) return x.positions == y.positions;
        else if constexpr (std::is_same_v<T, PileShift> || std::is_same_v<T, PileScramble>) return x.piles == y.piles;
        else if constexpr (std::is_same_v<T, WeightedShift>) return x.piles == y.piles && x.weights == y.weights;
        else if constexpr (std::is_same_v<T, Complete>) return x.region == y.region;
        else {
          if (x.parts.size() != y.parts.size()) return false;
          for (std::size_t i = 0; i < x.parts.size(); ++i) {
            if (!shuffle_equal(x.parts[i], y.parts[i])) return false;
          }
          return true;
        }
      },
      a);
}

}  // namespace detail

inline bool shuffle_equal(const Shuffle& a, const Shuffle& b) {
  return a.degree() == b.degree() && detail::node_equal(a.node(), b.node());
}

inline bool operator==(const SingleShuffleProtocol& a, const SingleShuffleProtocol& b) {
  return a.n == b.n && a.input_tables == b.input_tables && a.helper == b.helper &&
         shuffle_equal(a.shuffle, b.shuffle) && a.reveal == b.reveal && a.output == b.output;
}

inline void validate(const SingleShuffleProtocol& p) {
  if (p.input_tables.size() != p.n) throw Error(ErrorCode::arity_mismatch, "need one table pair per party");
  for (std::size_t i = 0; i < p.n; ++i) {
    if (p.input_tables[i][0].size() != p.input_tables[i][1].size()) {
      throw Error(ErrorCode::invalid_argument, "tables of party " + std::to_string(i) + " differ in length");
    }
  }
  if (p.shuffle.degree() != p.degree()) {
    throw Error(ErrorCode::degree_mismatch, "shuffle degree " + std::to_string(p.shuffle.degree()) +
                                                " vs " + std::to_string(p.degree()) + " cards");
  }
  if (const auto* s = std::get_if<RevealStatic>(&p.reveal)) {
    for (Position q : s->positions) {
      if (q >= p.degree()) throw Error(ErrorCode::out_of_range, "static reveal position out of range");
    }
  }
}

inline SuitString initial_suits(const SingleShuffleProtocol& p, const Bits& x) {
  if (x.size() != p.n) {
    throw Error(ErrorCode::arity_mismatch, "input of length " + std::to_string(x.size()) + " for " +
                                               std::to_string(p.n) + " parties");
  }
  SuitString out;
  for (std::size_t i = 0; i < p.n; ++i) {
    if (x[i] > 1) throw Error(ErrorCode::invalid_argument, "input bits must be 0 or 1");
    out.append(p.input_tables[i][x[i]]);
  }
  out.append(p.helper);
  return out;
}

inline CardSequence initial_sequence(const SingleShuffleProtocol& p, const Bits& x) {
  return CardSequence::face_down(initial_suits(p, x));
}

/// Reveals per the plan on an already shuffled table.
inline RevealTranscript reveal(const RevealPlan& plan, const SuitString& table) {
  RevealTranscript t;
  const std::size_t degree = table.size();
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, RevealFull>) {
          for (Position q = 0; q < degree; ++q) t.events.push_back({q, table[q]});
        } else if constexpr (std::is_same_v<T, RevealStatic>) {
          auto ps = r.positions;
          std::sort(ps.begin(), ps.end());
          for (Position q : ps) t.events.push_back({q, table[q]});
        } else {
          std::vector<bool> seen(degree, false);
          while (const auto q = r.strategy.next(t, degree)) {
            if (*q >= degree || seen[*q]) {
              throw Error(ErrorCode::strategy_violation, "strategy re-revealed position " + std::to_string(*q));
            }
            if (t.events.size() >= degree) throw Error(ErrorCode::strategy_violation, "strategy overran the table");
            seen[*q] = true;
            t.events.push_back({*q, table[*q]});
          }
        }
      },
      plan);
  return t;
}

struct RunResult {
  RevealTranscript transcript;
  std::uint8_t output = 0;
};

/// Applies `outcome` to the initial table, reveals, decodes. If `support` is
/// given, the outcome must belong to it.
inline RunResult run(const SingleShuffleProtocol& p, const Bits& x, const Permutation& outcome,
                     const OutcomeDistribution* support_of_shuffle = nullptr) {
  if (support_of_shuffle && support_of_shuffle->probability_of(outcome) == 0) {
    throw Error(ErrorCode::outcome_not_in_support, "permutation is not an outcome of the shuffle");
  }
  const auto table = apply(outcome, initial_suits(p, x));
  RunResult r;
  r.transcript = reveal(p.reveal, table);
  r.output = evaluate(p.output, r.transcript, table.size());
  return r;
}

/// Transcript distribution; keys are raw transcripts.
struct StateDistribution {
  std::map<RevealTranscript, Rational> entries;

  Rational total() const {
    Rational s = 0;
    for (const auto& [k, v] : entries) s += v;
    return s;
  }

  friend bool operator==(const StateDistribution&, const StateDistribution&) = default;
};

inline StateDistribution enumerate_states(const SingleShuffleProtocol& p, const Bits& x,
                                          const OutcomeDistribution& dist) {
  StateDistribution out;
  const auto start = initial_suits(p, x);
  for (const auto& [perm, pr] : dist.outcomes) out.entries[reveal(p.reveal, apply(perm, start))] += pr;
  return out;
}

inline StateDistribution enumerate_states(const SingleShuffleProtocol& p, const Bits& x,
                                          std::size_t cap = default_support_cap) {
  return enumerate_states(p, x, support(p.shuffle, cap));
}

/// Max hearts over all inputs plus max clubs over all inputs.
inline std::size_t card_count(const SingleShuffleProtocol& p) {
  std::size_t hearts = p.helper.count(Suit::heart);
  std::size_t clubs = p.helper.count(Suit::club);
  for (const auto& t : p.input_tables) {
    hearts += std::max(t[0].count(Suit::heart), t[1].count(Suit::heart));
    clubs += std::max(t[0].count(Suit::club), t[1].count(Suit::club));
  }
  return hearts + clubs;
}

}  // namespace cardpsm
