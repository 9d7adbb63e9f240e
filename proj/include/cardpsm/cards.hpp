#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "permutation.hpp"

namespace cardpsm {

enum class Suit : std::uint8_t { heart, club };

constexpr char to_char(Suit s) { return s == Suit::heart ? 'h' : 'c'; }

enum class Face : std::uint8_t { down, up };

using Bits = std::vector<std::uint8_t>;

/// Ordered suits without face state: for example an input table.
class SuitString {
 public:
  SuitString() = default;
  explicit SuitString(std::vector<Suit> symbols) : symbols_(std::move(symbols)) {}

  /// Parses the 'h'/'c' text form.
  static SuitString parse(std::string_view text) {
    std::vector<Suit> symbols;
    symbols.reserve(text.size());
    for (char ch : text) {
      if (ch == 'h') symbols.push_back(Suit::heart);
      else if (ch == 'c') symbols.push_back(Suit::club);
      else throw Error(ErrorCode::parse_error, std::string("invalid suit character '") + ch + "'");
    }
    return SuitString(std::move(symbols));
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  Suit operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const Suit> symbols() const noexcept { return symbols_; }
  auto begin() const noexcept { return symbols_.begin(); }
  auto end() const noexcept { return symbols_.end(); }

  std::size_t count(Suit s) const {
    std::size_t n = 0;
    for (Suit x : symbols_) n += (x == s);
    return n;
  }

  void append(const SuitString& other) {
    symbols_.insert(symbols_.end(), other.symbols_.begin(), other.symbols_.end());
  }

  void push_back(Suit s) { symbols_.push_back(s); }

  std::string str() const {
    std::string out;
    out.reserve(symbols_.size());
    for (Suit s : symbols_) out.push_back(to_char(s));
    return out;
  }

  friend bool operator==(const SuitString&, const SuitString&) = default;
  friend auto operator<=>(const SuitString&, const SuitString&) = default;

 private:
  std::vector<Suit> symbols_;
};

inline SuitString concat(const SuitString& a, const SuitString& b) {
  SuitString out = a;
  out.append(b);
  return out;
}

struct Card {
  Suit suit;
  Face face = Face::down;
  friend bool operator==(const Card&, const Card&) = default;
};

/// The physical table: suits plus face state, positions 0-based.
class CardSequence {
 public:
  CardSequence() = default;
  explicit CardSequence(std::vector<Card> cards) : cards_(std::move(cards)) {}

  static CardSequence face_down(const SuitString& suits) {
    std::vector<Card> cards;
    cards.reserve(suits.size());
    for (Suit s : suits) cards.push_back({s, Face::down});
    return CardSequence(std::move(cards));
  }

  std::size_t size() const noexcept { return cards_.size(); }
  const Card& operator[](std::size_t i) const { return cards_.at(i); }
  std::span<const Card> cards() const noexcept { return cards_; }

  CardSequence revealed(Position p) const {
    CardSequence out = *this;
    out.cards_.at(p).face = Face::up;
    return out;
  }

  SuitString suits() const {
    std::vector<Suit> s;
    s.reserve(cards_.size());
    for (const Card& c : cards_) s.push_back(c.suit);
    return SuitString(std::move(s));
  }

  /// Face-down cards as '?', face-up cards by suit.
  std::string render() const {
    std::string out;
    for (const Card& c : cards_) out.push_back(c.face == Face::up ? to_char(c.suit) : '?');
    return out;
  }

  friend bool operator==(const CardSequence&, const CardSequence&) = default;

 private:
  std::vector<Card> cards_;
};

/// Card at position i moves to position p(i); face states travel with the cards.
inline CardSequence apply(const Permutation& p, const CardSequence& seq) {
  if (p.degree() != seq.size()) {
    throw Error(ErrorCode::degree_mismatch, "permutation degree " + std::to_string(p.degree()) +
                                                " vs sequence length " + std::to_string(seq.size()));
  }
  std::vector<Card> out(seq.size());
  for (Position i = 0; i < seq.size(); ++i) out[p(i)] = seq[i];
  return CardSequence(std::move(out));
}

inline SuitString apply(const Permutation& p, const SuitString& s) {
  if (p.degree() != s.size()) {
    throw Error(ErrorCode::degree_mismatch, "permutation degree " + std::to_string(p.degree()) +
                                                " vs string length " + std::to_string(s.size()));
  }
  std::vector<Suit> out(s.size());
  for (Position i = 0; i < s.size(); ++i) out[p(i)] = s[i];
  return SuitString(std::move(out));
}

// ---------------------------------------------------------------------------
// Encodings

/// Pair encoding: 1 -> hc, 0 -> ch.
inline SuitString encode_pair_bits(std::span<const std::uint8_t> bits) {
  std::vector<Suit> out;
  out.reserve(2 * bits.size());
  for (std::uint8_t b : bits) {
    if (b > 1) throw Error(ErrorCode::invalid_argument, "bit value " + std::to_string(b));
    if (b == 1) {
      out.push_back(Suit::heart);
      out.push_back(Suit::club);
    } else {
      out.push_back(Suit::club);
      out.push_back(Suit::heart);
    }
  }
  return SuitString(std::move(out));
}

inline Bits decode_pair_bits(const SuitString& s) {
  if (s.size() % 2 != 0) {
    throw Error(ErrorCode::odd_length, "pair-encoded string of length " + std::to_string(s.size()));
  }
  Bits bits;
  bits.reserve(s.size() / 2);
  for (std::size_t i = 0; i < s.size(); i += 2) {
    if (s[i] == s[i + 1]) {
      throw Error(ErrorCode::malformed_pair, "pair at position " + std::to_string(i) + " is " +
                                                 std::string(2, to_char(s[i])));
    }
    bits.push_back(s[i] == Suit::heart ? 1 : 0);
  }
  return bits;
}

/// E_m(x): length m, the single heart at position x.
inline SuitString one_hot_encode(std::int64_t x, std::int64_t m) {
  if (m < 1 || x < 0 || x >= m) {
    throw Error(ErrorCode::out_of_range,
                "residue " + std::to_string(x) + " outside Z_" + std::to_string(m));
  }
  std::vector<Suit> out(static_cast<std::size_t>(m), Suit::club);
  out[static_cast<std::size_t>(x)] = Suit::heart;
  return SuitString(std::move(out));
}

inline std::size_t one_hot_decode(const SuitString& s) {
  std::size_t pos = 0;
  std::size_t hearts = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == Suit::heart) {
      pos = i;
      ++hearts;
    }
  }
  if (hearts != 1) {
    throw Error(ErrorCode::not_one_hot, "'" + s.str() + "' has " + std::to_string(hearts) + " hearts");
  }
  return pos;
}

/// Fixes 0 and sends j to m-j; maps E_m(y) to E_m(-y).
inline Permutation negation_permutation(std::size_t m) {
  if (m < 1) throw Error(ErrorCode::invalid_argument, "modulus must be >= 1");
  std::vector<Position> image(m);
  image[0] = 0;
  for (std::size_t j = 1; j < m; ++j) image[j] = static_cast<Position>(m - j);
  return Permutation(std::move(image));
}

inline std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string out;
  for (auto b : bits) out.push_back(b ? '1' : '0');
  return out;
}

inline Bits parse_bits(std::string_view text) {
  Bits out;
  for (char ch : text) {
    if (ch == '0') out.push_back(0);
    else if (ch == '1') out.push_back(1);
    else if (ch == ',' || ch == ' ') continue;
    else throw Error(ErrorCode::parse_error, std::string("invalid bit character '") + ch + "'");
  }
  return out;
}

}  // namespace cardpsm
