#include <gtest/gtest.h>

#include "cardpsm/cards.hpp"
#include "cardpsm/permutation.hpp"
#include "cardpsm/rational.hpp"

using namespace cardpsm;

namespace {

SuitString S(std::string_view s) { return SuitString::parse(s); }

template <typename Fn>
ErrorCode code_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::invalid_argument;
}

// Rotation to the right by one, built by hand.
std::string rotate_right(const std::string& s) {
  if (s.empty()) return s;
  return s.back() + s.substr(0, s.size() - 1);
}

}  // namespace

TEST(PairEncoding, EncodesBitsAsHeartClubPairs) {
  EXPECT_EQ(encode_pair_bits(Bits{1, 0, 1}).str(), "hcchhc");
  EXPECT_EQ(encode_pair_bits(Bits{}).str(), "");
  EXPECT_EQ(encode_pair_bits(Bits{0}).str(), "ch");
}

TEST(PairEncoding, DecodesAndRejectsMalformedPairs) {
  EXPECT_EQ(decode_pair_bits(S("hcchhc")), (Bits{1, 0, 1}));
  EXPECT_EQ(decode_pair_bits(S("ch")), (Bits{0}));
  EXPECT_EQ(code_of([] { decode_pair_bits(S("hh")); }), ErrorCode::malformed_pair);
  EXPECT_EQ(code_of([] { decode_pair_bits(S("hch")); }), ErrorCode::odd_length);
}

TEST(PairEncoding, RoundTripsEveryShortString) {
  for (std::size_t len = 0; len <= 8; ++len) {
    for (std::size_t v = 0; v < (std::size_t{1} << len); ++v) {
      Bits bits;
      for (std::size_t k = 0; k < len; ++k) bits.push_back((v >> k) & 1);
      const auto enc = encode_pair_bits(bits);
      EXPECT_EQ(enc.count(Suit::heart), len);
      EXPECT_EQ(decode_pair_bits(enc), bits);
    }
  }
}

TEST(OneHot, EncodeDecode) {
  EXPECT_EQ(one_hot_encode(0, 3).str(), "hcc");
  EXPECT_EQ(one_hot_encode(2, 3).str(), "cch");
  EXPECT_EQ(code_of([] { one_hot_encode(3, 3); }), ErrorCode::out_of_range);
  EXPECT_EQ(one_hot_decode(S("chc")), 1u);
  EXPECT_EQ(one_hot_decode(S("hc")), 0u);
  EXPECT_EQ(code_of([] { one_hot_decode(S("cc")); }), ErrorCode::not_one_hot);
  EXPECT_EQ(code_of([] { one_hot_decode(S("hh")); }), ErrorCode::not_one_hot);
}

TEST(OneHot, NegationMatchesModularNegation) {
  for (std::size_t m = 1; m <= 7; ++m) {
    const auto neg = negation_permutation(m);
    for (std::size_t x = 0; x < m; ++x) {
      EXPECT_EQ(apply(neg, one_hot_encode(x, m)), one_hot_encode((m - x) % m, m)) << "m=" << m << " x=" << x;
    }
  }
  EXPECT_EQ(apply(negation_permutation(5), one_hot_encode(2, 5)), one_hot_encode(3, 5));
  EXPECT_TRUE(negation_permutation(1).is_identity());
}

TEST(Permutation, ApplyMovesCardAtIToImageOfI) {
  const auto seq = S("hcc");
  EXPECT_EQ(apply(Permutation::identity(3), seq), seq);
  EXPECT_EQ(apply(Permutation({1, 0}), S("hc")).str(), "ch");
  for (std::size_t len = 1; len <= 8; ++len) {
    std::vector<Position> image(len);
    for (std::size_t i = 0; i < len; ++i) image[i] = (i + 1) % len;
    std::string text;
    for (std::size_t i = 0; i < len; ++i) text += (i % 3 == 0) ? 'h' : 'c';
    EXPECT_EQ(apply(Permutation(image), S(text)).str(), rotate_right(text));
  }
  EXPECT_EQ(apply(Permutation({1, 2, 0}), S("hcc")).str(), "chc");
}

TEST(Permutation, ThenComposesLeftToRight) {
  const Permutation a({1, 2, 0});
  const Permutation b({0, 2, 1});
  const auto seq = S("hcc");
  EXPECT_EQ(apply(then(a, b), seq), apply(b, apply(a, seq)));
  EXPECT_TRUE(then(a, a.inverse()).is_identity());
  EXPECT_EQ(code_of([] { then(Permutation::identity(2), Permutation::identity(3)); }), ErrorCode::degree_mismatch);
}

TEST(Permutation, RejectsNonBijections) {
  EXPECT_ANY_THROW(Permutation({0, 0}));
  EXPECT_ANY_THROW(Permutation({0, 2}));
}

TEST(CardSequence, FaceStateTravelsWithCards) {
  auto seq = CardSequence::face_down(S("hc")).revealed(0);
  EXPECT_EQ(seq.render(), "h?");
  EXPECT_EQ(apply(Permutation({1, 0}), seq).render(), "?h");
}

TEST(Rational, TextRoundTrip) {
  EXPECT_EQ(to_string(Rational(2, 4)), "1/2");
  EXPECT_EQ(to_string(Rational(3)), "3/1");
  EXPECT_EQ(parse_rational("6/8"), Rational(3, 4));
  EXPECT_ANY_THROW(parse_rational("1/0"));
  EXPECT_ANY_THROW(parse_rational("abc"));
}
