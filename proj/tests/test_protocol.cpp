#include <gtest/gtest.h>

#include <map>

#include "cardpsm/protocol.hpp"
#include "cardpsm/transform.hpp"

using namespace cardpsm;

namespace {

SuitString S(std::string_view s) { return SuitString::parse(s); }

// Two pair-encoded parties, one helper pair, nothing shuffled.
SingleShuffleProtocol hand_protocol() {
  SingleShuffleProtocol p;
  p.n = 2;
  p.input_tables = {{S("ch"), S("hc")}, {S("ch"), S("hc")}};
  p.helper = S("hc");
  p.shuffle = identity_shuffle(6);
  p.reveal = RevealFull{};
  p.output = OutputMap{PsmDecode{FixedPositions{{0, 1, 2, 3}}, DecodeTable{{{"00", 0}, {"01", 0}, {"10", 0}, {"11", 1}}}}};
  return p;
}

// Gadget table for k = 2, pile_size = 4: pile, delimiter, pile, delimiter.
SingleShuffleProtocol gadget_protocol(const SelectionGadget& g, const std::string& pile0, const std::string& pile1) {
  SingleShuffleProtocol p;
  p.n = 1;
  const auto table = S(pile0 + "hhhc" + pile1 + "hhhc");
  p.input_tables = {{table, table}};
  p.shuffle = random_cut(detail::span_positions(0, g.degree()), g.degree());
  p.reveal = RevealAdaptive{g.strategy};
  p.output = OutputMap{OutputConstant{0}};
  return p;
}

}  // namespace

TEST(InitialSequence, ConcatenatesTablesThenHelper) {
  const auto p = hand_protocol();
  EXPECT_EQ(initial_suits(p, Bits{1, 0}).str(), "hcchhc");
  EXPECT_EQ(initial_sequence(p, Bits{1, 0}).render(), "??????");
  try {
    initial_sequence(p, Bits{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::arity_mismatch);
  }
}

TEST(InitialSequence, SinglePartyIsItsTable) {
  SingleShuffleProtocol p;
  p.n = 1;
  p.input_tables = {{S("hcc"), S("chc")}};
  p.shuffle = identity_shuffle(3);
  EXPECT_EQ(initial_suits(p, Bits{1}), S("chc"));
  EXPECT_EQ(initial_suits(p, Bits{0}), S("hcc"));
}

TEST(Run, IdentityOutcomeRevealsHandLayout) {
  const auto p = hand_protocol();
  for (std::size_t idx = 0; idx < 4; ++idx) {
    const Bits x = input_bits(idx, 2);
    const auto r = run(p, x, Permutation::identity(6));
    std::string expected;
    for (auto b : x) expected += b ? "hc" : "ch";
    expected += "hc";
    std::string got;
    for (const auto& e : r.transcript.events) got += to_char(e.suit);
    EXPECT_EQ(got, expected);
    EXPECT_EQ(r.output, x[0] & x[1]);
  }
}

TEST(Run, OutcomeOutsideSupportRejected) {
  const auto art = additive_to_full_open(and_additive_psm(2, 3));
  const auto d = support(art.protocol.shuffle);
  try {
    run(art.protocol, Bits{1, 1}, Permutation({1, 0, 2, 3, 4, 5}), &d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::outcome_not_in_support);
  }
}

TEST(Run, AdditiveAndOverEveryOutcome) {
  const auto art = additive_to_full_open(and_additive_psm(2, 3));
  const auto d = support(art.protocol.shuffle);
  ASSERT_EQ(d.size(), 6u);
  for (const auto& [perm, pr] : d.outcomes) {
    EXPECT_EQ(run(art.protocol, Bits{1, 1}, perm, &d).output, 1);
    EXPECT_EQ(run(art.protocol, Bits{0, 1}, perm, &d).output, 0);
    EXPECT_EQ(run(art.protocol, Bits{1, 0}, perm, &d).output, 0);
    EXPECT_EQ(run(art.protocol, Bits{0, 0}, perm, &d).output, 0);
  }
}

TEST(EnumerateStates, DeterministicShuffleHasOneTranscript) {
  const auto p = hand_protocol();
  const auto states = enumerate_states(p, Bits{0, 1});
  ASSERT_EQ(states.entries.size(), 1u);
  EXPECT_EQ(states.entries.begin()->second, 1);
  EXPECT_EQ(states.entries.begin()->first.str(), "0c 1h 2h 3c 4h 5c");
}

TEST(EnumerateStates, ProbabilitiesSumToOne) {
  const auto art = additive_to_full_open(and_additive_psm(3, 5));
  for (std::size_t idx = 0; idx < 8; ++idx) {
    const auto states = enumerate_states(art.protocol, input_bits(idx, 3));
    EXPECT_EQ(states.total(), 1);
  }
}

TEST(CardCount, TakesMaximaPerSuit) {
  EXPECT_EQ(card_count(additive_to_full_open(and_additive_psm(2, 3)).protocol), 6u);
  EXPECT_EQ(card_count(psm_to_full_open(to_general(and_additive_psm(2, 3))).protocol), 48u);
  SingleShuffleProtocol p;
  p.n = 1;
  p.input_tables = {{S("hh"), S("cc")}};
  p.shuffle = identity_shuffle(2);
  EXPECT_EQ(card_count(p), 4u);
}

TEST(Reveal, StaticRevealsSortedPositionsOnly) {
  const auto t = reveal(RevealStatic{{3, 0}}, S("hcch"));
  EXPECT_EQ(t.str(), "0h 3h");
  const auto board = t.board(4);
  EXPECT_FALSE(board[1].has_value());
}

TEST(DelimiterScan, SelectsEachPileEquallyOften) {
  const auto g = uniform_selection_gadget(4, 2);
  ASSERT_EQ(g.degree(), 16u);
  const auto p = gadget_protocol(g, "hchc", "chch");
  const auto d = support(p.shuffle);
  ASSERT_EQ(d.size(), 16u);
  std::map<std::string, std::size_t> chosen;
  for (const auto& [perm, pr] : d.outcomes) {
    const auto r = run(p, Bits{0}, perm);
    const auto start = g.strategy.find_delimiter(r.transcript, g.degree());
    ASSERT_TRUE(start.has_value());
    const auto board = r.transcript.board(g.degree());
    std::string pile;
    for (Position q : g.strategy.selected_pile(*start, g.degree())) pile += to_char(*board[q]);
    ++chosen[pile];
  }
  EXPECT_EQ(chosen.size(), 2u);
  EXPECT_EQ(chosen["hchc"], 8u);
  EXPECT_EQ(chosen["chch"], 8u);
}

TEST(DelimiterScan, CutAtDelimiterStartReadsBackwards) {
  const auto g = uniform_selection_gadget(4, 2);
  const auto p = gadget_protocol(g, "hchc", "chch");
  // shift by 12: the first delimiter (at 4) lands at 0, pile 0 wraps to 12..15
  std::vector<Position> image(16);
  for (Position i = 0; i < 16; ++i) image[i] = (i + 12) % 16;
  const auto r = run(p, Bits{0}, Permutation(image));
  EXPECT_EQ(r.transcript.str(), "0h 1h 2h 3c 12h 13c 14h 15c");
}

TEST(DelimiterScan, PilesMayNotContainTheRun) {
  EXPECT_THROW(check_pile_safe(S("chhhc"), 3), Error);
  EXPECT_NO_THROW(check_pile_safe(S("hcchhc"), 3));
  try {
    uniform_selection_gadget(4, 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::pile_pattern_unsafe);
  }
}

TEST(OutputMap, BlockUniqueCountsOnes) {
  auto inner = std::make_shared<const OutputMap>(OutputMap{PsmDecode{FixedPositions{{0, 1}}, DecodeTable{{{"0", 0}, {"1", 1}}}}});
  const OutputMap map{BlockUnique{3, 2, inner}};
  auto transcript = [](const std::string& suits) {
    RevealTranscript t;
    for (std::size_t q = 0; q < suits.size(); ++q) t.events.push_back({Position(q), suits[q] == 'h' ? Suit::heart : Suit::club});
    return t;
  };
  EXPECT_EQ(evaluate(map, transcript("chhcch"), 6), 1);
  EXPECT_EQ(evaluate(map, transcript("hchcch"), 6), 0);
  EXPECT_EQ(evaluate(map, transcript("chchch"), 6), 0);
}
