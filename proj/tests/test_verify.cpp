#include <gtest/gtest.h>

#include "cardpsm/mutants.hpp"
#include "cardpsm/verify.hpp"

using namespace cardpsm;

namespace {

const FunctionSpec and2 = builtin_function("and", 2);
const FunctionSpec xor2 = builtin_function("xor", 2);

CompiledArtifact fig4_and2() { return additive_to_full_open(and_additive_psm(2, 3)); }
CompiledArtifact thm1_and2() { return psm_to_full_open(to_general(and_additive_psm(2, 3))); }

bool mentions(const VerificationReport& r, const std::string& needle) {
  for (const auto& c : r.counterexamples) {
    if (c.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Correctness, AdditiveAndTierOne) {
  const auto r = check_correctness(fig4_and2().protocol, and2);
  EXPECT_TRUE(r.passed()) << r.text();
  EXPECT_EQ(r.tier, 1);
  EXPECT_EQ(r.metrics.at("runs"), "24");
  EXPECT_FALSE(r.statistical);
}

TEST(Correctness, FullOpenCompilerTierTwo) {
  const auto r = check_correctness(thm1_and2().protocol, and2);
  EXPECT_TRUE(r.passed()) << r.text();
  EXPECT_EQ(r.tier, 2);
}

TEST(Correctness, TamperedOutputMapFailsWithWitness) {
  auto p = fig4_and2().protocol;
  auto& dec = std::get<AdditiveDecode>(p.output.rule);
  dec.dec_on_sum = {0, 0, 0};
  const auto r = check_correctness(p, and2);
  EXPECT_EQ(r.verdict, Verdict::fail);
  EXPECT_TRUE(mentions(r, "x=11"));
  EXPECT_TRUE(mentions(r, "outcome"));
  EXPECT_LE(r.counterexamples.size(), max_listed_counterexamples);
}

TEST(Privacy, AdditiveAndTierOne) {
  const auto r = check_privacy(fig4_and2().protocol, and2);
  EXPECT_TRUE(r.passed()) << r.text();
  EXPECT_EQ(r.tier, 1);
  EXPECT_EQ(r.metrics.at("pairs"), "2");
}

TEST(Privacy, StatesForSameOutputCoincide) {
  const auto p = fig4_and2().protocol;
  const auto d = support(p.shuffle);
  const auto s00 = enumerate_states(p, Bits{0, 0}, d);
  EXPECT_EQ(s00, enumerate_states(p, Bits{0, 1}, d));
  EXPECT_EQ(s00, enumerate_states(p, Bits{1, 0}, d));
  EXPECT_NE(s00, enumerate_states(p, Bits{1, 1}, d));
}

TEST(Privacy, XorBlocksTierOneOverSeventyTwoOutcomes) {
  const auto art = and_to_general(xor2, additive_and_factory());
  const auto c = check_correctness(art.protocol, xor2);
  const auto v = check_privacy(art.protocol, xor2);
  EXPECT_TRUE(c.passed()) << c.text();
  EXPECT_TRUE(v.passed()) << v.text();
  EXPECT_EQ(v.tier, 1);
  EXPECT_EQ(v.metrics.at("support"), "72");
}

TEST(Privacy, MajorityTierTwo) {
  const auto maj = builtin_function("maj", 3);
  const auto art = and_to_general(maj, additive_and_factory());
  EXPECT_EQ(tier2_mode(art.protocol, default_support_cap), "factored");
  const auto c = check_correctness(art.protocol, maj);
  const auto v = check_privacy(art.protocol, maj);
  EXPECT_TRUE(c.passed()) << c.text();
  EXPECT_TRUE(v.passed()) << v.text();
  EXPECT_EQ(v.tier, 2);
}

TEST(Privacy, DroppedCompleteIsCaught) {
  const auto r = check_privacy(mutants::drop_complete(thm1_and2()).protocol, and2);
  EXPECT_EQ(r.verdict, Verdict::fail);
  EXPECT_FALSE(r.counterexamples.empty());
}

TEST(Mutants, AllRejected) {
  const auto reject = [](const CompiledArtifact& a) {
    const auto c = check_correctness(a.protocol, and2);
    const auto v = check_privacy(a.protocol, and2);
    EXPECT_LE(c.tier, 2);
    EXPECT_LE(v.tier, 2);
    return (c.verdict == Verdict::fail && !c.counterexamples.empty()) ||
           (v.verdict == Verdict::fail && !v.counterexamples.empty());
  };
  EXPECT_TRUE(reject(mutants::drop_complete(thm1_and2())));
  EXPECT_TRUE(reject(mutants::corrupted_coset()));
  EXPECT_TRUE(reject(mutants::non_zero_sum(and_additive_psm(2, 3))));
  EXPECT_TRUE(reject(mutants::biased_weighted_shift(thm1_and2())));
  // the residue-group source itself is sound
  const auto good = additive_to_full_open(mutants::residue_and_psm());
  EXPECT_TRUE(check_correctness(good.protocol, and2).passed());
  EXPECT_TRUE(check_privacy(good.protocol, and2).passed());
}

TEST(CrossValidation, TierTwoAgreesWithTierOne) {
  // small enough for both: the static-open and additive artifacts, and the xor blocks
  for (const auto& [art, f] : std::vector<std::pair<CompiledArtifact, FunctionSpec>>{
           {fig4_and2(), and2},
           {psm_to_static_open(to_general(and_additive_psm(2, 3))), and2},
           {and_to_general(xor2, additive_and_factory()), xor2},
           {mutants::drop_complete(thm1_and2()), and2}}) {
    VerifyPolicy one, two;
    one.force_tier = 1;
    two.force_tier = 2;
    EXPECT_EQ(check_correctness(art.protocol, f, one).verdict, check_correctness(art.protocol, f, two).verdict);
    EXPECT_EQ(check_privacy(art.protocol, f, one).verdict, check_privacy(art.protocol, f, two).verdict);
  }
}

TEST(CrossValidation, CompleteRegionReconstruction) {
  // a three-card complete region after a pile shift: the canonical summary
  // reconstructs the exact raw distribution
  SingleShuffleProtocol p;
  p.n = 1;
  p.input_tables = {{SuitString::parse("chhc"), SuitString::parse("hcch")}};
  p.helper = SuitString::parse("h");
  p.shuffle = compose(pile_shift_spec(PileSpec::contiguous(0, 2, 2), 5), complete({2, 3, 4}, 5));
  p.reveal = RevealFull{};
  const auto sym = analyze(p.shuffle);
  ASSERT_EQ(sym.kind, Symmetrizer::Kind::complete);
  for (std::uint8_t b : {0, 1}) {
    const auto raw = enumerate_states(p, Bits{b});
    const auto canon = canonicalize(raw, sym, 5);
    EXPECT_EQ(reconstruct_raw(canon, sym, 5), raw);
    EXPECT_EQ(canonical_states(p, Bits{b}, support(prefix_shuffle(sym, 5)), sym), canon);
  }
}

TEST(Dispatch, OversizedWithoutTierThreeIsInconclusive) {
  VerifyPolicy policy;
  policy.max_tier = 1;
  const auto r = check_privacy(thm1_and2().protocol, and2, policy);
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
  ASSERT_FALSE(r.notes.empty());
  EXPECT_NE(r.notes.front().find("SupportTooLarge"), std::string::npos);
  EXPECT_NE(r.notes.front().find("--tier 3"), std::string::npos);
}

TEST(Dispatch, JobsDoNotChangeReports) {
  const auto art = and_to_general(xor2, additive_and_factory());
  VerifyPolicy one, four;
  four.jobs = 4;
  EXPECT_EQ(check_privacy(art.protocol, xor2, one).text(), check_privacy(art.protocol, xor2, four).text());
  EXPECT_EQ(check_correctness(art.protocol, xor2, one).text(), check_correctness(art.protocol, xor2, four).text());
}

TEST(Counts, FormulasHold) {
  const auto t1 = check_count_formulas(thm1_and2());
  EXPECT_TRUE(t1.passed()) << t1.text();
  EXPECT_EQ(t1.metrics.at("bound"), "48 <= 64 (cards <= c*2^(r+1))");
  const auto f4 = check_count_formulas(additive_to_full_open(and_additive_psm(3, 5)));
  EXPECT_TRUE(f4.passed()) << f4.text();
  const auto t3 = check_count_formulas(psm_to_adaptive(to_general(and_additive_psm(2, 3))));
  EXPECT_TRUE(t3.passed()) << t3.text();
  const auto f5 = check_count_formulas(and_to_general(builtin_function("maj", 3), additive_and_factory()));
  EXPECT_TRUE(f5.passed()) << f5.text();
}

TEST(Counts, CorruptedProvenanceFails) {
  auto art = thm1_and2();
  art.provenance.predicted_cards = 47;
  EXPECT_EQ(check_count_formulas(art).verdict, Verdict::fail);
  auto art2 = fig4_and2();
  art2.provenance.predicted_tally = "PSh×3";
  EXPECT_EQ(check_count_formulas(art2).verdict, Verdict::fail);
}

TEST(Statistical, TvEstimateEdges) {
  const std::vector<std::string> a(1000, "x");
  const std::vector<std::string> b(1000, "y");
  EXPECT_EQ(tv_distance_estimate(a, a), 0);
  EXPECT_EQ(tv_distance_estimate(a, b), 1);
  try {
    tv_distance_estimate({"x"}, {"x"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::too_few_samples);
  }
}

TEST(Statistical, TwoSeedsOfFullOpenArtifactAgree) {
  const auto p = thm1_and2().protocol;
  VerifyPolicy s1, s2;
  s1.seed = 1;
  s2.seed = 2;
  const auto a = detail::sample_runs(p, and2, 3, s1);
  const auto b = detail::sample_runs(p, and2, 3, s2);
  EXPECT_LT(tv_distance_estimate(a.keys, b.keys).convert_to<double>(), 0.01);
  EXPECT_TRUE(a.wrong.empty());
}

TEST(Statistical, TierThreeIsFlaggedAndSeeded) {
  VerifyPolicy policy;
  policy.force_tier = 3;
  policy.samples = 50'000;
  policy.jobs = 4;
  const auto p = thm1_and2().protocol;
  const auto r = check_privacy(p, and2, policy);
  EXPECT_TRUE(r.passed()) << r.text();
  EXPECT_TRUE(r.statistical);
  EXPECT_EQ(r.text(), check_privacy(p, and2, policy).text());
}
