#include <gtest/gtest.h>

#include "cardpsm/mutants.hpp"
#include "cardpsm/serialize.hpp"

using namespace cardpsm;

namespace {

std::vector<ProtocolFile> samples() {
  const auto p = to_general(and_additive_psm(2, 3));
  auto non_uniform = duplicate_row(p, 1);
  return {
      {p},
      {and_additive_psm(3, 5)},
      {indicator_sum_psm(builtin_function("xor", 2), 3)},
      {reduce_communication(pad_messages(p, 10))},
      {psm_to_full_open(p)},
      {psm_to_full_open(non_uniform)},
      {psm_to_static_open(p).protocol},
      {psm_to_adaptive(p)},
      {additive_to_full_open(and_additive_psm(2, 3))},
      {and_to_general(builtin_function("maj", 3), additive_and_factory())},
      {and_to_general(make_function(2, {0, 0, 0, 0}), additive_and_factory())},
      {mutants::corrupted_coset()},
  };
}

std::string error_of(std::string_view text) {
  try {
    parse_protocol_file(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    return e.what();
  }
  ADD_FAILURE() << "parsed without error";
  return "";
}

std::string with_replaced(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(RoundTrip, ByteIdenticalForEveryKind) {
  for (const auto& file : samples()) {
    const auto text = serialize(file);
    const auto back = parse_protocol_file(text);
    EXPECT_EQ(back.kind(), file.kind());
    EXPECT_EQ(back.body.index(), file.body.index());
    EXPECT_EQ(serialize(back), text);
  }
}

TEST(RoundTrip, ValuesSurvive) {
  const auto art = psm_to_full_open(to_general(and_additive_psm(2, 3)));
  const auto back = std::get<CompiledArtifact>(parse_protocol_file(serialize({art})).body);
  EXPECT_EQ(back.protocol, art.protocol);
  EXPECT_EQ(back.provenance, art.provenance);
  const auto a = and_additive_psm(3, 5);
  EXPECT_EQ(std::get<AdditivePsm>(parse_protocol_file(serialize({a})).body), a);
}

TEST(Format, RationalsAndTags) {
  const auto text = serialize({to_general(and_additive_psm(2, 3))});
  EXPECT_NE(text.find("\"probability\": \"1/6\""), std::string::npos);
  EXPECT_NE(text.find("\"form\": \"general\""), std::string::npos);
  EXPECT_NE(text.find("\"format_version\": 1"), std::string::npos);
  const auto art = serialize({psm_to_full_open(to_general(and_additive_psm(2, 3)))});
  EXPECT_NE(art.find("\"kind\": \"pile_shift\""), std::string::npos);
  EXPECT_NE(art.find("\"kind\": \"complete\""), std::string::npos);
  EXPECT_NE(art.find("\"reveal\": \"full\""), std::string::npos);
  const auto adaptive = serialize({psm_to_adaptive(to_general(and_additive_psm(2, 3)))});
  EXPECT_NE(adaptive.find("\"adaptive\": \"delimiter_scan\""), std::string::npos);
}

TEST(Errors, MalformedJsonReportsLineAndColumn) {
  const auto msg = error_of("{\n  \"format_version\": 1,\n  \"kind\": ]\n}");
  EXPECT_NE(msg.find("line 3, column 11"), std::string::npos) << msg;
}

TEST(Errors, UnknownFieldsRejected) {
  const auto text = serialize({and_additive_psm(2, 3)});
  EXPECT_NE(error_of(with_replaced(text, "\"m\": 3", "\"m\": 3,\n    \"extra\": true")).find("unknown field 'extra'"),
            std::string::npos);
  EXPECT_NE(error_of(with_replaced(text, "\"format_version\": 1", "\"format_version\": 1, \"x\": 0")).find("unknown field"),
            std::string::npos);
}

TEST(Errors, SchemaViolations) {
  const auto text = serialize({and_additive_psm(2, 3)});
  EXPECT_NE(error_of(with_replaced(text, "\"format_version\": 1", "\"format_version\": 2")).find("version"),
            std::string::npos);
  EXPECT_NE(error_of(with_replaced(text, "\"kind\": \"psm\"", "\"kind\": \"deck\"")).find("unknown kind"),
            std::string::npos);
  EXPECT_NE(error_of(with_replaced(text, "\"m\": 3", "\"m\": 4")).find("/body"), std::string::npos);
  EXPECT_NE(error_of(with_replaced(text, "\"m\": 3,", "")).find("missing field 'm'"), std::string::npos);
}

TEST(Errors, InvalidShuffleRejected) {
  const ProtocolFile file{additive_to_full_open(and_additive_psm(2, 3))};
  auto doc = Json::parse(serialize(file));
  auto& first = doc["body"]["protocol"]["shuffle"]["tree"]["parts"][0];
  ASSERT_EQ(first["kind"], "deterministic");
  first["image"][0] = first["image"][1];  // no longer a bijection
  EXPECT_NE(error_of(doc.dump(2)).find("/body/protocol/shuffle/tree/parts/0"), std::string::npos);

  auto doc2 = Json::parse(serialize(file));
  doc2["body"]["protocol"]["shuffle"]["tree"]["parts"][1]["piles"][0].push_back(5);  // unequal piles
  EXPECT_FALSE(error_of(doc2.dump(2)).empty());

  auto doc3 = Json::parse(serialize(file));
  doc3["body"]["protocol"]["shuffle"]["tree"]["parts"][1]["kind"] = "riffle";
  EXPECT_NE(error_of(doc3.dump(2)).find("unknown shuffle kind"), std::string::npos);
}

TEST(Files, SaveAndLoad) {
  const auto path = testing::TempDir() + "cardpsm_roundtrip.json";
  const ProtocolFile file{additive_to_full_open(and_additive_psm(2, 3))};
  save_file(path, file);
  EXPECT_EQ(read_text(path), serialize(file));
  EXPECT_EQ(serialize(load_file(path)), serialize(file));
  EXPECT_THROW(load_file(path + ".missing"), Error);
}
