#pragma once

// Text file format: JSON with sorted keys and two-space indent, so that
// parse -> serialize reproduces our own output byte for byte.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "protocol.hpp"
#include "psm.hpp"
#include "shuffle.hpp"
#include "transform.hpp"

namespace cardpsm {

using Json = nlohmann::json;

inline constexpr int format_version = 1;

struct ProtocolFile {
  std::variant<PsmProtocol, AdditivePsm, SingleShuffleProtocol, CompiledArtifact> body;

  std::string kind() const {
    switch (body.index()) {
      case 0:
      case 1: return "psm";
      case 2: return "protocol";
      default: return "artifact";
    }
  }
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::parse_error, "at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

/// Checks the object has exactly the required keys plus any optional ones.
inline void expect_keys(const Json& j, const std::string& path, std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) schema_error(path, "expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!j.contains(k)) schema_error(path, std::string("missing field '") + k + "'");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) schema_error(path, "unknown field '" + k + "'");
  }
}

template <typename T>
T get(const Json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    schema_error(path + "/" + key, "wrong type");
  }
}

inline const Json& at(const Json& j, const char* key) { return j.at(key); }

inline Json positions_json(const std::vector<Position>& ps) { return Json(ps); }

inline std::vector<Position> positions_from(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of positions");
  std::vector<Position> out;
  for (const auto& v : j) {
    if (!v.is_number_unsigned()) schema_error(path, "positions must be non-negative integers");
    out.push_back(v.get<Position>());
  }
  return out;
}

inline Json piles_json(const PileSpec& spec) { return Json(spec.piles); }

inline PileSpec piles_from(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of piles");
  PileSpec spec;
  for (std::size_t k = 0; k < j.size(); ++k) spec.piles.push_back(positions_from(j[k], path + "/" + std::to_string(k)));
  return spec;
}

inline Bits bits_from(const Json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a bit string");
  try {
    return parse_bits(j.get<std::string>());
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

inline Rational rational_from(const Json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a \"num/den\" string");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

inline SuitString suits_from(const Json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a suit string");
  try {
    return SuitString::parse(j.get<std::string>());
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

template <typename Fn>
auto guarded(const std::string& path, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) throw;
    schema_error(path, e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Decoders and PSMs

inline Json to_json(const Decoder& dec) {
  return std::visit(
      [](const auto& d) -> Json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DecodeTable>) {
          Json entries = Json::object();
          for (const auto& [k, v] : d.entries) entries[k] = v;
          return {{"kind", "table"}, {"entries", entries}};
        } else if constexpr (std::is_same_v<T, DecodeModularSum>) {
          return {{"kind", "modular_sum"}, {"m", d.m}, {"width", d.width}, {"on_sum", bits_to_string(d.on_sum)}};
        } else if constexpr (std::is_same_v<T, DecodeUniqueZero>) {
          return {{"kind", "unique_zero"}, {"m", d.m}, {"width", d.width}, {"blocks", d.blocks}};
        } else {
          return {{"kind", "constant"}, {"value", d.value}};
        }
      },
      dec);
}

inline Decoder decoder_from(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) detail::schema_error(path, "decoder needs a 'kind'");
  const auto kind = detail::get<std::string>(j, "kind", path);
  if (kind == "table") {
    detail::expect_keys(j, path, {"kind", "entries"});
    DecodeTable t;
    if (!j["entries"].is_object()) detail::schema_error(path + "/entries", "expected an object");
    for (const auto& [k, v] : j["entries"].items()) {
      if (!v.is_number_unsigned() || v.get<int>() > 1) detail::schema_error(path + "/entries/" + k, "expected a bit");
      t.entries[k] = v.get<std::uint8_t>();
    }
    return t;
  }
  if (kind == "modular_sum") {
    detail::expect_keys(j, path, {"kind", "m", "width", "on_sum"});
    return DecodeModularSum{detail::get<std::uint32_t>(j, "m", path), detail::get<std::size_t>(j, "width", path),
                            detail::bits_from(j["on_sum"], path + "/on_sum")};
  }
  if (kind == "unique_zero") {
    detail::expect_keys(j, path, {"kind", "m", "width", "blocks"});
    return DecodeUniqueZero{detail::get<std::uint32_t>(j, "m", path), detail::get<std::size_t>(j, "width", path),
                            detail::get<std::size_t>(j, "blocks", path)};
  }
  if (kind == "constant") {
    detail::expect_keys(j, path, {"kind", "value"});
    return DecodeConstant{detail::get<std::uint8_t>(j, "value", path)};
  }
  detail::schema_error(path, "unknown decoder kind '" + kind + "'");
}

inline Json to_json(const PsmProtocol& p) {
  Json rows = Json::array();
  for (const auto& r : p.randomness) rows.push_back({{"label", r.label}, {"probability", to_string(r.probability)}});
  Json enc = Json::array();
  for (const auto& party : p.enc) {
    Json per_bit = Json::array();
    for (const auto& by_rho : party) {
      Json msgs = Json::array();
      for (const auto& m : by_rho) msgs.push_back(bits_to_string(m));
      per_bit.push_back(std::move(msgs));
    }
    enc.push_back(std::move(per_bit));
  }
  return {{"form", "general"},       {"n", p.n},     {"randomness", rows},
          {"message_bits", p.message_bits}, {"enc", enc}, {"dec", to_json(p.dec)},
          {"randomness_bits", p.randomness_bits}};
}

inline PsmProtocol psm_from(const Json& j, const std::string& path) {
  detail::expect_keys(j, path, {"form", "n", "randomness", "message_bits", "enc", "dec", "randomness_bits"});
  PsmProtocol p;
  p.n = detail::get<std::size_t>(j, "n", path);
  if (!j["randomness"].is_array()) detail::schema_error(path + "/randomness", "expected an array");
  for (std::size_t k = 0; k < j["randomness"].size(); ++k) {
    const auto& row = j["randomness"][k];
    const auto rp = path + "/randomness/" + std::to_string(k);
    detail::expect_keys(row, rp, {"label", "probability"});
    p.randomness.push_back({detail::get<std::string>(row, "label", rp), detail::rational_from(row["probability"], rp + "/probability")});
  }
  p.message_bits = detail::get<std::vector<std::size_t>>(j, "message_bits", path);
  const auto& enc = j["enc"];
  if (!enc.is_array()) detail::schema_error(path + "/enc", "expected an array");
  for (std::size_t i = 0; i < enc.size(); ++i) {
    if (!enc[i].is_array() || enc[i].size() != 2) detail::schema_error(path + "/enc/" + std::to_string(i), "expected two bit rows");
    std::array<std::vector<Bits>, 2> party;
    for (int b = 0; b < 2; ++b) {
      const auto bp = path + "/enc/" + std::to_string(i) + "/" + std::to_string(b);
      if (!enc[i][b].is_array()) detail::schema_error(bp, "expected an array");
      for (std::size_t r = 0; r < enc[i][b].size(); ++r) party[b].push_back(detail::bits_from(enc[i][b][r], bp + "/" + std::to_string(r)));
    }
    p.enc.push_back(std::move(party));
  }
  p.dec = decoder_from(j["dec"], path + "/dec");
  p.randomness_bits = detail::get<std::size_t>(j, "randomness_bits", path);
  detail::guarded(path, [&] {
    validate(p);
    return 0;
  });
  return p;
}

inline Json to_json(const AdditivePsm& a) {
  Json g = Json::array();
  for (const auto& gi : a.g) g.push_back({gi[0], gi[1]});
  return {{"form", "additive"}, {"n", a.n}, {"m", a.m}, {"units", a.units}, {"g", g},
          {"dec_on_sum", bits_to_string(a.dec_on_sum)}};
}

inline AdditivePsm additive_from(const Json& j, const std::string& path) {
  detail::expect_keys(j, path, {"form", "n", "m", "units", "g", "dec_on_sum"});
  AdditivePsm a;
  a.n = detail::get<std::size_t>(j, "n", path);
  a.m = detail::get<std::uint32_t>(j, "m", path);
  a.units = detail::get<std::vector<std::uint32_t>>(j, "units", path);
  const auto g = detail::get<std::vector<std::vector<std::uint32_t>>>(j, "g", path);
  for (const auto& gi : g) {
    if (gi.size() != 2) detail::schema_error(path + "/g", "each g entry needs two values");
    a.g.push_back({gi[0], gi[1]});
  }
  a.dec_on_sum = detail::bits_from(j["dec_on_sum"], path + "/dec_on_sum");
  detail::guarded(path, [&] {
    validate(a);
    return 0;
  });
  return a;
}

// ---------------------------------------------------------------------------
// Shuffles

inline Json node_json(const Shuffle& s) {
  return std::visit(
      [](const auto& node) -> Json {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Deterministic>) {
          return {{"kind", "deterministic"}, {"image", std::vector<Position>(node.perm.image().begin(), node.perm.image().end())}};
        } else if constexpr (std::is_same_v<T, RandomCut>) {
          return {{"kind", "random_cut"}, {"positions", node.positions}};
        } else if constexpr (std::is_same_v<T, PileShift>) {
          return {{"kind", "pile_shift"}, {"piles", detail::piles_json(node.piles)}};
        } else if constexpr (std::is_same_v<T, WeightedShift>) {
          Json w = Json::array();
          for (const auto& x : node.weights) w.push_back(to_string(x));
          return {{"kind", "weighted_shift"}, {"piles", detail::piles_json(node.piles)}, {"weights", w}};
        } else if constexpr (std::is_same_v<T, PileScramble>) {
          return {{"kind", "pile_scramble"}, {"piles", detail::piles_json(node.piles)}};
        } else if constexpr (std::is_same_v<T, Complete>) {
          return {{"kind", "complete"}, {"region", node.region}};
        } else {
          Json parts = Json::array();
          for (const auto& part : node.parts) parts.push_back(node_json(part));
          return {{"kind", "compose"}, {"parts", parts}};
        }
      },
      s.node());
}

inline Json to_json(const Shuffle& s) { return {{"degree", s.degree()}, {"tree", node_json(s)}}; }

inline Shuffle node_from(const Json& j, std::size_t degree, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) detail::schema_error(path, "shuffle node needs a 'kind'");
  const auto kind = detail::get<std::string>(j, "kind", path);
  return detail::guarded(path, [&]() -> Shuffle {
    if (kind == "deterministic") {
      detail::expect_keys(j, path, {"kind", "image"});
      auto image = detail::positions_from(j["image"], path + "/image");
      if (image.size() != degree) detail::schema_error(path, "image size differs from the degree");
      return deterministic(Permutation(std::move(image)));
    }
    if (kind == "random_cut") {
      detail::expect_keys(j, path, {"kind", "positions"});
      return random_cut(detail::positions_from(j["positions"], path + "/positions"), degree);
    }
    if (kind == "pile_shift") {
      detail::expect_keys(j, path, {"kind", "piles"});
      return pile_shift_spec(detail::piles_from(j["piles"], path + "/piles"), degree);
    }
    if (kind == "weighted_shift") {
      detail::expect_keys(j, path, {"kind", "piles", "weights"});
      std::vector<Rational> w;
      if (!j["weights"].is_array()) detail::schema_error(path + "/weights", "expected an array");
      for (std::size_t k = 0; k < j["weights"].size(); ++k) {
        w.push_back(detail::rational_from(j["weights"][k], path + "/weights/" + std::to_string(k)));
      }
      return weighted_shift_spec(detail::piles_from(j["piles"], path + "/piles"), std::move(w), degree);
    }
    if (kind == "pile_scramble") {
      detail::expect_keys(j, path, {"kind", "piles"});
      return pile_scramble(detail::piles_from(j["piles"], path + "/piles"), degree);
    }
    if (kind == "complete") {
      detail::expect_keys(j, path, {"kind", "region"});
      return complete(detail::positions_from(j["region"], path + "/region"), degree);
    }
    if (kind == "compose") {
      detail::expect_keys(j, path, {"kind", "parts"});
      if (!j["parts"].is_array() || j["parts"].empty()) detail::schema_error(path + "/parts", "expected a non-empty array");
      std::vector<Shuffle> parts;
      for (std::size_t k = 0; k < j["parts"].size(); ++k) {
        parts.push_back(node_from(j["parts"][k], degree, path + "/parts/" + std::to_string(k)));
      }
      // keep the stored nesting: build the node directly instead of flattening
      return Shuffle(degree, Compose{std::move(parts)});
    }
    detail::schema_error(path, "unknown shuffle kind '" + kind + "'");
  });
}

inline Shuffle shuffle_from(const Json& j, const std::string& path) {
  detail::expect_keys(j, path, {"degree", "tree"});
  return node_from(j["tree"], detail::get<std::size_t>(j, "degree", path), path + "/tree");
}

// ---------------------------------------------------------------------------
// Protocols

inline Json to_json(const RevealPlan& plan) {
  return std::visit(
      [](const auto& r) -> Json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, RevealFull>) {
          return "full";
        } else if constexpr (std::is_same_v<T, RevealStatic>) {
          return {{"static", r.positions}};
        } else {
          return {{"adaptive", DelimiterScan::name}, {"pile_size", r.strategy.pile_size}, {"run", r.strategy.run}};
        }
      },
      plan);
}

inline RevealPlan reveal_from(const Json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "full") return RevealFull{};
    detail::schema_error(path, "unknown reveal plan '" + j.get<std::string>() + "'");
  }
  if (j.is_object() && j.contains("static")) {
    detail::expect_keys(j, path, {"static"});
    return RevealStatic{detail::positions_from(j["static"], path + "/static")};
  }
  if (j.is_object() && j.contains("adaptive")) {
    detail::expect_keys(j, path, {"adaptive", "pile_size", "run"});
    const auto name = detail::get<std::string>(j, "adaptive", path);
    if (name != DelimiterScan::name) detail::schema_error(path, "unknown adaptive strategy '" + name + "'");
    return RevealAdaptive{DelimiterScan{detail::get<std::size_t>(j, "pile_size", path), detail::get<std::size_t>(j, "run", path)}};
  }
  detail::schema_error(path, "expected \"full\", {\"static\":[...]} or {\"adaptive\":...}");
}

inline Json to_json(const OutputMap& map) {
  return std::visit(
      [](const auto& rule) -> Json {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, PsmDecode>) {
          Json source;
          if (const auto* f = std::get_if<FixedPositions>(&rule.source)) {
            source = {{"fixed", f->positions}};
          } else {
            const auto& s = std::get<SelectedPile>(rule.source);
            source = {{"selected_pile", {{"pile_size", s.pile_size}, {"run", s.run}}}};
          }
          return {{"kind", "psm_decode"}, {"source", source}, {"dec", to_json(rule.dec)}};
        } else if constexpr (std::is_same_v<T, AdditiveDecode>) {
          return {{"kind", "additive"}, {"m", rule.m}, {"n", rule.n}, {"dec_on_sum", bits_to_string(rule.dec_on_sum)}};
        } else if constexpr (std::is_same_v<T, BlockUnique>) {
          return {{"kind", "block_unique"}, {"blocks", rule.blocks}, {"block_size", rule.block_size}, {"inner", to_json(*rule.inner)}};
        } else if constexpr (std::is_same_v<T, OutputTable>) {
          Json entries = Json::object();
          for (const auto& [k, v] : rule.entries) entries[k] = v;
          return {{"kind", "table"}, {"entries", entries}};
        } else {
          return {{"kind", "constant"}, {"value", rule.value}};
        }
      },
      map.rule);
}

inline OutputMap output_from(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) detail::schema_error(path, "output map needs a 'kind'");
  const auto kind = detail::get<std::string>(j, "kind", path);
  if (kind == "psm_decode") {
    detail::expect_keys(j, path, {"kind", "source", "dec"});
    const auto& src = j["source"];
    PsmDecode d;
    if (src.is_object() && src.contains("fixed")) {
      detail::expect_keys(src, path + "/source", {"fixed"});
      d.source = FixedPositions{detail::positions_from(src["fixed"], path + "/source/fixed")};
    } else if (src.is_object() && src.contains("selected_pile")) {
      detail::expect_keys(src, path + "/source", {"selected_pile"});
      const auto& s = src["selected_pile"];
      detail::expect_keys(s, path + "/source/selected_pile", {"pile_size", "run"});
      d.source = SelectedPile{detail::get<std::size_t>(s, "pile_size", path), detail::get<std::size_t>(s, "run", path)};
    } else {
      detail::schema_error(path + "/source", "expected 'fixed' or 'selected_pile'");
    }
    d.dec = decoder_from(j["dec"], path + "/dec");
    return OutputMap{std::move(d)};
  }
  if (kind == "additive") {
    detail::expect_keys(j, path, {"kind", "m", "n", "dec_on_sum"});
    return OutputMap{AdditiveDecode{detail::get<std::uint32_t>(j, "m", path), detail::get<std::size_t>(j, "n", path),
                                    detail::bits_from(j["dec_on_sum"], path + "/dec_on_sum")}};
  }
  if (kind == "block_unique") {
    detail::expect_keys(j, path, {"kind", "blocks", "block_size", "inner"});
    return OutputMap{BlockUnique{detail::get<std::size_t>(j, "blocks", path), detail::get<std::size_t>(j, "block_size", path),
                                 std::make_shared<const OutputMap>(output_from(j["inner"], path + "/inner"))}};
  }
  if (kind == "table") {
    detail::expect_keys(j, path, {"kind", "entries"});
    OutputTable t;
    if (!j["entries"].is_object()) detail::schema_error(path + "/entries", "expected an object");
    for (const auto& [k, v] : j["entries"].items()) t.entries[k] = v.get<std::uint8_t>();
    return OutputMap{std::move(t)};
  }
  if (kind == "constant") {
    detail::expect_keys(j, path, {"kind", "value"});
    return OutputMap{OutputConstant{detail::get<std::uint8_t>(j, "value", path)}};
  }
  detail::schema_error(path, "unknown output kind '" + kind + "'");
}

inline Json to_json(const SingleShuffleProtocol& p) {
  Json tables = Json::array();
  for (const auto& t : p.input_tables) tables.push_back({t[0].str(), t[1].str()});
  return {{"n", p.n},
          {"input_tables", tables},
          {"helper", p.helper.str()},
          {"shuffle", to_json(p.shuffle)},
          {"reveal", to_json(p.reveal)},
          {"output", to_json(p.output)}};
}

inline SingleShuffleProtocol protocol_from(const Json& j, const std::string& path) {
  detail::expect_keys(j, path, {"n", "input_tables", "helper", "shuffle", "reveal", "output"});
  SingleShuffleProtocol p;
  p.n = detail::get<std::size_t>(j, "n", path);
  const auto& tables = j["input_tables"];
  if (!tables.is_array()) detail::schema_error(path + "/input_tables", "expected an array");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto tp = path + "/input_tables/" + std::to_string(i);
    if (!tables[i].is_array() || tables[i].size() != 2) detail::schema_error(tp, "expected two suit strings");
    p.input_tables.push_back({detail::suits_from(tables[i][0], tp + "/0"), detail::suits_from(tables[i][1], tp + "/1")});
  }
  p.helper = detail::suits_from(j["helper"], path + "/helper");
  p.shuffle = shuffle_from(j["shuffle"], path + "/shuffle");
  p.reveal = reveal_from(j["reveal"], path + "/reveal");
  p.output = output_from(j["output"], path + "/output");
  detail::guarded(path, [&] {
    validate(p);
    return 0;
  });
  return p;
}

inline Json to_json(const Provenance& prov) {
  Json layout = Json::object();
  for (const auto& [k, v] : prov.layout) layout[k] = v;
  Json cx = Json::object();
  for (const auto& [k, v] : prov.source_complexity) cx[k] = v;
  return {{"route", prov.route},
          {"source_kind", prov.source_kind},
          {"source_hash", prov.source_hash},
          {"function", prov.function},
          {"function_table", prov.function_table},
          {"layout", layout},
          {"predicted_cards", prov.predicted_cards},
          {"predicted_tally", prov.predicted_tally},
          {"source_complexity", cx}};
}

inline Provenance provenance_from(const Json& j, const std::string& path) {
  detail::expect_keys(j, path,
                      {"route", "source_kind", "source_hash", "function", "function_table", "layout", "predicted_cards",
                       "predicted_tally", "source_complexity"});
  Provenance prov;
  prov.route = detail::get<std::string>(j, "route", path);
  prov.source_kind = detail::get<std::string>(j, "source_kind", path);
  prov.source_hash = detail::get<std::string>(j, "source_hash", path);
  prov.function = detail::get<std::string>(j, "function", path);
  prov.function_table = detail::get<std::string>(j, "function_table", path);
  if (!j["layout"].is_object()) detail::schema_error(path + "/layout", "expected an object");
  for (const auto& [k, v] : j["layout"].items()) prov.layout[k] = detail::positions_from(v, path + "/layout/" + k);
  prov.predicted_cards = detail::get<std::size_t>(j, "predicted_cards", path);
  prov.predicted_tally = detail::get<std::string>(j, "predicted_tally", path);
  prov.source_complexity = detail::get<std::map<std::string, std::string>>(j, "source_complexity", path);
  return prov;
}

inline Json to_json(const CompiledArtifact& a) {
  return {{"protocol", to_json(a.protocol)}, {"provenance", to_json(a.provenance)}};
}

inline CompiledArtifact artifact_from(const Json& j, const std::string& path) {
  detail::expect_keys(j, path, {"protocol", "provenance"});
  CompiledArtifact a{protocol_from(j["protocol"], path + "/protocol"), provenance_from(j["provenance"], path + "/provenance")};
  detail::guarded(path, [&] {
    validate(a);
    return 0;
  });
  return a;
}

// ---------------------------------------------------------------------------
// Files

inline std::string serialize(const ProtocolFile& file) {
  Json body = std::visit([](const auto& b) { return to_json(b); }, file.body);
  Json doc = {{"format_version", format_version}, {"kind", file.kind()}, {"body", std::move(body)}};
  return doc.dump(2) + "\n";
}

namespace detail {

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline ProtocolFile parse_protocol_file(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is one past the offending character
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorCode::parse_error, "line " + std::to_string(line) + ", column " + std::to_string(col) +
                                            ": malformed JSON");
  }
  detail::expect_keys(doc, "", {"format_version", "kind", "body"});
  if (detail::get<int>(doc, "format_version", "") != format_version) {
    detail::schema_error("/format_version", "unsupported version");
  }
  const auto kind = detail::get<std::string>(doc, "kind", "");
  const auto& body = doc["body"];
  ProtocolFile file;
  if (kind == "psm") {
    if (!body.is_object() || !body.contains("form")) detail::schema_error("/body", "PSM body needs a 'form'");
    const auto form = detail::get<std::string>(body, "form", "/body");
    if (form == "general") file.body = psm_from(body, "/body");
    else if (form == "additive") file.body = additive_from(body, "/body");
    else detail::schema_error("/body/form", "unknown PSM form '" + form + "'");
  } else if (kind == "protocol") {
    file.body = protocol_from(body, "/body");
  } else if (kind == "artifact") {
    file.body = artifact_from(body, "/body");
  } else {
    detail::schema_error("/kind", "unknown kind '" + kind + "'");
  }
  return file;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::invalid_argument, "cannot write '" + path + "'");
  out << text;
}

inline ProtocolFile load_file(const std::string& path) { return parse_protocol_file(read_text(path)); }

inline void save_file(const std::string& path, const ProtocolFile& file) { write_text(path, serialize(file)); }

}  // namespace cardpsm
