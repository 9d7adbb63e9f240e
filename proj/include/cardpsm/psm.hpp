#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "cards.hpp"
#include "error.hpp"
#include "function.hpp"
#include "rational.hpp"
#include "report.hpp"
#include "shuffle.hpp"

namespace cardpsm {

// ---------------------------------------------------------------------------
// Modular helpers

inline bool is_prime(std::uint64_t m) {
  if (m < 2) return false;
  for (std::uint64_t d = 2; d * d <= m; ++d) {
    if (m % d == 0) return false;
  }
  return true;
}

inline std::uint32_t least_prime_above(std::uint64_t n) {
  std::uint64_t m = n + 1;
  while (!is_prime(m)) ++m;
  return static_cast<std::uint32_t>(m);
}

inline std::uint32_t mod_mul(std::uint32_t a, std::uint32_t b, std::uint32_t m) {
  return static_cast<std::uint32_t>(std::uint64_t{a} * b % m);
}

inline std::uint32_t mod_sub(std::uint32_t a, std::uint32_t b, std::uint32_t m) {
  return (a % m + m - b % m) % m;
}

/// Z_m^* as 1..m-1 (m prime).
inline std::vector<std::uint32_t> unit_group(std::uint32_t m) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 1; v < m; ++v) out.push_back(v);
  return out;
}

/// Residue v in `width` bits, most significant first.
inline Bits pack_residue(std::uint32_t v, std::size_t width) {
  Bits out(width);
  for (std::size_t i = 0; i < width; ++i) out[i] = (v >> (width - 1 - i)) & 1u;
  return out;
}

inline std::uint32_t unpack_residue(std::string_view bits) {
  std::uint32_t v = 0;
  for (char ch : bits) v = (v << 1) | static_cast<std::uint32_t>(ch == '1');
  return v;
}

// ---------------------------------------------------------------------------
// General PSM

struct RandomnessRow {
  std::string label;
  Rational probability;
  friend bool operator==(const RandomnessRow&, const RandomnessRow&) = default;
};

/// Output keyed by the concatenated message bits of all parties.
struct DecodeTable {
  std::map<std::string, std::uint8_t> entries;
  friend bool operator==(const DecodeTable&, const DecodeTable&) = default;
};

/// Every party sends one residue in `width` bits; output is on_sum[sum mod m].
struct DecodeModularSum {
  std::uint32_t m = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> on_sum;
  friend bool operator==(const DecodeModularSum&, const DecodeModularSum&) = default;
};

/// Every party sends `blocks` residues; output 1 iff exactly one block
/// position sums to 0 mod m across the parties.
struct DecodeUniqueZero {
  std::uint32_t m = 0;
  std::size_t width = 0;
  std::size_t blocks = 0;
  friend bool operator==(const DecodeUniqueZero&, const DecodeUniqueZero&) = default;
};

struct DecodeConstant {
  std::uint8_t value = 0;
  friend bool operator==(const DecodeConstant&, const DecodeConstant&) = default;
};

using Decoder = std::variant<DecodeTable, DecodeModularSum, DecodeUniqueZero, DecodeConstant>;

/// A PSM as an explicit finite object. enc[i][b][rho] is party i's message
/// on input bit b under randomness row rho.
struct PsmProtocol {
  std::size_t n = 0;
  std::vector<RandomnessRow> randomness;
  std::vector<std::size_t> message_bits;
  std::vector<std::array<std::vector<Bits>, 2>> enc;
  Decoder dec = DecodeConstant{};
  std::size_t randomness_bits = 0;

  std::size_t support_size() const noexcept { return randomness.size(); }
  std::size_t total_message_bits() const {
    return std::accumulate(message_bits.begin(), message_bits.end(), std::size_t{0});
  }

  const Bits& message(std::size_t party, std::uint8_t bit, std::size_t rho) const {
    return enc.at(party).at(bit).at(rho);
  }

  bool uniform() const {
    for (const auto& row : randomness) {
      if (row.probability != randomness.front().probability) return false;
    }
    return true;
  }

  friend bool operator==(const PsmProtocol&, const PsmProtocol&) = default;
};

struct Complexity {
  std::size_t r = 0;
  std::size_t c = 0;
  friend bool operator==(const Complexity&, const Complexity&) = default;
};

inline Complexity complexity(const PsmProtocol& p) { return {p.randomness_bits, p.total_message_bits()}; }

inline std::string message_tuple(const PsmProtocol& p, const Bits& x, std::size_t rho) {
  if (x.size() != p.n) {
    throw Error(ErrorCode::arity_mismatch, "input of length " + std::to_string(x.size()) + " for " +
                                               std::to_string(p.n) + " parties");
  }
  std::string out;
  for (std::size_t i = 0; i < p.n; ++i) out += bits_to_string(p.message(i, x[i], rho));
  return out;
}

inline std::uint8_t decode(const Decoder& dec, const std::string& tuple) {
  auto residue = [&](std::size_t chunk, std::size_t width, std::uint32_t m) {
    if ((chunk + 1) * width > tuple.size()) {
      throw Error(ErrorCode::output_undefined, "message tuple '" + tuple + "' too short");
    }
    const auto v = unpack_residue(std::string_view(tuple).substr(chunk * width, width));
    if (v >= m) throw Error(ErrorCode::output_undefined, "residue " + std::to_string(v) + " >= modulus");
    return v;
  };
  return std::visit(
      [&](const auto& d) -> std::uint8_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DecodeTable>) {
          auto it = d.entries.find(tuple);
          if (it == d.entries.end()) throw Error(ErrorCode::output_undefined, "no entry for '" + tuple + "'");
          return it->second;
        } else if constexpr (std::is_same_v<T, DecodeModularSum>) {
          if (d.width == 0 || tuple.size() % d.width != 0) {
            throw Error(ErrorCode::output_undefined, "tuple length not a multiple of the residue width");
          }
          std::uint32_t sum = 0;
          for (std::size_t k = 0; k < tuple.size() / d.width; ++k) sum = (sum + residue(k, d.width, d.m)) % d.m;
          return d.on_sum.at(sum);
        } else if constexpr (std::is_same_v<T, DecodeUniqueZero>) {
          const std::size_t per_party = d.blocks * d.width;
          if (per_party == 0 || tuple.size() % per_party != 0) {
            throw Error(ErrorCode::output_undefined, "tuple length not a multiple of the message length");
          }
          const std::size_t parties = tuple.size() / per_party;
          std::size_t zeros = 0;
          for (std::size_t h = 0; h < d.blocks; ++h) {
            std::uint32_t sum = 0;
            for (std::size_t i = 0; i < parties; ++i) sum = (sum + residue(i * d.blocks + h, d.width, d.m)) % d.m;
            zeros += (sum == 0);
          }
          return zeros == 1 ? 1 : 0;
        } else {
          return d.value;
        }
      },
      dec);
}

inline std::uint8_t evaluate(const PsmProtocol& p, const Bits& x, std::size_t rho) {
  return decode(p.dec, message_tuple(p, x, rho));
}

inline void validate(const PsmProtocol& p) {
  if (p.n == 0) throw Error(ErrorCode::invalid_argument, "PSM needs at least one party");
  if (p.randomness.empty()) throw Error(ErrorCode::invalid_argument, "empty randomness support");
  Rational total = 0;
  for (const auto& row : p.randomness) {
    if (row.probability <= 0) throw Error(ErrorCode::bad_weights, "non-positive probability for '" + row.label + "'");
    total += row.probability;
  }
  if (total != 1) throw Error(ErrorCode::bad_weights, "randomness probabilities sum to " + to_string(total));
  if (p.message_bits.size() != p.n || p.enc.size() != p.n) {
    throw Error(ErrorCode::arity_mismatch, "per-party tables do not match n");
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    for (int b = 0; b < 2; ++b) {
      if (p.enc[i][b].size() != p.randomness.size()) {
        throw Error(ErrorCode::invalid_argument, "encoding table of party " + std::to_string(i) + " is incomplete");
      }
      for (const auto& msg : p.enc[i][b]) {
        if (msg.size() != p.message_bits[i]) {
          throw Error(ErrorCode::invalid_argument, "message of party " + std::to_string(i) + " has length " +
                                                       std::to_string(msg.size()));
        }
      }
    }
  }
}

/// Exact distribution of the message tuple on input x.
inline std::map<std::string, Rational> message_distribution(const PsmProtocol& p, const Bits& x) {
  std::map<std::string, Rational> out;
  for (std::size_t rho = 0; rho < p.randomness.size(); ++rho) {
    out[message_tuple(p, x, rho)] += p.randomness[rho].probability;
  }
  return out;
}

/// Exhaustive correctness and perfect-privacy check over every (x, rho).
inline VerificationReport verify_psm(const PsmProtocol& p, const FunctionSpec& f,
                                     std::size_t cap = default_support_cap) {
  VerificationReport report;
  report.check = "psm";
  report.tier = 1;
  if (f.n != p.n) throw Error(ErrorCode::arity_mismatch, "function arity differs from party count");
  const std::size_t cases = p.randomness.size() * f.input_count();
  if (cases > cap) {
    throw Error(ErrorCode::support_too_large,
                std::to_string(cases) + " (input, randomness) cases exceed cap " + std::to_string(cap));
  }
  validate(p);

  std::size_t violations = 0;
  auto record = [&](std::string text) {
    ++violations;
    if (report.counterexamples.size() < max_listed_counterexamples) report.fail(std::move(text));
    else report.verdict = Verdict::fail;
  };

  std::vector<std::map<std::string, Rational>> dists(f.input_count());
  for (std::size_t idx = 0; idx < f.input_count(); ++idx) {
    const Bits x = input_bits(idx, f.n);
    for (std::size_t rho = 0; rho < p.randomness.size(); ++rho) {
      const auto tuple = message_tuple(p, x, rho);
      dists[idx][tuple] += p.randomness[rho].probability;
      std::string got;
      try {
        got = std::to_string(decode(p.dec, tuple));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::output_undefined) throw;
        got = "undefined";
      }
      if (got != std::to_string(f(idx))) {
        record("correctness x=" + bits_to_string(x) + " rho=" + std::to_string(rho) + " (" +
               p.randomness[rho].label + "): dec=" + got + " f=" + std::to_string(f(idx)));
      }
    }
  }

  std::size_t privacy_pairs = 0;
  for (std::uint8_t out = 0; out < 2; ++out) {
    std::size_t rep = f.input_count();
    for (std::size_t idx = 0; idx < f.input_count(); ++idx) {
      if (f(idx) != out) continue;
      if (rep == f.input_count()) {
        rep = idx;
        continue;
      }
      ++privacy_pairs;
      if (dists[idx] == dists[rep]) continue;
      // name one tuple whose probability differs
      std::string witness;
      for (const auto* d : {&dists[rep], &dists[idx]}) {
        for (const auto& [tuple, pr] : *d) {
          const auto a = dists[rep].count(tuple) ? dists[rep].at(tuple) : Rational(0);
          const auto b = dists[idx].count(tuple) ? dists[idx].at(tuple) : Rational(0);
          if (a != b) {
            witness = tuple + " has " + to_string(a) + " vs " + to_string(b);
            break;
          }
        }
        if (!witness.empty()) break;
      }
      record("privacy x=" + bits_to_string(input_bits(rep, f.n)) + " vs x'=" +
             bits_to_string(input_bits(idx, f.n)) + ": message tuple " + witness);
    }
  }

  report.metrics["cases"] = std::to_string(cases);
  report.metrics["support"] = std::to_string(p.randomness.size());
  report.metrics["privacy_comparisons"] = std::to_string(privacy_pairs);
  report.metrics["violations"] = std::to_string(violations);
  const auto cx = complexity(p);
  report.metrics["r"] = std::to_string(cx.r);
  report.metrics["c"] = std::to_string(cx.c);
  return report;
}

/// Decoder as an explicit table over every tuple reachable from some (x, rho).
inline DecodeTable tabulate_decoder(const PsmProtocol& p) {
  DecodeTable table;
  for (std::size_t idx = 0; idx < (std::size_t{1} << p.n); ++idx) {
    const Bits x = input_bits(idx, p.n);
    for (std::size_t rho = 0; rho < p.randomness.size(); ++rho) {
      const auto tuple = message_tuple(p, x, rho);
      if (!table.entries.count(tuple)) table.entries.emplace(tuple, decode(p.dec, tuple));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Additive PSM

/// Messages u*g_i(x_i) - r_i mod m with u uniform on U and zero-sum shares r.
struct AdditivePsm {
  std::size_t n = 0;
  std::uint32_t m = 0;
  std::vector<std::uint32_t> units;
  std::vector<std::array<std::uint32_t, 2>> g;
  std::vector<std::uint8_t> dec_on_sum;
  friend bool operator==(const AdditivePsm&, const AdditivePsm&) = default;
};

/// True iff `units` is a multiplicative subgroup of Z_m^* containing 1.
inline bool is_unit_subgroup(const std::vector<std::uint32_t>& units, std::uint32_t m) {
  if (units.empty()) return false;
  std::vector<bool> in(m, false);
  for (auto u : units) {
    if (u == 0 || u >= m || in[u]) return false;
    in[u] = true;
  }
  if (!in[1 % m]) return false;
  for (auto a : units) {
    for (auto b : units) {
      if (!in[mod_mul(a, b, m)]) return false;
    }
  }
  return true;
}

inline void validate(const AdditivePsm& a) {
  if (a.n == 0) throw Error(ErrorCode::invalid_argument, "additive PSM needs at least one party");
  if (!is_prime(a.m)) throw Error(ErrorCode::not_prime, std::to_string(a.m) + " is not prime");
  if (!is_unit_subgroup(a.units, a.m)) {
    throw Error(ErrorCode::bad_context, "U is not a subgroup of Z_" + std::to_string(a.m) + "^*");
  }
  if (a.g.size() != a.n) throw Error(ErrorCode::arity_mismatch, "need one g per party");
  for (const auto& gi : a.g) {
    if (gi[0] >= a.m || gi[1] >= a.m) throw Error(ErrorCode::out_of_range, "g value outside Z_m");
  }
  if (a.dec_on_sum.size() != a.m) throw Error(ErrorCode::invalid_argument, "dec_on_sum needs m entries");
  for (auto v : a.dec_on_sum) {
    if (v > 1) throw Error(ErrorCode::invalid_argument, "dec_on_sum entries must be bits");
  }
}

/// g_i(x) = 1 - x, U = Z_m^*, output 1 iff the sum is 0.
inline AdditivePsm and_additive_psm(std::size_t n, std::uint32_t m) {
  if (!is_prime(m)) throw Error(ErrorCode::not_prime, std::to_string(m) + " is not prime");
  if (m <= n) {
    throw Error(ErrorCode::modulus_too_small,
                "modulus " + std::to_string(m) + " must exceed party count " + std::to_string(n));
  }
  AdditivePsm a;
  a.n = n;
  a.m = m;
  a.units = unit_group(m);
  a.g.assign(n, {1, 0});
  a.dec_on_sum.assign(m, 0);
  a.dec_on_sum[0] = 1;
  return a;
}

inline BigInt additive_support_size(const AdditivePsm& a) {
  BigInt s = a.units.size();
  for (std::size_t i = 1; i < a.n; ++i) s *= a.m;
  return s;
}

inline std::size_t ceil_log2(const BigInt& value) {
  if (value <= 1) return 0;
  const BigInt below = value - 1;
  return boost::multiprecision::msb(below) + 1;
}

inline Complexity complexity(const AdditivePsm& a) {
  return {ceil_log2(additive_support_size(a)), a.n * ceil_log2(static_cast<std::size_t>(a.m))};
}

namespace detail {

/// Advances a little-endian-last odometer over Z_m^len; false on wrap-around.
inline bool next_tuple(std::vector<std::uint32_t>& digits, std::uint32_t m) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    if (++digits[k] < m) return true;
    digits[k] = 0;
  }
  return false;
}

inline std::string join(const std::vector<std::uint32_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

/// Zero-sum share tuples of length n in lexicographic order of the first n-1.
inline std::vector<std::vector<std::uint32_t>> zero_sum_shares(std::size_t n, std::uint32_t m) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> head(n - 1, 0);
  do {
    std::vector<std::uint32_t> r = head;
    std::uint32_t s = 0;
    for (auto v : head) s = (s + v) % m;
    r.push_back((m - s) % m);
    out.push_back(std::move(r));
  } while (!head.empty() && next_tuple(head, m));
  return out;
}

}  // namespace detail

/// Randomness rows are (u, shares) with u ascending, then shares lexicographic.
inline PsmProtocol to_general(const AdditivePsm& a, std::size_t cap = default_support_cap) {
  validate(a);
  const BigInt size = additive_support_size(a);
  if (size > cap) throw Error(ErrorCode::support_too_large, "additive support " + size.str() + " exceeds cap");
  const std::size_t width = ceil_log2(static_cast<std::size_t>(a.m));
  auto units = a.units;
  std::sort(units.begin(), units.end());
  const auto shares = detail::zero_sum_shares(a.n, a.m);
  const std::size_t R = units.size() * shares.size();

  PsmProtocol p;
  p.n = a.n;
  p.message_bits.assign(a.n, width);
  p.enc.resize(a.n);
  for (auto& e : p.enc) {
    e[0].reserve(R);
    e[1].reserve(R);
  }
  for (auto u : units) {
    for (const auto& r : shares) {
      p.randomness.push_back({"u=" + std::to_string(u) + ";r=" + detail::join(r), Rational(1, R)});
      for (std::size_t i = 0; i < a.n; ++i) {
        for (int b = 0; b < 2; ++b) {
          p.enc[i][b].push_back(pack_residue(mod_sub(mod_mul(u, a.g[i][b], a.m), r[i], a.m), width));
        }
      }
    }
  }
  p.dec = DecodeModularSum{a.m, width, a.dec_on_sum};
  p.randomness_bits = ceil_log2(R);
  return p;
}

// ---------------------------------------------------------------------------
// Indicator-sum PSM for an arbitrary f

/// One AND-style block per accepting input; blocks travel in a random order.
/// f == 0 gives a constant protocol with empty messages.
inline PsmProtocol indicator_sum_psm(const FunctionSpec& f, std::uint32_t m,
                                     std::size_t cap = 1'000'000) {
  const auto accepting = accepting_inputs(f);
  const std::size_t N = accepting.size();
  PsmProtocol p;
  p.n = f.n;
  if (N == 0) {
    p.randomness.push_back({"const", Rational(1)});
    p.message_bits.assign(f.n, 0);
    p.enc.assign(f.n, {std::vector<Bits>{Bits{}}, std::vector<Bits>{Bits{}}});
    p.dec = DecodeConstant{0};
    p.randomness_bits = 0;
    return p;
  }
  if (!is_prime(m)) throw Error(ErrorCode::not_prime, std::to_string(m) + " is not prime");
  if (m <= f.n) throw Error(ErrorCode::modulus_too_small, "modulus must exceed the arity");

  const auto units = unit_group(m);
  const auto shares = detail::zero_sum_shares(f.n, m);
  const std::size_t per_block = units.size() * shares.size();
  BigInt size = factorial(N);
  for (std::size_t j = 0; j < N; ++j) size *= per_block;
  if (size > cap) throw Error(ErrorCode::support_too_large, "indicator-sum support " + size.str() + " exceeds cap");
  const std::size_t R = static_cast<std::size_t>(size);
  const std::size_t width = ceil_log2(static_cast<std::size_t>(m));

  p.message_bits.assign(f.n, N * width);
  p.enc.resize(f.n);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  do {
    std::vector<std::uint32_t> choice(N, 0);  // per-block index into units x shares
    do {
      std::string label = "s=" + detail::join(std::vector<std::uint32_t>(order.begin(), order.end()));
      for (std::size_t j = 0; j < N; ++j) {
        const auto u = units[choice[j] / shares.size()];
        const auto& r = shares[choice[j] % shares.size()];
        label += ";u" + std::to_string(j) + "=" + std::to_string(u) + ";r" + std::to_string(j) + "=" + detail::join(r);
      }
      p.randomness.push_back({std::move(label), Rational(1, R)});
      for (std::size_t i = 0; i < f.n; ++i) {
        for (std::uint8_t b = 0; b < 2; ++b) {
          Bits msg;
          for (std::size_t h = 0; h < N; ++h) {
            const std::size_t j = order[h];
            const auto u = units[choice[j] / shares.size()];
            const auto& r = shares[choice[j] % shares.size()];
            const std::uint32_t mismatch = accepting[j][i] == b ? 0 : 1;
            const auto packed = pack_residue(mod_sub(mod_mul(u, mismatch, m), r[i], m), width);
            msg.insert(msg.end(), packed.begin(), packed.end());
          }
          p.enc[i][b].push_back(std::move(msg));
        }
      }
    } while (detail::next_tuple(choice, static_cast<std::uint32_t>(per_block)));
  } while (std::next_permutation(order.begin(), order.end()));

  p.dec = DecodeUniqueZero{m, width, N};
  p.randomness_bits = ceil_log2(R);
  return p;
}

// ---------------------------------------------------------------------------
// Complexity-reduction passes

/// Appends zero bits so every party's messages have at least `width` bits.
inline PsmProtocol pad_messages(const PsmProtocol& p, std::size_t width) {
  PsmProtocol out = p;
  for (std::size_t i = 0; i < p.n; ++i) {
    if (p.message_bits[i] >= width) continue;
    out.message_bits[i] = width;
    for (auto& row : out.enc[i]) {
      for (auto& msg : row) msg.resize(width, 0);
    }
  }
  DecodeTable table;
  for (std::size_t idx = 0; idx < (std::size_t{1} << p.n); ++idx) {
    const Bits x = input_bits(idx, p.n);
    for (std::size_t rho = 0; rho < p.randomness.size(); ++rho) {
      table.entries[message_tuple(out, x, rho)] = evaluate(p, x, rho);
    }
  }
  out.dec = std::move(table);
  return out;
}

/// Replaces each party's message by its index among that party's distinct
/// messages whenever that index (r+1 bits) is shorter than the message.
inline PsmProtocol reduce_communication(const PsmProtocol& p) {
  const std::size_t index_bits = p.randomness_bits + 1;
  bool changed = false;
  PsmProtocol out = p;
  for (std::size_t i = 0; i < p.n; ++i) {
    if (p.message_bits[i] <= index_bits) continue;
    std::vector<Bits> distinct;
    for (int b = 0; b < 2; ++b) distinct.insert(distinct.end(), p.enc[i][b].begin(), p.enc[i][b].end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() > (std::size_t{1} << index_bits)) {
      throw Error(ErrorCode::invalid_argument, "declared randomness length too small for the support");
    }
    for (int b = 0; b < 2; ++b) {
      for (auto& msg : out.enc[i][b]) {
        const auto pos = std::lower_bound(distinct.begin(), distinct.end(), msg) - distinct.begin();
        msg = pack_residue(static_cast<std::uint32_t>(pos), index_bits);
      }
    }
    out.message_bits[i] = index_bits;
    changed = true;
  }
  if (!changed) return p;
  DecodeTable table;
  for (std::size_t idx = 0; idx < (std::size_t{1} << p.n); ++idx) {
    const Bits x = input_bits(idx, p.n);
    for (std::size_t rho = 0; rho < p.randomness.size(); ++rho) {
      table.entries[message_tuple(out, x, rho)] = evaluate(p, x, rho);
    }
  }
  out.dec = std::move(table);
  return out;
}

/// Merges randomness rows that induce the same message function of x,
/// summing their probabilities. The first row of each class is kept.
inline PsmProtocol reduce_randomness(const PsmProtocol& p) {
  const std::size_t inputs = std::size_t{1} << p.n;
  std::map<std::vector<std::string>, std::size_t> first_row;
  std::vector<std::size_t> keep;
  std::vector<Rational> mass;
  for (std::size_t rho = 0; rho < p.randomness.size(); ++rho) {
    std::vector<std::string> signature;
    signature.reserve(inputs);
    for (std::size_t idx = 0; idx < inputs; ++idx) signature.push_back(message_tuple(p, input_bits(idx, p.n), rho));
    auto [it, inserted] = first_row.emplace(std::move(signature), keep.size());
    if (inserted) {
      keep.push_back(rho);
      mass.push_back(p.randomness[rho].probability);
    } else {
      mass[it->second] += p.randomness[rho].probability;
    }
  }
  if (keep.size() == p.randomness.size()) return p;
  PsmProtocol out = p;
  out.randomness.clear();
  for (std::size_t k = 0; k < keep.size(); ++k) out.randomness.push_back({p.randomness[keep[k]].label, mass[k]});
  for (std::size_t i = 0; i < p.n; ++i) {
    for (int b = 0; b < 2; ++b) {
      std::vector<Bits> rows;
      for (auto rho : keep) rows.push_back(p.enc[i][b][rho]);
      out.enc[i][b] = std::move(rows);
    }
  }
  out.randomness_bits = ceil_log2(keep.size());
  return out;
}

/// Copy of p with randomness row `rho` duplicated, the mass split evenly.
inline PsmProtocol duplicate_row(const PsmProtocol& p, std::size_t rho) {
  PsmProtocol out = p;
  const Rational half = p.randomness.at(rho).probability / 2;
  out.randomness[rho].probability = half;
  out.randomness.insert(out.randomness.begin() + static_cast<std::ptrdiff_t>(rho) + 1,
                        {p.randomness[rho].label + "'", half});
  for (std::size_t i = 0; i < p.n; ++i) {
    for (int b = 0; b < 2; ++b) {
      auto& rows = out.enc[i][b];
      rows.insert(rows.begin() + static_cast<std::ptrdiff_t>(rho) + 1, rows[rho]);
    }
  }
  out.randomness_bits = ceil_log2(out.randomness.size());
  return out;
}

}  // namespace cardpsm
