#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cards.hpp"
#include "error.hpp"

namespace cardpsm {

/// f: {0,1}^n -> {0,1} as 2^n output bits in lexicographic input order
/// (x_1 is the most significant bit of the index).
struct FunctionSpec {
  std::size_t n = 0;
  std::vector<std::uint8_t> table;

  std::size_t input_count() const noexcept { return std::size_t{1} << n; }
  std::uint8_t operator()(std::size_t index) const { return table.at(index); }

  std::uint8_t operator()(const Bits& x) const;

  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

inline Bits input_bits(std::size_t index, std::size_t n) {
  Bits x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (index >> (n - 1 - i)) & 1u;
  return x;
}

inline std::size_t input_index(const Bits& x) {
  std::size_t index = 0;
  for (auto b : x) index = (index << 1) | (b & 1u);
  return index;
}

inline std::uint8_t FunctionSpec::operator()(const Bits& x) const {
  if (x.size() != n) {
    throw Error(ErrorCode::arity_mismatch, "input of length " + std::to_string(x.size()) +
                                               " for a " + std::to_string(n) + "-ary function");
  }
  return table.at(input_index(x));
}

inline FunctionSpec make_function(std::size_t n, std::vector<std::uint8_t> table) {
  if (n > 20) throw Error(ErrorCode::invalid_argument, "arity above 20");
  if (table.size() != (std::size_t{1} << n)) {
    throw Error(ErrorCode::invalid_argument, "truth table needs " + std::to_string(std::size_t{1} << n) +
                                                 " entries, got " + std::to_string(table.size()));
  }
  for (auto v : table) {
    if (v > 1) throw Error(ErrorCode::invalid_argument, "truth table entries must be bits");
  }
  return FunctionSpec{n, std::move(table)};
}

/// Builtins: and, xor, eq (all inputs equal), maj (strictly more ones than zeros).
inline FunctionSpec builtin_function(std::string_view name, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "arity must be >= 1");
  std::vector<std::uint8_t> table(std::size_t{1} << n);
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    const auto ones = static_cast<std::size_t>(__builtin_popcountll(idx));
    if (name == "and") table[idx] = ones == n;
    else if (name == "xor") table[idx] = ones % 2;
    else if (name == "eq") table[idx] = ones == 0 || ones == n;
    else if (name == "maj") table[idx] = 2 * ones > n;
    else throw Error(ErrorCode::invalid_argument, "unknown builtin function '" + std::string(name) + "'");
  }
  return make_function(n, std::move(table));
}

/// Accepting inputs f^{-1}(1) in lexicographic order.
inline std::vector<Bits> accepting_inputs(const FunctionSpec& f) {
  std::vector<Bits> out;
  for (std::size_t idx = 0; idx < f.input_count(); ++idx) {
    if (f(idx)) out.push_back(input_bits(idx, f.n));
  }
  return out;
}

inline std::string table_string(const FunctionSpec& f) {
  return bits_to_string(f.table);
}

}  // namespace cardpsm
