#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace cardpsm {

using Position = std::uint32_t;

/// Dense bijection on 0..degree-1. image(i) is where the card at position i
/// ends up when the permutation is applied to a sequence.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<Position> image) : image_(std::move(image)) {
    std::vector<bool> seen(image_.size(), false);
    for (Position p : image_) {
      if (p >= image_.size() || seen[p]) {
        throw Error(ErrorCode::invalid_argument, "permutation image is not a bijection");
      }
      seen[p] = true;
    }
  }

  static Permutation identity(std::size_t degree) {
    std::vector<Position> image(degree);
    std::iota(image.begin(), image.end(), Position{0});
    Permutation p;
    p.image_ = std::move(image);
    return p;
  }

  std::size_t degree() const noexcept { return image_.size(); }
  Position operator()(Position i) const { return image_.at(i); }
  std::span<const Position> image() const noexcept { return image_; }

  bool is_identity() const {
    for (Position i = 0; i < image_.size(); ++i) {
      if (image_[i] != i) return false;
    }
    return true;
  }

  Permutation inverse() const {
    Permutation p;
    p.image_.resize(image_.size());
    for (Position i = 0; i < image_.size(); ++i) p.image_[image_[i]] = i;
    return p;
  }

  /// Positions not fixed by this permutation.
  std::vector<Position> moved() const {
    std::vector<Position> out;
    for (Position i = 0; i < image_.size(); ++i) {
      if (image_[i] != i) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation& a, const Permutation& b) {
    return a.image_ <=> b.image_;
  }

 private:
  std::vector<Position> image_;
};

/// `first` applied, then `second`: the product second * first.
inline Permutation then(const Permutation& first, const Permutation& second) {
  if (first.degree() != second.degree()) {
    throw Error(ErrorCode::degree_mismatch, "composing permutations of degree " +
                                                std::to_string(first.degree()) + " and " +
                                                std::to_string(second.degree()));
  }
  std::vector<Position> image(first.degree());
  for (Position i = 0; i < image.size(); ++i) image[i] = second(first(i));
  return Permutation(std::move(image));
}

/// Rearrangement that moves the card at `sources[j]` to position j.
inline Permutation gather(std::span<const Position> sources) {
  std::vector<Position> image(sources.size());
  for (Position j = 0; j < sources.size(); ++j) {
    if (sources[j] >= sources.size()) {
      throw Error(ErrorCode::invalid_argument, "gather source out of range");
    }
    image[sources[j]] = j;
  }
  return Permutation(std::move(image));
}

}  // namespace cardpsm
