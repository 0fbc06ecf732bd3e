#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sofic {

/// A permutation of {0, ..., degree-1}, stored as its image table.
class Permutation {
public:
  Permutation() = default;
  explicit Permutation(std::vector<std::uint32_t> image);

  static Permutation identity(std::size_t degree);

  std::size_t degree() const { return image_.size(); }
  std::uint32_t operator()(std::uint32_t point) const { return image_[point]; }
  const std::vector<std::uint32_t> &image() const { return image_; }

  bool is_identity() const;
  Permutation inverse() const;

  /// Cycle decomposition, each cycle starting at its smallest point, cycles
  /// ordered by that point. Fixed points appear as 1-cycles.
  std::vector<std::vector<std::uint32_t>> cycles() const;

  /// (-1)^(number of even-length cycles).
  int sign() const;

  std::string to_string() const;

  friend auto operator<=>(const Permutation &, const Permutation &) = default;
  friend bool operator==(const Permutation &, const Permutation &) = default;

private:
  std::vector<std::uint32_t> image_;
};

/// (outer o inner)(i) = outer(inner(i)).
Permutation compose(const Permutation &outer, const Permutation &inner);

struct PermutationHash {
  std::size_t operator()(const Permutation &p) const noexcept;
};

} // namespace sofic
