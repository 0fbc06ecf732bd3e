#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sofic/permutation.hpp"

namespace sofic {

/// Index of a generator in the symmetric set S. With m base generators the
/// labels 0..m-1 are the generators and m..2m-1 their formal inverses.
using Label = int;

/// Canonical representation of a group element. Free groups store the
/// reduced word, Z^d stores coordinates, permutation groups store the image
/// table. Comparison is only meaningful between elements of one group.
struct GroupElement {
  std::vector<std::int32_t> data;

  friend auto operator<=>(const GroupElement &, const GroupElement &) = default;
  friend bool operator==(const GroupElement &, const GroupElement &) = default;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement &g) const noexcept;
};

enum class GroupKind { Free, Abelian, Permutation };

/// Reduces a word over 2*generator_count labels (free-group normal form).
/// Throws InvalidArgument on labels outside [0, 2*generator_count).
std::vector<Label> reduce_word(std::span<const Label> letters, int generator_count);

std::string default_label_name(Label label, int generator_count);

/// A finitely generated group together with its symmetric generating set.
///
/// Free(s) and Z^d are infinite; Permutation groups are finite and are
/// enumerated once at construction. All methods are const and thread-safe.
class Group {
public:
  static Group free(int rank);
  static Group abelian(int dimension);
  /// `generators` holds one permutation per base generator; inverses are
  /// added as labels m..2m-1. Throws ResourceLimit above `max_order`.
  static Group permutation(std::vector<Permutation> generators,
                           std::size_t max_order = 10'000'000);

  GroupKind kind() const { return kind_; }
  /// s for F_s, d for Z^d, number of base generators for permutation groups.
  int rank() const { return rank_; }
  int label_count() const { return 2 * rank_; }
  Label inverse_label(Label label) const;
  const std::string &label_name(Label label) const;
  Label parse_label(char c) const;

  GroupElement identity() const;
  GroupElement generator(Label label) const;
  GroupElement multiply(const GroupElement &a, const GroupElement &b) const;
  GroupElement inverse(const GroupElement &a) const;
  /// generator(label) * g
  GroupElement left_multiply(Label label, const GroupElement &g) const;
  /// Product w_1 w_2 ... w_m of the generators in the word.
  GroupElement evaluate(std::span<const Label> word) const;

  bool is_identity(const GroupElement &g) const { return g == identity(); }

  /// Word-metric length |g| with respect to S.
  int length(const GroupElement &g) const;

  /// A shortest word w_1 ... w_m with evaluate(word) = g.
  std::vector<Label> word(const GroupElement &g) const;
  /// Shortest-word spelling ("e" for the identity).
  std::string format(const GroupElement &g) const;
  /// Parses a word such as "abA" or "e"; any word is accepted and evaluated.
  GroupElement parse(std::string_view word) const;

  std::string describe() const;

  /// For permutation groups: the degree of the permutations (0 otherwise).
  std::size_t degree() const { return degree_; }
  /// For permutation groups: the generating permutation of a label.
  const Permutation &permutation(Label label) const;
  /// For permutation groups: number of elements.
  std::size_t order() const;

private:
  Group() = default;

  struct FiniteTable {
    std::unordered_map<GroupElement, int, GroupElementHash> distance;
    std::unordered_map<GroupElement, std::vector<Label>, GroupElementHash> word;
  };

  GroupKind kind_ = GroupKind::Free;
  int rank_ = 0;
  std::size_t degree_ = 0;
  std::vector<std::string> names_;
  std::vector<Permutation> perms_; // all 2m labels
  std::shared_ptr<const FiniteTable> table_;
};

} // namespace sofic
