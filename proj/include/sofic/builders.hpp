#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sofic/cayley.hpp"
#include "sofic/group.hpp"
#include "sofic/labeled_graph.hpp"
#include "sofic/permutation.hpp"
#include "sofic/sofic_approx.hpp"

namespace sofic {

inline constexpr std::size_t kDefaultMaxOrder = 10'000'000;

// ---------------------------------------------------------------------------
// Z^d Folner boxes

/// Box {0..L-1}^d with the restricted Cayley graph of Z^d (no wraparound),
/// V0 = {x : r <= x_i <= L-1-r}. Requires L > 2r >= 0.
SoficApprox build_folner_approx(int dimension, int side, int radius);

/// 1 - (L-2r)^d / L^d
double folner_defect(int dimension, int side, int radius);

// ---------------------------------------------------------------------------
// Permutation constructions for the free group

enum class FreePermVariant { Plain, Tilde };

/// Points of B_n (or of a Lambda set): vertex i of `ball` is point i.
/// p_x(w) = xw if xw in B_n; otherwise the letterwise inverse w_1^-1...w_m^-1
/// (Plain), or w itself unless w_1 = x (Tilde).
Permutation free_perm(const Group &free_group, const CayleyBall &ball, Label x,
                      FreePermVariant variant);

/// A finite connected set of reduced words containing the empty word.
class LambdaSet {
public:
  /// Throws InvalidArgument if the identity is missing, a word repeats or
  /// the set is not connected in the Cayley graph of F_s.
  LambdaSet(const Group &free_group, std::vector<GroupElement> words);
  /// Comma separated words, e.g. "e,a,b,A,B,ab,ba".
  static LambdaSet parse(const Group &free_group, std::string_view text);
  /// The ball B_n as a Lambda set (points in Cayley-ball order).
  static LambdaSet ball(const Group &free_group, int n);

  const std::vector<GroupElement> &words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  std::optional<std::size_t> index(const GroupElement &w) const;
  bool contains(const GroupElement &w) const { return index(w).has_value(); }
  std::string to_string(const Group &free_group) const;

private:
  std::vector<GroupElement> words_;
  std::unordered_map<GroupElement, std::size_t, GroupElementHash> index_;
};

/// l_{x,L}(w) = max{ j >= 0 : x^-j w in L }.
int lambda_backtrack(const Group &free_group, const LambdaSet &lambda, Label x,
                     const GroupElement &w);

/// p(w) = xw if xw in L, else x^{-l(w)} w.
Permutation free_perm_lambda(const Group &free_group, const LambdaSet &lambda, Label x);

// ---------------------------------------------------------------------------
// Finite permutation groups and their Cayley graphs

/// The group generated by one permutation per label, enumerated by BFS.
/// Cayley-graph convention matches cayley_ball: (h, x) -> p_x o h.
struct PermGroupApprox {
  std::vector<Permutation> generators; ///< per label
  std::vector<Label> inverse;          ///< label -> inverse label
  std::vector<Permutation> elements;   ///< vertex -> element, 0 = identity
  LabeledGraph graph;

  std::size_t order() const { return elements.size(); }
};

/// Requires generators[inverse[x]] = generators[x]^-1 for every label.
/// Throws ResourceLimit when more than `cap` elements are found.
PermGroupApprox generate_perm_group(std::vector<Permutation> generators, std::vector<Label> inverse,
                                    std::size_t cap = kDefaultMaxOrder);

/// Permutations p_x for every label x of F_s on B_n, in label order.
std::vector<Permutation> free_perm_generators(const Group &free_group, int n,
                                              FreePermVariant variant);
std::vector<Permutation> free_perm_lambda_generators(const Group &free_group,
                                                     const LambdaSet &lambda);
std::vector<Label> standard_inverse(int generator_count);

/// Largest radius at which the ball around vertex `v` matches B_r^G
/// (searched up to `max_radius`); -1 if even radius 0 fails.
int local_sofic_radius(const Group &group, const LabeledGraph &graph, Vertex v, int max_radius);

/// Cayley graph of a finite quotient as an approximation of `target`, with
/// V0 = V. Without an explicit radius the largest radius valid at every
/// vertex is used.
SoficApprox build_quotient_approx(const Group &target, const PermGroupApprox &quotient,
                                  std::optional<int> radius, std::string construction);

/// Z^d / (L Z)^d: shifts by the unit vectors acting on the L^d points.
PermGroupApprox torus_group(int dimension, int side);

// ---------------------------------------------------------------------------
// Verification

struct SoficReport {
  std::vector<Vertex> anchors;
  std::vector<bool> s1_pass;   ///< (S1) at the approximation radius
  double s2_ratio = 0.0;       ///< |V0| / |V|
  double epsilon = 0.0;
  int girth = kInfiniteGirth;
  int r_star = -1;             ///< largest radius valid at every good vertex
  std::size_t vertex_count = 0;
  int radius = 0;
  double girth_log_ratio = 0.0; ///< girth / ln |V|, 0 for forests

  bool all_pass() const;
};

/// r_star is searched up to `max_radius` (default: radius + 8).
SoficReport verify_sofic(const SoficApprox &approx, const Group &group,
                         std::optional<int> max_radius = std::nullopt);
SoficReport verify_sofic(const SoficApprox &approx);

} // namespace sofic
