#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <vector>

#include "sofic/group.hpp"
#include "sofic/labeled_graph.hpp"

namespace sofic {

inline constexpr std::size_t kDefaultMaxVertices = 1'000'000;

/// The ball B_r of the Cayley graph of a group around the identity, as the
/// induced labeled subgraph. Edge convention: (g, x) -> x g.
struct CayleyBall {
  LabeledGraph graph;                 ///< root = 0 = identity
  std::vector<GroupElement> elements; ///< vertex -> element
  std::unordered_map<GroupElement, Vertex, GroupElementHash> index;
  int radius = 0;

  std::optional<Vertex> find(const GroupElement &g) const;
};

/// Throws ResourceLimit when the ball would exceed `max_vertices`.
CayleyBall cayley_ball(const Group &group, int radius,
                       std::size_t max_vertices = kDefaultMaxVertices);

/// Closed-form |B_n| of F_s: (s(2s-1)^n - 1)/(s-1), and 2n+1 for s = 1.
std::size_t free_ball_size(int s, int n);

/// One entry of a rooted labeled-ball isomorphism.
struct IsoPair {
  Vertex a;
  Vertex b;
  int depth;
};

/// Bijection between B_r(center_a) in graph A and B_r(center_b) in graph B
/// preserving labels and directions on the induced subgraphs.
class BallIsoWitness {
public:
  BallIsoWitness(Vertex center_a, Vertex center_b, int radius, std::vector<IsoPair> pairs);

  Vertex center_a() const { return center_a_; }
  Vertex center_b() const { return center_b_; }
  int radius() const { return radius_; }
  std::size_t size() const { return pairs_.size(); }
  /// Pairs in BFS order of graph A.
  const std::vector<IsoPair> &pairs() const { return pairs_; }

  std::optional<Vertex> image(Vertex a) const;
  std::optional<Vertex> preimage(Vertex b) const;

  BallIsoWitness inverse() const;
  BallIsoWitness restrict_to(int radius) const;

private:
  Vertex center_a_;
  Vertex center_b_;
  int radius_;
  std::vector<IsoPair> pairs_;
  std::unordered_map<Vertex, std::size_t> by_a_;
  std::unordered_map<Vertex, std::size_t> by_b_;
};

/// Parallel BFS from both roots in identical label order. Labeled graphs
/// with at most one out-edge per label admit at most one rooted isomorphism,
/// so the first mismatch decides. The returned witness has been re-checked
/// edge by edge.
std::optional<BallIsoWitness> labeled_ball_isomorphic(const LabeledGraph &a, Vertex va,
                                                      const LabeledGraph &b, Vertex vb,
                                                      int radius);

/// Independent re-check of a witness: bijectivity, depth agreement and every
/// labeled edge among ball vertices in both directions.
bool verify_witness(const LabeledGraph &a, const LabeledGraph &b, const BallIsoWitness &w);

/// Distances from `center` for vertices within `radius` (sparse BFS).
std::unordered_map<Vertex, int> local_distances(const LabeledGraph &g, Vertex center, int radius);

} // namespace sofic
