#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sofic/cayley.hpp"
#include "sofic/group.hpp"
#include "sofic/labeled_graph.hpp"

namespace sofic {

/// A finite labeled graph modelling the r-balls of a group at every vertex of
/// a good set V0. anchor(i) is psi_{v_i, r}: B_r(v_i) -> B_r^G as a witness
/// whose b-side indexes group_ball().
class SoficApprox {
public:
  /// Computes every anchor map; throws InvalidArgument if some good vertex
  /// fails the ball isomorphism at `radius`.
  SoficApprox(Group group, LabeledGraph graph, std::vector<Vertex> good, int radius,
              std::string construction);

  const Group &group() const { return group_; }
  const LabeledGraph &graph() const { return graph_; }
  const CayleyBall &group_ball() const { return *group_ball_; }
  const std::vector<Vertex> &good() const { return good_; }
  int radius() const { return radius_; }
  const std::string &construction() const { return construction_; }

  std::size_t vertex_count() const { return graph_.vertex_count(); }
  double good_ratio() const;
  double epsilon() const { return 1.0 - good_ratio(); }

  const BallIsoWitness &anchor(std::size_t index) const { return anchors_[index]; }
  std::optional<std::size_t> anchor_index(Vertex v) const;

  /// psi_{v_i}(x), or nullopt when x is outside B_r(v_i).
  std::optional<GroupElement> psi(std::size_t anchor, Vertex x) const;

  /// psi_{v_i}(x) psi_{v_i}(y)^-1. Throws if x or y is outside the domain.
  GroupElement anchored_product(std::size_t anchor, Vertex x, Vertex y) const;

  /// Same approximation with V0 enumerated in a different order.
  SoficApprox reordered(const std::vector<std::size_t> &order) const;

private:
  SoficApprox() = default;

  Group group_ = Group::free(1);
  std::shared_ptr<const CayleyBall> group_ball_;
  LabeledGraph graph_;
  std::vector<Vertex> good_;
  std::vector<BallIsoWitness> anchors_;
  std::vector<std::int32_t> anchor_of_; // vertex -> anchor index or -1
  int radius_ = 0;
  std::string construction_;
};

/// Checks psi_x(y) = psi_y(x)^-1 for good vertices x, y with d(x, y) < r.
/// Throws InvalidArgument when x or y is not good or they are too far apart.
bool anchor_inverse_consistency(const SoficApprox &approx, Vertex x, Vertex y);

/// Every shortest label path from `from` to `to`, as label sequences in
/// walking order; at most `limit` paths are returned.
std::vector<std::vector<Label>> shortest_label_paths(const LabeledGraph &graph, Vertex from,
                                                     Vertex to, std::size_t limit = 64);

/// Group element x y^-1 read off a walking-order path y -> x: s_k ... s_1.
GroupElement path_product(const Group &group, const std::vector<Label> &path);

/// Graph format followed by `good M`, one index per line, then
/// `anchors M radius R group <kind> <rank>` and per anchor a line
/// `anchor v size k` with k lines `vertex word`.
void write_sofic(std::ostream &os, const SoficApprox &approx);
/// Reads write_sofic output. Permutation target groups cannot be restored.
SoficApprox read_sofic(std::istream &is);

} // namespace sofic
