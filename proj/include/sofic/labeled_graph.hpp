#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sofic/group.hpp"

namespace sofic {

using Vertex = std::int32_t;
inline constexpr Vertex kNoVertex = -1;
inline constexpr int kInfiniteGirth = -1;

/// Finite vertex set with S-labeled directed edges, at most one out-edge per
/// (vertex, label). Every edge (v, x) -> w has its reverse (w, x^-1) -> v.
class LabeledGraph {
public:
  LabeledGraph() = default;
  /// `inverse[x]` is the inverse label of x; it must be an involution.
  LabeledGraph(std::size_t vertex_count, std::vector<Label> inverse);

  std::size_t vertex_count() const { return vertex_count_; }
  int label_count() const { return static_cast<int>(inverse_.size()); }
  Label inverse_label(Label x) const { return inverse_[static_cast<std::size_t>(x)]; }
  const std::vector<Label> &inverse_table() const { return inverse_; }

  Vertex target(Vertex v, Label x) const {
    return adjacency_[static_cast<std::size_t>(v) * inverse_.size() + static_cast<std::size_t>(x)];
  }

  /// Adds (v, x) -> w together with its reverse. Throws if either slot is
  /// already taken by a different edge.
  void add_edge(Vertex v, Label x, Vertex w);

  std::optional<Vertex> root() const { return root_; }
  void set_root(Vertex v);

  std::size_t edge_count() const; ///< number of directed (half-)edges

  /// True iff every edge has its matching reverse edge.
  bool is_label_consistent() const;

  /// Follows the labels of `word` from `start`, applying word[0] first.
  /// Returns kNoVertex if an edge is missing.
  Vertex walk(Vertex start, std::span<const Label> word) const;

  /// Undirected BFS distances from `source`, -1 for unreachable or beyond
  /// `max_distance` (when non-negative).
  std::vector<int> distances(Vertex source, int max_distance = -1) const;

  /// Vertices at distance <= radius from `center`, in BFS order (label order
  /// within each layer).
  std::vector<Vertex> ball(Vertex center, int radius) const;

  /// Connected-component id of every vertex, ids assigned in vertex order.
  std::vector<int> component_ids() const;

  friend bool operator==(const LabeledGraph &, const LabeledGraph &) = default;

private:
  std::size_t vertex_count_ = 0;
  std::vector<Label> inverse_;
  std::vector<Vertex> adjacency_;
  std::optional<Vertex> root_;
};

/// Length of the shortest cycle, kInfiniteGirth for forests. Immediate
/// backtracking along the same edge is not a cycle, distinct parallel edges
/// are.
int girth(const LabeledGraph &graph);

/// Line format: `vertices N labels K`, optional `root R`, an `inverse ...`
/// line when the label pairing is not x <-> x+K/2, then `src label dst` per
/// directed edge in (src, label) order.
void write_graph(std::ostream &os, const LabeledGraph &graph);
LabeledGraph read_graph(std::istream &is);

/// Parses a graph starting at lines[pos]; stops at the first line that is not
/// an edge and leaves `pos` there. Used by formats that embed a graph.
LabeledGraph parse_graph_lines(const std::vector<std::string> &lines, std::size_t &pos);
std::vector<std::string> read_lines(std::istream &is);

} // namespace sofic
