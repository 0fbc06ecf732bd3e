#include "sofic/labeled_graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "sofic/errors.hpp"

namespace sofic {

LabeledGraph::LabeledGraph(std::size_t vertex_count, std::vector<Label> inverse)
    : vertex_count_(vertex_count), inverse_(std::move(inverse)) {
  const auto k = inverse_.size();
  for (std::size_t x = 0; x < k; ++x) {
    const auto inv = inverse_[x];
    if (inv < 0 || static_cast<std::size_t>(inv) >= k ||
        inverse_[static_cast<std::size_t>(inv)] != static_cast<Label>(x))
      throw InvalidArgument("label inverse table is not an involution");
  }
  if (vertex_count_ > static_cast<std::size_t>(std::numeric_limits<Vertex>::max()))
    throw ResourceLimit("vertex count exceeds index range");
  adjacency_.assign(vertex_count_ * k, kNoVertex);
}

void LabeledGraph::add_edge(Vertex v, Label x, Vertex w) {
  if (v < 0 || w < 0 || static_cast<std::size_t>(v) >= vertex_count_ ||
      static_cast<std::size_t>(w) >= vertex_count_)
    throw InvalidArgument("edge endpoint out of range");
  if (x < 0 || x >= label_count())
    throw InvalidArgument("edge label out of range");
  const auto k = inverse_.size();
  auto &fwd = adjacency_[static_cast<std::size_t>(v) * k + static_cast<std::size_t>(x)];
  const auto xi = inverse_label(x);
  auto &bwd = adjacency_[static_cast<std::size_t>(w) * k + static_cast<std::size_t>(xi)];
  if ((fwd != kNoVertex && fwd != w) || (bwd != kNoVertex && bwd != v))
    throw InvalidArgument("conflicting edge at (vertex " + std::to_string(v) + ", label " +
                          std::to_string(x) + ")");
  fwd = w;
  bwd = v;
}

void LabeledGraph::set_root(Vertex v) {
  if (v < 0 || static_cast<std::size_t>(v) >= vertex_count_)
    throw InvalidArgument("root out of range");
  root_ = v;
}

std::size_t LabeledGraph::edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(adjacency_.begin(), adjacency_.end(), [](Vertex w) { return w != kNoVertex; }));
}

bool LabeledGraph::is_label_consistent() const {
  for (Vertex v = 0; static_cast<std::size_t>(v) < vertex_count_; ++v)
    for (Label x = 0; x < label_count(); ++x) {
      const auto w = target(v, x);
      if (w != kNoVertex && target(w, inverse_label(x)) != v)
        return false;
    }
  return true;
}

Vertex LabeledGraph::walk(Vertex start, std::span<const Label> word) const {
  Vertex v = start;
  for (Label x : word) {
    if (v == kNoVertex)
      return kNoVertex;
    v = target(v, x);
  }
  return v;
}

std::vector<int> LabeledGraph::distances(Vertex source, int max_distance) const {
  std::vector<int> dist(vertex_count_, -1);
  std::deque<Vertex> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    const int du = dist[static_cast<std::size_t>(u)];
    if (max_distance >= 0 && du >= max_distance)
      continue;
    for (Label x = 0; x < label_count(); ++x) {
      const auto w = target(u, x);
      if (w != kNoVertex && dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = du + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::vector<Vertex> LabeledGraph::ball(Vertex center, int radius) const {
  std::vector<Vertex> order{center};
  std::vector<int> depth{0};
  std::unordered_set<Vertex> seen{center};
  for (std::size_t head = 0; head < order.size(); ++head) {
    if (depth[head] >= radius)
      continue;
    const auto u = order[head];
    for (Label x = 0; x < label_count(); ++x) {
      const auto w = target(u, x);
      if (w != kNoVertex && seen.insert(w).second) {
        order.push_back(w);
        depth.push_back(depth[head] + 1);
      }
    }
  }
  return order;
}

std::vector<int> LabeledGraph::component_ids() const {
  std::vector<int> comp(vertex_count_, -1);
  int next = 0;
  for (Vertex s = 0; static_cast<std::size_t>(s) < vertex_count_; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0)
      continue;
    std::deque<Vertex> queue{s};
    comp[static_cast<std::size_t>(s)] = next;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      for (Label x = 0; x < label_count(); ++x) {
        const auto w = target(u, x);
        if (w != kNoVertex && comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = next;
          queue.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

int girth(const LabeledGraph &graph) {
  const auto n = graph.vertex_count();
  const int k = graph.label_count();
  int best = std::numeric_limits<int>::max();
  std::vector<int> dist(n, -1);
  std::vector<Label> in_label(n, -1);
  std::vector<Vertex> touched;
  std::deque<Vertex> queue;
  for (Vertex s = 0; static_cast<std::size_t>(s) < n; ++s) {
    for (auto v : touched)
      dist[static_cast<std::size_t>(v)] = -1;
    touched.clear();
    queue.clear();
    dist[static_cast<std::size_t>(s)] = 0;
    in_label[static_cast<std::size_t>(s)] = -1;
    touched.push_back(s);
    queue.push_back(s);
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      const int du = dist[static_cast<std::size_t>(u)];
      if (2 * du >= best)
        break;
      const Label back = in_label[static_cast<std::size_t>(u)] < 0
                             ? -1
                             : graph.inverse_label(in_label[static_cast<std::size_t>(u)]);
      for (Label y = 0; y < k; ++y) {
        const auto w = graph.target(u, y);
        if (w == kNoVertex || y == back)
          continue;
        auto &dw = dist[static_cast<std::size_t>(w)];
        if (dw < 0) {
          dw = du + 1;
          in_label[static_cast<std::size_t>(w)] = y;
          touched.push_back(w);
          queue.push_back(w);
        } else {
          best = std::min(best, du + dw + 1);
        }
      }
    }
  }
  return best == std::numeric_limits<int>::max() ? kInfiniteGirth : best;
}

void write_graph(std::ostream &os, const LabeledGraph &graph) {
  const int k = graph.label_count();
  os << "vertices " << graph.vertex_count() << " labels " << k << '\n';
  if (graph.root())
    os << "root " << *graph.root() << '\n';
  bool standard = k % 2 == 0;
  for (Label x = 0; x < k && standard; ++x)
    standard = graph.inverse_label(x) == (x + k / 2) % k;
  if (!standard) {
    os << "inverse";
    for (Label x = 0; x < k; ++x)
      os << ' ' << graph.inverse_label(x);
    os << '\n';
  }
  for (Vertex v = 0; static_cast<std::size_t>(v) < graph.vertex_count(); ++v)
    for (Label x = 0; x < k; ++x) {
      const auto w = graph.target(v, x);
      if (w != kNoVertex)
        os << v << ' ' << x << ' ' << w << '\n';
    }
}

LabeledGraph parse_graph_lines(const std::vector<std::string> &lines, std::size_t &pos) {
  auto fail = [](const std::string &what) { throw InvalidArgument("graph file: " + what); };
  if (pos >= lines.size())
    fail("missing header");
  std::istringstream header(lines[pos]);
  std::string w1, w2, extra;
  long long n = -1, k = -1;
  header >> w1 >> n >> w2 >> k;
  if (!header || w1 != "vertices" || w2 != "labels" || n < 0 || k < 0 || (header >> extra))
    fail("bad header '" + lines[pos] + "'");
  ++pos;
  std::vector<Label> inverse(static_cast<std::size_t>(k));
  for (Label x = 0; x < k; ++x)
    inverse[static_cast<std::size_t>(x)] = static_cast<Label>((x + k / 2) % k);
  std::optional<Vertex> root;
  if (pos < lines.size() && lines[pos].rfind("root ", 0) == 0) {
    std::istringstream ls(lines[pos].substr(5));
    long long r;
    if (!(ls >> r))
      fail("bad root line");
    root = static_cast<Vertex>(r);
    ++pos;
  }
  if (pos < lines.size() && lines[pos].rfind("inverse", 0) == 0) {
    std::istringstream ls(lines[pos].substr(7));
    for (auto &v : inverse)
      if (!(ls >> v))
        fail("short inverse line");
    ++pos;
  }
  LabeledGraph g(static_cast<std::size_t>(n), inverse);
  if (root)
    g.set_root(*root);
  for (; pos < lines.size(); ++pos) {
    const auto &l = lines[pos];
    if (l.empty() || !std::isdigit(static_cast<unsigned char>(l[0])))
      break;
    std::istringstream ls(l);
    long long v, x, w;
    if (!(ls >> v >> x >> w) || (ls >> extra))
      fail("bad edge line '" + l + "'");
    g.add_edge(static_cast<Vertex>(v), static_cast<Label>(x), static_cast<Vertex>(w));
  }
  return g;
}

std::vector<std::string> read_lines(std::istream &is) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

LabeledGraph read_graph(std::istream &is) {
  const auto lines = read_lines(is);
  std::size_t pos = 0;
  auto g = parse_graph_lines(lines, pos);
  for (; pos < lines.size(); ++pos)
    if (!lines[pos].empty())
      throw InvalidArgument("graph file: unexpected line '" + lines[pos] + "'");
  return g;
}

} // namespace sofic
