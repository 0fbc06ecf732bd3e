#include "sofic/sofic_approx.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "sofic/errors.hpp"
#include "sofic/parallel.hpp"

namespace sofic {

SoficApprox::SoficApprox(Group group, LabeledGraph graph, std::vector<Vertex> good, int radius,
                         std::string construction)
    : group_(std::move(group)), graph_(std::move(graph)), good_(std::move(good)),
      radius_(radius), construction_(std::move(construction)) {
  if (radius_ < 0)
    throw InvalidArgument("approximation radius must be >= 0");
  if (graph_.label_count() != group_.label_count())
    throw InvalidArgument("graph labels do not match the generating set of " + group_.describe());
  group_ball_ = std::make_shared<const CayleyBall>(cayley_ball(group_, radius_));
  anchor_of_.assign(graph_.vertex_count(), -1);
  for (std::size_t i = 0; i < good_.size(); ++i) {
    const auto v = good_[i];
    if (v < 0 || static_cast<std::size_t>(v) >= graph_.vertex_count())
      throw InvalidArgument("good vertex out of range");
    if (anchor_of_[static_cast<std::size_t>(v)] >= 0)
      throw InvalidArgument("good vertex listed twice");
    anchor_of_[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(i);
  }
  std::vector<std::optional<BallIsoWitness>> maps(good_.size());
  parallel_for(good_.size(), [&](std::size_t i) {
    maps[i] = labeled_ball_isomorphic(graph_, good_[i], group_ball_->graph, 0, radius_);
  });
  anchors_.reserve(good_.size());
  for (std::size_t i = 0; i < good_.size(); ++i) {
    if (!maps[i])
      throw InvalidArgument("vertex " + std::to_string(good_[i]) + " has no ball isomorphism at radius " +
                            std::to_string(radius_));
    anchors_.push_back(std::move(*maps[i]));
  }
}

double SoficApprox::good_ratio() const {
  if (graph_.vertex_count() == 0)
    return 0.0;
  return static_cast<double>(good_.size()) / static_cast<double>(graph_.vertex_count());
}

std::optional<std::size_t> SoficApprox::anchor_index(Vertex v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= anchor_of_.size() || anchor_of_[static_cast<std::size_t>(v)] < 0)
    return std::nullopt;
  return static_cast<std::size_t>(anchor_of_[static_cast<std::size_t>(v)]);
}

std::optional<GroupElement> SoficApprox::psi(std::size_t anchor, Vertex x) const {
  const auto b = anchors_.at(anchor).image(x);
  if (!b)
    return std::nullopt;
  return group_ball_->elements[static_cast<std::size_t>(*b)];
}

GroupElement SoficApprox::anchored_product(std::size_t anchor, Vertex x, Vertex y) const {
  const auto gx = psi(anchor, x);
  const auto gy = psi(anchor, y);
  if (!gx || !gy)
    throw InvalidArgument("vertex outside the anchor ball");
  return group_.multiply(*gx, group_.inverse(*gy));
}

SoficApprox SoficApprox::reordered(const std::vector<std::size_t> &order) const {
  if (order.size() != good_.size())
    throw InvalidArgument("reorder size mismatch");
  SoficApprox out;
  out.group_ = group_;
  out.group_ball_ = group_ball_;
  out.graph_ = graph_;
  out.radius_ = radius_;
  out.construction_ = construction_;
  out.anchor_of_.assign(graph_.vertex_count(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto src = order.at(i);
    if (src >= good_.size() || out.anchor_of_[static_cast<std::size_t>(good_[src])] >= 0)
      throw InvalidArgument("reorder is not a permutation");
    out.good_.push_back(good_[src]);
    out.anchors_.push_back(anchors_[src]);
    out.anchor_of_[static_cast<std::size_t>(good_[src])] = static_cast<std::int32_t>(i);
  }
  return out;
}

bool anchor_inverse_consistency(const SoficApprox &approx, Vertex x, Vertex y) {
  const auto ix = approx.anchor_index(x);
  const auto iy = approx.anchor_index(y);
  if (!ix || !iy)
    throw InvalidArgument("both vertices must be good");
  const auto dist = local_distances(approx.graph(), x, approx.radius());
  auto it = dist.find(y);
  if (it == dist.end() || it->second >= approx.radius())
    throw InvalidArgument("anchors must be at distance < r");
  const auto &g = approx.group();
  return *approx.psi(*ix, y) == g.inverse(*approx.psi(*iy, x));
}

std::vector<std::vector<Label>> shortest_label_paths(const LabeledGraph &graph, Vertex from,
                                                     Vertex to, std::size_t limit) {
  const auto dist_to = graph.distances(to);
  std::vector<std::vector<Label>> out;
  if (dist_to[static_cast<std::size_t>(from)] < 0)
    return out;
  std::vector<Label> path;
  auto rec = [&](auto &self, Vertex v) -> void {
    if (out.size() >= limit)
      return;
    if (v == to) {
      out.push_back(path);
      return;
    }
    const int dv = dist_to[static_cast<std::size_t>(v)];
    for (Label x = 0; x < graph.label_count(); ++x) {
      const auto w = graph.target(v, x);
      if (w != kNoVertex && dist_to[static_cast<std::size_t>(w)] == dv - 1) {
        path.push_back(x);
        self(self, w);
        path.pop_back();
      }
    }
  };
  rec(rec, from);
  return out;
}

GroupElement path_product(const Group &group, const std::vector<Label> &path) {
  std::vector<Label> reversed(path.rbegin(), path.rend());
  return group.evaluate(reversed);
}

namespace {

std::string group_tag(const Group &g) {
  switch (g.kind()) {
  case GroupKind::Free:
    return "free " + std::to_string(g.rank());
  case GroupKind::Abelian:
    return "abelian " + std::to_string(g.rank());
  case GroupKind::Permutation:
    return "permutation " + std::to_string(g.rank());
  }
  return {};
}

} // namespace

void write_sofic(std::ostream &os, const SoficApprox &approx) {
  write_graph(os, approx.graph());
  os << "good " << approx.good().size() << '\n';
  for (auto v : approx.good())
    os << v << '\n';
  os << "construction " << approx.construction() << '\n';
  os << "anchors " << approx.good().size() << " radius " << approx.radius() << " group "
     << group_tag(approx.group()) << '\n';
  for (std::size_t i = 0; i < approx.good().size(); ++i) {
    const auto &w = approx.anchor(i);
    os << "anchor " << approx.good()[i] << " size " << w.size() << '\n';
    for (const auto &p : w.pairs())
      os << p.a << ' ' << approx.group().format(approx.group_ball().elements[static_cast<std::size_t>(p.b)])
         << '\n';
  }
}

SoficApprox read_sofic(std::istream &is) {
  const auto lines = read_lines(is);
  std::size_t pos = 0;
  auto graph = parse_graph_lines(lines, pos);
  auto fail = [](const std::string &what) { throw InvalidArgument("approximation file: " + what); };
  auto expect = [&](const std::string &prefix) -> std::istringstream {
    if (pos >= lines.size() || lines[pos].rfind(prefix, 0) != 0)
      fail("expected '" + prefix + "' section");
    return std::istringstream(lines[pos++].substr(prefix.size()));
  };
  std::size_t m = 0;
  if (!(expect("good ") >> m))
    fail("bad good header");
  std::vector<Vertex> good;
  for (std::size_t i = 0; i < m; ++i) {
    if (pos >= lines.size())
      fail("truncated good section");
    good.push_back(static_cast<Vertex>(std::stol(lines[pos++])));
  }
  if (pos >= lines.size() || lines[pos].rfind("construction ", 0) != 0)
    fail("expected 'construction' line");
  const auto construction = lines[pos++].substr(13);
  auto header = expect("anchors ");
  std::size_t count = 0;
  int radius = 0, rank = 0;
  std::string w_radius, w_group, kind;
  if (!(header >> count >> w_radius >> radius >> w_group >> kind >> rank) || w_radius != "radius" ||
      w_group != "group" || count != m)
    fail("bad anchors header");
  if (kind != "free" && kind != "abelian")
    fail("group kind '" + kind + "' cannot be restored from file");
  auto group = kind == "free" ? Group::free(rank) : Group::abelian(rank);
  SoficApprox approx(group, std::move(graph), std::move(good), radius, construction);
  for (std::size_t i = 0; i < m; ++i) {
    auto ah = expect("anchor ");
    Vertex v;
    std::string w_size;
    std::size_t k;
    if (!(ah >> v >> w_size >> k) || w_size != "size" || v != approx.good()[i])
      fail("bad anchor header");
    if (k != approx.anchor(i).size())
      fail("anchor table size disagrees with the recomputed ball isomorphism");
    for (std::size_t j = 0; j < k; ++j) {
      if (pos >= lines.size())
        fail("truncated anchor table");
      std::istringstream ls(lines[pos++]);
      Vertex x;
      std::string word;
      if (!(ls >> x >> word))
        fail("bad anchor entry");
      const auto g = approx.psi(i, x);
      if (!g || !(*g == group.parse(word)))
        fail("anchor table disagrees with the recomputed ball isomorphism");
    }
  }
  return approx;
}

} // namespace sofic
