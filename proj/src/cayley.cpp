#include "sofic/cayley.hpp"

#include <deque>

#include "sofic/errors.hpp"

namespace sofic {

std::optional<Vertex> CayleyBall::find(const GroupElement &g) const {
  auto it = index.find(g);
  if (it == index.end())
    return std::nullopt;
  return it->second;
}

CayleyBall cayley_ball(const Group &group, int radius, std::size_t max_vertices) {
  if (radius < 0)
    throw InvalidArgument("ball radius must be >= 0");
  CayleyBall ball;
  ball.radius = radius;
  std::vector<int> depth;
  auto add = [&](GroupElement g, int d) {
    if (ball.elements.size() >= max_vertices)
      throw ResourceLimit("Cayley ball of radius " + std::to_string(radius) + " in " +
                          group.describe() + " exceeds " + std::to_string(max_vertices) +
                          " vertices");
    const auto v = static_cast<Vertex>(ball.elements.size());
    ball.index.emplace(g, v);
    ball.elements.push_back(std::move(g));
    depth.push_back(d);
  };
  add(group.identity(), 0);
  for (std::size_t head = 0; head < ball.elements.size(); ++head) {
    if (depth[head] >= radius)
      continue;
    for (Label x = 0; x < group.label_count(); ++x) {
      auto h = group.left_multiply(x, ball.elements[head]);
      if (!ball.index.count(h))
        add(std::move(h), depth[head] + 1);
    }
  }
  std::vector<Label> inverse(static_cast<std::size_t>(group.label_count()));
  for (Label x = 0; x < group.label_count(); ++x)
    inverse[static_cast<std::size_t>(x)] = group.inverse_label(x);
  ball.graph = LabeledGraph(ball.elements.size(), inverse);
  for (std::size_t v = 0; v < ball.elements.size(); ++v)
    for (Label x = 0; x < group.label_count(); ++x) {
      auto it = ball.index.find(group.left_multiply(x, ball.elements[v]));
      if (it != ball.index.end())
        ball.graph.add_edge(static_cast<Vertex>(v), x, it->second);
    }
  ball.graph.set_root(0);
  return ball;
}

std::size_t free_ball_size(int s, int n) {
  if (s < 1 || n < 0)
    throw InvalidArgument("free_ball_size needs s >= 1, n >= 0");
  if (s == 1)
    return static_cast<std::size_t>(2 * n + 1);
  std::size_t p = 1;
  for (int i = 0; i < n; ++i)
    p *= static_cast<std::size_t>(2 * s - 1);
  return (static_cast<std::size_t>(s) * p - 1) / static_cast<std::size_t>(s - 1);
}

BallIsoWitness::BallIsoWitness(Vertex center_a, Vertex center_b, int radius,
                               std::vector<IsoPair> pairs)
    : center_a_(center_a), center_b_(center_b), radius_(radius), pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    by_a_.emplace(pairs_[i].a, i);
    by_b_.emplace(pairs_[i].b, i);
  }
}

std::optional<Vertex> BallIsoWitness::image(Vertex a) const {
  auto it = by_a_.find(a);
  if (it == by_a_.end())
    return std::nullopt;
  return pairs_[it->second].b;
}

std::optional<Vertex> BallIsoWitness::preimage(Vertex b) const {
  auto it = by_b_.find(b);
  if (it == by_b_.end())
    return std::nullopt;
  return pairs_[it->second].a;
}

BallIsoWitness BallIsoWitness::inverse() const {
  std::vector<IsoPair> flipped;
  flipped.reserve(pairs_.size());
  for (const auto &p : pairs_)
    flipped.push_back({p.b, p.a, p.depth});
  return BallIsoWitness(center_b_, center_a_, radius_, std::move(flipped));
}

BallIsoWitness BallIsoWitness::restrict_to(int radius) const {
  if (radius > radius_)
    throw InvalidArgument("cannot extend a witness to a larger radius");
  std::vector<IsoPair> kept;
  for (const auto &p : pairs_)
    if (p.depth <= radius)
      kept.push_back(p);
  return BallIsoWitness(center_a_, center_b_, radius, std::move(kept));
}

std::unordered_map<Vertex, int> local_distances(const LabeledGraph &g, Vertex center, int radius) {
  std::unordered_map<Vertex, int> dist{{center, 0}};
  std::vector<Vertex> order{center};
  for (std::size_t head = 0; head < order.size(); ++head) {
    const auto u = order[head];
    const int du = dist.at(u);
    if (du >= radius)
      continue;
    for (Label x = 0; x < g.label_count(); ++x) {
      const auto w = g.target(u, x);
      if (w != kNoVertex && dist.emplace(w, du + 1).second)
        order.push_back(w);
    }
  }
  return dist;
}

std::optional<BallIsoWitness> labeled_ball_isomorphic(const LabeledGraph &a, Vertex va,
                                                      const LabeledGraph &b, Vertex vb,
                                                      int radius) {
  if (radius < 0)
    throw InvalidArgument("radius must be >= 0");
  if (a.label_count() != b.label_count())
    return std::nullopt;
  for (Label x = 0; x < a.label_count(); ++x)
    if (a.inverse_label(x) != b.inverse_label(x))
      return std::nullopt;
  const auto dist_a = local_distances(a, va, radius);
  const auto dist_b = local_distances(b, vb, radius);
  if (dist_a.size() != dist_b.size())
    return std::nullopt;

  std::unordered_map<Vertex, Vertex> fwd{{va, vb}};
  std::unordered_map<Vertex, Vertex> bwd{{vb, va}};
  std::vector<IsoPair> pairs{{va, vb, 0}};
  for (std::size_t head = 0; head < pairs.size(); ++head) {
    const auto [u, ub, du] = pairs[head];
    for (Label x = 0; x < a.label_count(); ++x) {
      const auto wa = a.target(u, x);
      const auto wb = b.target(ub, x);
      const auto ia = wa == kNoVertex ? dist_a.end() : dist_a.find(wa);
      const auto ib = wb == kNoVertex ? dist_b.end() : dist_b.find(wb);
      const bool in_a = ia != dist_a.end();
      const bool in_b = ib != dist_b.end();
      if (in_a != in_b)
        return std::nullopt;
      if (!in_a)
        continue;
      if (ia->second != ib->second)
        return std::nullopt;
      auto fa = fwd.find(wa);
      auto fb = bwd.find(wb);
      if (fa != fwd.end() || fb != bwd.end()) {
        if (fa == fwd.end() || fb == bwd.end() || fa->second != wb)
          return std::nullopt;
        continue;
      }
      fwd.emplace(wa, wb);
      bwd.emplace(wb, wa);
      pairs.push_back({wa, wb, ia->second});
    }
  }
  if (pairs.size() != dist_a.size())
    return std::nullopt;
  BallIsoWitness witness(va, vb, radius, std::move(pairs));
  if (!verify_witness(a, b, witness))
    return std::nullopt;
  return witness;
}

bool verify_witness(const LabeledGraph &a, const LabeledGraph &b, const BallIsoWitness &w) {
  const auto dist_a = local_distances(a, w.center_a(), w.radius());
  const auto dist_b = local_distances(b, w.center_b(), w.radius());
  if (dist_a.size() != w.size() || dist_b.size() != w.size())
    return false;
  if (w.image(w.center_a()) != w.center_b())
    return false;
  for (const auto &p : w.pairs()) {
    auto ia = dist_a.find(p.a);
    auto ib = dist_b.find(p.b);
    if (ia == dist_a.end() || ib == dist_b.end() || ia->second != p.depth || ib->second != p.depth)
      return false;
    if (w.preimage(p.b) != p.a)
      return false;
    for (Label x = 0; x < a.label_count(); ++x) {
      const auto ta = a.target(p.a, x);
      const auto tb = b.target(p.b, x);
      const bool in_a = ta != kNoVertex && dist_a.count(ta);
      const bool in_b = tb != kNoVertex && dist_b.count(tb);
      if (in_a != in_b)
        return false;
      if (in_a && w.image(ta) != tb)
        return false;
    }
  }
  return true;
}

} // namespace sofic
