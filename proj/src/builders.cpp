#include "sofic/builders.hpp"

#include <cmath>
#include <sstream>

#include "sofic/errors.hpp"
#include "sofic/parallel.hpp"

namespace sofic {

// ---------------------------------------------------------------------------
// Folner boxes

SoficApprox build_folner_approx(int dimension, int side, int radius) {
  if (dimension < 1)
    throw InvalidArgument("dimension must be >= 1");
  if (radius < 0)
    throw InvalidArgument("radius must be >= 0");
  if (side <= 2 * radius)
    throw InvalidArgument("Folner box needs L > 2r (the good set would be empty)");
  std::size_t n = 1;
  for (int i = 0; i < dimension; ++i) {
    n *= static_cast<std::size_t>(side);
    if (n > kDefaultMaxVertices)
      throw ResourceLimit("Folner box exceeds " + std::to_string(kDefaultMaxVertices) + " vertices");
  }
  const auto group = Group::abelian(dimension);
  LabeledGraph graph(n, standard_inverse(dimension));
  std::vector<Vertex> good;
  std::vector<int> coord(static_cast<std::size_t>(dimension));
  for (std::size_t v = 0; v < n; ++v) {
    auto rest = v;
    std::size_t stride = 1;
    bool interior = true;
    for (int i = 0; i < dimension; ++i) {
      coord[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(side));
      rest /= static_cast<std::size_t>(side);
      const int c = coord[static_cast<std::size_t>(i)];
      if (c + 1 < side)
        graph.add_edge(static_cast<Vertex>(v), i, static_cast<Vertex>(v + stride));
      if (c < radius || c > side - 1 - radius)
        interior = false;
      stride *= static_cast<std::size_t>(side);
    }
    if (interior)
      good.push_back(static_cast<Vertex>(v));
  }
  graph.set_root(good.front());
  std::ostringstream name;
  name << "folner d=" << dimension << " L=" << side << " r=" << radius;
  return SoficApprox(group, std::move(graph), std::move(good), radius, name.str());
}

double folner_defect(int dimension, int side, int radius) {
  const double inner = std::pow(static_cast<double>(side - 2 * radius), dimension);
  const double outer = std::pow(static_cast<double>(side), dimension);
  return 1.0 - inner / outer;
}

// ---------------------------------------------------------------------------
// Free-group permutations

namespace {

void require_free(const Group &g) {
  if (g.kind() != GroupKind::Free)
    throw InvalidArgument("free-group construction applied to " + g.describe());
}

GroupElement letterwise_inverse(const Group &g, const GroupElement &w) {
  GroupElement out = w;
  for (auto &l : out.data)
    l = g.inverse_label(l);
  return out;
}

} // namespace

Permutation free_perm(const Group &free_group, const CayleyBall &ball, Label x,
                      FreePermVariant variant) {
  require_free(free_group);
  if (ball.radius < 1)
    throw InvalidArgument("free_perm needs n >= 1");
  free_group.inverse_label(x);
  std::vector<std::uint32_t> image(ball.elements.size());
  for (std::size_t i = 0; i < ball.elements.size(); ++i) {
    const auto &w = ball.elements[i];
    const auto xw = free_group.left_multiply(x, w);
    GroupElement target;
    if (free_group.length(xw) <= ball.radius)
      target = xw;
    else if (variant == FreePermVariant::Tilde && (w.data.empty() || w.data.front() != x))
      target = w;
    else
      target = letterwise_inverse(free_group, w);
    image[i] = static_cast<std::uint32_t>(ball.index.at(target));
  }
  return Permutation(std::move(image));
}

LambdaSet::LambdaSet(const Group &free_group, std::vector<GroupElement> words)
    : words_(std::move(words)) {
  require_free(free_group);
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (!index_.emplace(words_[i], i).second)
      throw InvalidArgument("Lambda set lists a word twice");
  if (!index_.count(free_group.identity()))
    throw InvalidArgument("Lambda set must contain the empty word");
  std::vector<bool> seen(words_.size(), false);
  std::vector<std::size_t> stack{index_.at(free_group.identity())};
  seen[stack.back()] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (Label x = 0; x < free_group.label_count(); ++x) {
      auto it = index_.find(free_group.left_multiply(x, words_[i]));
      if (it != index_.end() && !seen[it->second]) {
        seen[it->second] = true;
        ++reached;
        stack.push_back(it->second);
      }
    }
  }
  if (reached != words_.size())
    throw InvalidArgument("Lambda set is not connected in the Cayley graph");
}

LambdaSet LambdaSet::parse(const Group &free_group, std::string_view text) {
  std::vector<GroupElement> words;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos)
      end = text.size();
    auto token = text.substr(start, end - start);
    while (!token.empty() && token.front() == ' ')
      token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ')
      token.remove_suffix(1);
    if (token.empty())
      throw InvalidArgument("empty word in Lambda list (use 'e' for the identity)");
    words.push_back(free_group.parse(token));
    start = end + 1;
  }
  return LambdaSet(free_group, std::move(words));
}

LambdaSet LambdaSet::ball(const Group &free_group, int n) {
  auto b = cayley_ball(free_group, n);
  return LambdaSet(free_group, std::move(b.elements));
}

std::optional<std::size_t> LambdaSet::index(const GroupElement &w) const {
  auto it = index_.find(w);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

std::string LambdaSet::to_string(const Group &free_group) const {
  std::string out;
  for (std::size_t i = 0; i < words_.size(); ++i)
    out += (i ? "," : "") + free_group.format(words_[i]);
  return out;
}

int lambda_backtrack(const Group &free_group, const LambdaSet &lambda, Label x,
                     const GroupElement &w) {
  const Label xi = free_group.inverse_label(x);
  int j = 0;
  auto cur = w;
  // Lambda is connected in a tree, so {j : x^-j w in Lambda} is an interval.
  while (static_cast<std::size_t>(j) <= lambda.size()) {
    auto next = free_group.left_multiply(xi, cur);
    if (!lambda.contains(next))
      break;
    cur = std::move(next);
    ++j;
  }
  return j;
}

Permutation free_perm_lambda(const Group &free_group, const LambdaSet &lambda, Label x) {
  require_free(free_group);
  const Label xi = free_group.inverse_label(x);
  std::vector<std::uint32_t> image(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const auto &w = lambda.words()[i];
    auto xw = free_group.left_multiply(x, w);
    if (auto idx = lambda.index(xw)) {
      image[i] = static_cast<std::uint32_t>(*idx);
      continue;
    }
    const int l = lambda_backtrack(free_group, lambda, x, w);
    auto target = w;
    for (int k = 0; k < l; ++k)
      target = free_group.left_multiply(xi, target);
    image[i] = static_cast<std::uint32_t>(*lambda.index(target));
  }
  return Permutation(std::move(image));
}

// ---------------------------------------------------------------------------
// Permutation groups

std::vector<Label> standard_inverse(int generator_count) {
  std::vector<Label> inverse(static_cast<std::size_t>(2 * generator_count));
  for (Label x = 0; x < 2 * generator_count; ++x)
    inverse[static_cast<std::size_t>(x)] = (x + generator_count) % (2 * generator_count);
  return inverse;
}

PermGroupApprox generate_perm_group(std::vector<Permutation> generators, std::vector<Label> inverse,
                                    std::size_t cap) {
  if (generators.empty() || generators.size() != inverse.size())
    throw InvalidArgument("need one generator and one inverse label per label");
  const auto degree = generators.front().degree();
  for (std::size_t x = 0; x < generators.size(); ++x) {
    if (generators[x].degree() != degree)
      throw InvalidArgument("generators act on sets of different size");
    const auto xi = inverse[x];
    if (xi < 0 || static_cast<std::size_t>(xi) >= generators.size() ||
        inverse[static_cast<std::size_t>(xi)] != static_cast<Label>(x))
      throw InvalidArgument("inverse label table is not an involution");
    if (!(generators[static_cast<std::size_t>(xi)] == generators[x].inverse()))
      throw InvalidArgument("generator set is not closed under inverse labels (label " +
                            std::to_string(x) + ")");
  }
  PermGroupApprox out;
  out.generators = std::move(generators);
  out.inverse = std::move(inverse);
  std::unordered_map<Permutation, Vertex, PermutationHash> index;
  out.elements.push_back(Permutation::identity(degree));
  index.emplace(out.elements.back(), 0);
  const auto k = out.generators.size();
  std::vector<Vertex> adjacency;
  for (std::size_t head = 0; head < out.elements.size(); ++head) {
    for (std::size_t x = 0; x < k; ++x) {
      auto next = compose(out.generators[x], out.elements[head]);
      auto it = index.find(next);
      Vertex target;
      if (it == index.end()) {
        if (out.elements.size() >= cap)
          throw ResourceLimit("permutation group order exceeds cap " + std::to_string(cap));
        target = static_cast<Vertex>(out.elements.size());
        index.emplace(next, target);
        out.elements.push_back(std::move(next));
      } else {
        target = it->second;
      }
      adjacency.push_back(target);
    }
  }
  out.graph = LabeledGraph(out.elements.size(), out.inverse);
  for (std::size_t v = 0; v < out.elements.size(); ++v)
    for (std::size_t x = 0; x < k; ++x)
      out.graph.add_edge(static_cast<Vertex>(v), static_cast<Label>(x), adjacency[v * k + x]);
  out.graph.set_root(0);
  return out;
}

std::vector<Permutation> free_perm_generators(const Group &free_group, int n,
                                              FreePermVariant variant) {
  require_free(free_group);
  const auto ball = cayley_ball(free_group, n);
  std::vector<Permutation> out;
  for (Label x = 0; x < free_group.label_count(); ++x)
    out.push_back(free_perm(free_group, ball, x, variant));
  return out;
}

std::vector<Permutation> free_perm_lambda_generators(const Group &free_group,
                                                     const LambdaSet &lambda) {
  std::vector<Permutation> out;
  for (Label x = 0; x < free_group.label_count(); ++x)
    out.push_back(free_perm_lambda(free_group, lambda, x));
  return out;
}

int local_sofic_radius(const Group &group, const LabeledGraph &graph, Vertex v, int max_radius) {
  int best = -1;
  for (int r = 0; r <= max_radius; ++r) {
    const auto ball = cayley_ball(group, r);
    if (!labeled_ball_isomorphic(graph, v, ball.graph, 0, r))
      break;
    best = r;
  }
  return best;
}

SoficApprox build_quotient_approx(const Group &target, const PermGroupApprox &quotient,
                                  std::optional<int> radius, std::string construction) {
  if (quotient.graph.label_count() != target.label_count())
    throw InvalidArgument("quotient generators do not match the labels of " + target.describe());
  int r;
  if (radius) {
    r = *radius;
  } else {
    r = local_sofic_radius(target, quotient.graph, 0, static_cast<int>(quotient.order()));
    if (r < 0)
      throw InvalidArgument("quotient graph does not even match the radius-0 ball of " +
                            target.describe());
  }
  std::vector<Vertex> good(quotient.order());
  for (std::size_t v = 0; v < good.size(); ++v)
    good[v] = static_cast<Vertex>(v);
  return SoficApprox(target, quotient.graph, std::move(good), r, std::move(construction));
}

PermGroupApprox torus_group(int dimension, int side) {
  if (dimension < 1 || side < 1)
    throw InvalidArgument("torus needs d >= 1 and L >= 1");
  std::size_t n = 1;
  for (int i = 0; i < dimension; ++i) {
    n *= static_cast<std::size_t>(side);
    if (n > kDefaultMaxVertices)
      throw ResourceLimit("torus exceeds " + std::to_string(kDefaultMaxVertices) + " points");
  }
  std::vector<Permutation> gens;
  std::size_t stride = 1;
  for (int i = 0; i < dimension; ++i) {
    std::vector<std::uint32_t> image(n);
    const auto L = static_cast<std::size_t>(side);
    for (std::size_t p = 0; p < n; ++p) {
      const auto c = (p / stride) % L;
      image[p] = static_cast<std::uint32_t>(p - c * stride + ((c + 1) % L) * stride);
    }
    gens.emplace_back(std::move(image));
    stride *= static_cast<std::size_t>(side);
  }
  for (int i = 0; i < dimension; ++i)
    gens.push_back(gens[static_cast<std::size_t>(i)].inverse());
  return generate_perm_group(std::move(gens), standard_inverse(dimension));
}

// ---------------------------------------------------------------------------
// Verification

bool SoficReport::all_pass() const {
  for (bool b : s1_pass)
    if (!b)
      return false;
  return true;
}

namespace {

bool all_anchors_match(const SoficApprox &approx, const Group &group, int r) {
  const auto ball = cayley_ball(group, r);
  const auto &good = approx.good();
  std::vector<char> ok(good.size(), 0);
  parallel_for(good.size(), [&](std::size_t i) {
    ok[i] = labeled_ball_isomorphic(approx.graph(), good[i], ball.graph, 0, r).has_value();
  });
  for (char c : ok)
    if (!c)
      return false;
  return true;
}

} // namespace

SoficReport verify_sofic(const SoficApprox &approx, const Group &group, std::optional<int> max_radius) {
  SoficReport report;
  report.anchors = approx.good();
  report.radius = approx.radius();
  report.vertex_count = approx.vertex_count();
  report.s2_ratio = approx.good_ratio();
  report.epsilon = approx.epsilon();

  const auto ball = cayley_ball(group, approx.radius());
  std::vector<char> ok(approx.good().size(), 0);
  parallel_for(ok.size(), [&](std::size_t i) {
    ok[i] = labeled_ball_isomorphic(approx.graph(), approx.good()[i], ball.graph, 0, approx.radius())
                .has_value();
  });
  report.s1_pass.assign(ok.begin(), ok.end());

  const int limit = max_radius.value_or(approx.radius() + 8);
  if (approx.good().empty()) {
    report.r_star = -1;
  } else if (report.all_pass()) {
    int r = approx.radius();
    while (r < limit && all_anchors_match(approx, group, r + 1))
      ++r;
    report.r_star = r;
  } else {
    int r = approx.radius() - 1;
    while (r >= 0 && !all_anchors_match(approx, group, r))
      --r;
    report.r_star = r;
  }

  report.girth = girth(approx.graph());
  if (report.girth != kInfiniteGirth && report.vertex_count > 1)
    report.girth_log_ratio = report.girth / std::log(static_cast<double>(report.vertex_count));
  return report;
}

SoficReport verify_sofic(const SoficApprox &approx) { return verify_sofic(approx, approx.group()); }

} // namespace sofic
