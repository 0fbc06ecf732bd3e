#include "sofic/operators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "sofic/cayley.hpp"
#include "sofic/errors.hpp"
#include "sofic/parallel.hpp"

namespace sofic {

// ---------------------------------------------------------------------------
// Distribution

Distribution Distribution::constant(double c) {
  if (!std::isfinite(c))
    throw InvalidArgument("constant law needs a finite value");
  return {Family::Constant, c, 0.0};
}

Distribution Distribution::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidArgument("Bernoulli probability must lie in [0, 1]");
  return {Family::Bernoulli, p, 0.0};
}

Distribution Distribution::uniform(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi))
    throw InvalidArgument("uniform law needs finite lo <= hi");
  return {Family::Uniform, lo, hi};
}

Distribution Distribution::gaussian(double mean, double variance) {
  if (!(std::isfinite(mean) && std::isfinite(variance) && variance >= 0.0))
    throw InvalidArgument("Gaussian law needs a finite mean and variance >= 0");
  return {Family::Gaussian, mean, variance};
}

namespace {

std::vector<double> parse_args(std::string_view body) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto end = body.find(',', start);
    if (end == std::string_view::npos)
      end = body.size();
    auto tok = body.substr(start, end - start);
    while (!tok.empty() && tok.front() == ' ')
      tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ')
      tok.remove_suffix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
      throw InvalidArgument("bad number '" + std::string(tok) + "' in distribution");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

Distribution Distribution::parse(std::string_view text) {
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.empty() || text.back() != ')')
    throw InvalidArgument("distribution must look like family(args): '" + std::string(text) + "'");
  const auto name = text.substr(0, open);
  const auto args = parse_args(text.substr(open + 1, text.size() - open - 2));
  auto want = [&](std::size_t k) {
    if (args.size() != k)
      throw InvalidArgument(std::string(name) + " takes " + std::to_string(k) + " argument(s)");
  };
  if (name == "constant") {
    want(1);
    return constant(args[0]);
  }
  if (name == "bernoulli") {
    want(1);
    return bernoulli(args[0]);
  }
  if (name == "uniform") {
    want(2);
    return uniform(args[0], args[1]);
  }
  if (name == "gaussian") {
    want(2);
    return gaussian(args[0], args[1]);
  }
  throw InvalidArgument("unknown distribution family '" + std::string(name) + "'");
}

double Distribution::sample(std::mt19937_64 &rng) const {
  switch (family_) {
  case Family::Constant:
    return a_;
  case Family::Bernoulli:
    if (a_ == 0.0 || a_ == 1.0)
      return a_;
    return std::bernoulli_distribution(a_)(rng) ? 1.0 : 0.0;
  case Family::Uniform:
    if (a_ == b_)
      return a_;
    return std::uniform_real_distribution<double>(a_, b_)(rng);
  case Family::Gaussian:
    if (b_ == 0.0)
      return a_;
    return std::normal_distribution<double>(a_, std::sqrt(b_))(rng);
  }
  return 0.0;
}

double Distribution::mean() const {
  switch (family_) {
  case Family::Constant:
  case Family::Bernoulli:
  case Family::Gaussian:
    return a_;
  case Family::Uniform:
    return 0.5 * (a_ + b_);
  }
  return 0.0;
}

double Distribution::variance() const {
  switch (family_) {
  case Family::Constant:
    return 0.0;
  case Family::Bernoulli:
    return a_ * (1.0 - a_);
  case Family::Uniform:
    return (b_ - a_) * (b_ - a_) / 12.0;
  case Family::Gaussian:
    return b_;
  }
  return 0.0;
}

double Distribution::sup_abs() const {
  switch (family_) {
  case Family::Constant:
    return std::abs(a_);
  case Family::Bernoulli:
    return a_ > 0.0 ? 1.0 : 0.0;
  case Family::Uniform:
    return std::max(std::abs(a_), std::abs(b_));
  case Family::Gaussian:
    return b_ == 0.0 ? std::abs(a_) : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double Distribution::atom() const {
  if (!is_degenerate())
    throw InvalidArgument(to_string() + " is not degenerate");
  return family_ == Family::Uniform ? a_ : mean();
}

std::string Distribution::to_string() const {
  switch (family_) {
  case Family::Constant:
    return "constant(" + fmt17(a_) + ")";
  case Family::Bernoulli:
    return "bernoulli(" + fmt17(a_) + ")";
  case Family::Uniform:
    return "uniform(" + fmt17(a_) + "," + fmt17(b_) + ")";
  case Family::Gaussian:
    return "gaussian(" + fmt17(a_) + "," + fmt17(b_) + ")";
  }
  return {};
}

// ---------------------------------------------------------------------------
// SymmetricMatrix

SymmetricMatrix::SymmetricMatrix(std::size_t n) : n_(n) {
  if (n > kDenseCap)
    throw ResourceLimit("dense matrix of size " + std::to_string(n) + " exceeds the cap " +
                        std::to_string(kDenseCap));
  data_.assign(n * (n + 1) / 2, 0.0);
}

double SymmetricMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j)
    s += (*this)(i, j);
  return s;
}

double SymmetricMatrix::frobenius_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = data_[tri(i, j)];
      s += (i == j ? 1.0 : 2.0) * v * v;
    }
  return std::sqrt(s);
}

double SymmetricMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    s += data_[tri(i, i)];
  return s;
}

bool SymmetricMatrix::is_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

SymmetricMatrix SymmetricMatrix::negated() const {
  auto out = *this;
  for (auto &v : out.data_)
    v = v == 0.0 ? 0.0 : -v;
  return out;
}

void write_matrix(std::ostream &os, const SymmetricMatrix &m) {
  os << "symmetric " << m.size() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j)
        os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

SymmetricMatrix read_matrix(std::istream &is) {
  std::string word;
  std::size_t n = 0;
  if (!(is >> word >> n) || word != "symmetric")
    throw InvalidArgument("matrix file must start with 'symmetric n'");
  SymmetricMatrix m(n);
  std::string tok;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      if (!(is >> tok))
        throw InvalidArgument("matrix file truncated at row " + std::to_string(i));
      double v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw InvalidArgument("bad matrix entry '" + tok + "'");
      m.set(i, j, v);
    }
  if (is >> tok)
    throw InvalidArgument("trailing data after matrix");
  return m;
}

SymmetricMatrix graph_adjacency(const LabeledGraph &g) {
  SymmetricMatrix m(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    for (Label x = 0; x < g.label_count(); ++x) {
      const auto w = g.target(static_cast<Vertex>(v), x);
      // Each undirected edge is seen from both ends; count it once, loops twice.
      if (w != kNoVertex && static_cast<std::size_t>(w) <= v)
        m.add(v, static_cast<std::size_t>(w), 1.0);
    }
  return m;
}

// ---------------------------------------------------------------------------
// KernelSpec

KernelSpec KernelSpec::from_entries(const Group &group,
                                    std::vector<std::pair<GroupElement, double>> entries) {
  std::map<GroupElement, double> given;
  for (auto &[g, v] : entries) {
    if (!std::isfinite(v))
      throw InvalidArgument("kernel value for " + group.format(g) + " is not finite");
    if (!given.emplace(g, v).second)
      throw InvalidArgument("kernel lists " + group.format(g) + " twice");
  }
  std::map<GroupElement, double> full = given;
  for (const auto &[g, v] : given) {
    const auto gi = group.inverse(g);
    auto it = given.find(gi);
    if (it != given.end() && it->second != v)
      throw InvalidArgument("kernel is not symmetric: a(" + group.format(g) + ") != a(" +
                            group.format(gi) + ")");
    full.emplace(gi, v);
  }
  KernelSpec k;
  for (auto &[g, v] : full) {
    if (v == 0.0)
      continue;
    k.radius_ = std::max(k.radius_, group.length(g));
    k.entries_.emplace_back(g, v);
  }
  return k;
}

KernelSpec KernelSpec::adjacency(const Group &group) {
  std::vector<std::pair<GroupElement, double>> e;
  for (Label x = 0; x < group.label_count(); ++x)
    e.emplace_back(group.generator(x), 1.0);
  return from_entries(group, std::move(e));
}

KernelSpec KernelSpec::laplacian(const Group &group) {
  std::vector<std::pair<GroupElement, double>> e;
  e.emplace_back(group.identity(), -static_cast<double>(group.label_count()));
  for (Label x = 0; x < group.label_count(); ++x)
    e.emplace_back(group.generator(x), 1.0);
  return from_entries(group, std::move(e));
}

KernelSpec KernelSpec::identity(const Group &group, double c) {
  return from_entries(group, {{group.identity(), c}});
}

double KernelSpec::value(const GroupElement &g) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), g,
                             [](const auto &e, const GroupElement &x) { return e.first < x; });
  return it != entries_.end() && it->first == g ? it->second : 0.0;
}

std::string to_string(AnchorRule rule) {
  switch (rule) {
  case AnchorRule::Third:
    return "third";
  case AnchorRule::Half:
    return "half";
  case AnchorRule::Covering:
    return "covering";
  }
  return {};
}

AnchorRule parse_anchor_rule(std::string_view text) {
  if (text == "third")
    return AnchorRule::Third;
  if (text == "half")
    return AnchorRule::Half;
  if (text == "covering")
    return AnchorRule::Covering;
  throw InvalidArgument("anchor rule must be third, half or covering (got '" + std::string(text) + "')");
}

int anchor_radius(AnchorRule rule, int r) {
  switch (rule) {
  case AnchorRule::Third:
    return r / 3;
  case AnchorRule::Half:
    return r / 2;
  case AnchorRule::Covering:
    return r;
  }
  return 0;
}

namespace {

// Vertices of B_rho(v_i) with their chart elements.
std::vector<std::pair<Vertex, const GroupElement *>> chart(const SoficApprox &approx, std::size_t i,
                                                           int rho) {
  std::vector<std::pair<Vertex, const GroupElement *>> out;
  for (const auto &p : approx.anchor(i).pairs())
    if (p.depth <= rho)
      out.emplace_back(p.a, &approx.group_ball().elements[static_cast<std::size_t>(p.b)]);
  return out;
}

SymmetricMatrix assemble_covering(const SoficApprox &approx, const KernelSpec &kernel) {
  const auto &graph = approx.graph();
  const auto &group = approx.group();
  for (std::size_t v = 0; v < graph.vertex_count(); ++v)
    for (Label x = 0; x < graph.label_count(); ++x)
      if (graph.target(static_cast<Vertex>(v), x) == kNoVertex)
        throw InvalidArgument("covering rule needs every label at every vertex");
  std::vector<std::pair<std::vector<Label>, double>> walks;
  for (const auto &[g, val] : kernel.entries()) {
    auto w = group.word(g);
    std::reverse(w.begin(), w.end()); // walking w_m first gives x = g y
    walks.emplace_back(std::move(w), val);
  }
  SymmetricMatrix m(graph.vertex_count());
  for (std::size_t y = 0; y < graph.vertex_count(); ++y)
    for (const auto &[w, val] : walks) {
      const auto x = static_cast<std::size_t>(graph.walk(static_cast<Vertex>(y), w));
      // A(x, y) sums a(g) over g with x = g y; the lower triangle suffices.
      if (x >= y)
        m.add(x, y, val);
    }
  return m;
}

} // namespace

SymmetricMatrix assemble_deterministic(const SoficApprox &approx, const KernelSpec &kernel,
                                       AnchorRule rule) {
  if (rule == AnchorRule::Covering)
    return assemble_covering(approx, kernel);
  const int rho = anchor_radius(rule, approx.radius());
  if (kernel.radius() > rho)
    throw InvalidArgument("kernel radius " + std::to_string(kernel.radius()) + " exceeds the anchor radius " +
                          std::to_string(rho) + " of the " + to_string(rule) + " rule at r = " +
                          std::to_string(approx.radius()));
  const auto n = approx.vertex_count();
  SymmetricMatrix m(n);
  std::vector<char> defined(n * (n + 1) / 2, 0);
  const auto &group = approx.group();
  for (std::size_t i = 0; i < approx.good().size(); ++i) {
    const auto pts = chart(approx, i, rho);
    for (const auto &[x, gx] : pts)
      for (const auto &[y, gy] : pts) {
        if (y > x)
          continue;
        const double val = kernel.value(group.multiply(*gx, group.inverse(*gy)));
        const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
        auto &flag = defined[ux * (ux + 1) / 2 + uy];
        if (flag && m(ux, uy) != val)
          throw NumericFailure("anchors disagree on the kernel value at (" + std::to_string(x) + ", " +
                               std::to_string(y) + ")");
        flag = 1;
        m.set(ux, uy, val);
      }
  }
  return m;
}

// ---------------------------------------------------------------------------
// RhoSchedule

RhoSchedule RhoSchedule::log(int generating_set_size) {
  if (generating_set_size < 2)
    throw InvalidArgument("log schedule needs |S| >= 2");
  return {Mode::Log, generating_set_size};
}

RhoSchedule RhoSchedule::finite_range() { return {Mode::FiniteRange, 0}; }

RhoSchedule RhoSchedule::fixed(int rho) {
  if (rho < 0)
    throw InvalidArgument("rho must be >= 0");
  return {Mode::Fixed, rho};
}

RhoSchedule::Value RhoSchedule::at(int r) const {
  Value v;
  switch (mode_) {
  case Mode::Log: {
    if (r < 1)
      throw InvalidArgument("log schedule needs r >= 1");
    v.raw = std::log(static_cast<double>(r)) / (4.0 * std::log(static_cast<double>(param_))) - 1.0;
    v.rho = std::max(1, static_cast<int>(std::ceil(v.raw - 1e-9)));
    v.deviation = v.raw < 0.0;
    break;
  }
  case Mode::FiniteRange:
    v.rho = r / 3;
    v.raw = r / 3.0;
    break;
  case Mode::Fixed:
    v.rho = param_;
    v.raw = param_;
    break;
  }
  return v;
}

std::string RhoSchedule::to_string() const {
  switch (mode_) {
  case Mode::Log:
    return "log(|S|=" + std::to_string(param_) + ")";
  case Mode::FiniteRange:
    return "finite-range";
  case Mode::Fixed:
    return "fixed(" + std::to_string(param_) + ")";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Random Hamiltonians

void RandomHamiltonianSpec::normalize(const Group &group) {
  std::map<GroupElement, Distribution> given;
  for (const auto &[g, law] : edge_law) {
    if (group.is_identity(g))
      throw InvalidArgument("edge laws must not include the identity (use diag_law)");
    if (!given.emplace(g, law).second)
      throw InvalidArgument("edge law for " + group.format(g) + " given twice");
  }
  auto full = given;
  for (const auto &[g, law] : given) {
    const auto gi = group.inverse(g);
    auto it = given.find(gi);
    if (it != given.end() && !(it->second == law))
      throw InvalidArgument("edge laws for " + group.format(g) + " and " + group.format(gi) + " differ");
    full.emplace(gi, law);
  }
  edge_law.assign(full.begin(), full.end());
}

const Distribution *RandomHamiltonianSpec::law(const Group &group, const GroupElement &g) const {
  for (const auto &[h, d] : edge_law)
    if (h == g)
      return &d;
  const auto gi = group.inverse(g);
  for (const auto &[h, d] : edge_law)
    if (h == gi)
      return &d;
  return nullptr;
}

int RandomHamiltonianSpec::truncation_radius(const Group &group) const {
  int r = 0;
  for (const auto &[g, d] : edge_law)
    r = std::max(r, group.length(g));
  return r;
}

std::vector<AnchoredPair> anchored_pairs(const SoficApprox &approx, int rho) {
  std::unordered_map<std::uint64_t, std::size_t> owner;
  const auto n = static_cast<std::uint64_t>(approx.vertex_count());
  for (std::size_t i = 0; i < approx.good().size(); ++i) {
    const auto pts = chart(approx, i, rho);
    for (const auto &[x, gx] : pts)
      for (const auto &[y, gy] : pts)
        if (x <= y)
          owner[static_cast<std::uint64_t>(x) * n + static_cast<std::uint64_t>(y)] = i;
  }
  std::vector<AnchoredPair> out;
  out.reserve(owner.size());
  for (const auto &[key, i] : owner)
    out.push_back({static_cast<Vertex>(key / n), static_cast<Vertex>(key % n), i});
  std::sort(out.begin(), out.end(), [](const AnchoredPair &a, const AnchoredPair &b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

SymmetricMatrix sample_random_hamiltonian(const SoficApprox &approx, const RandomHamiltonianSpec &spec,
                                          std::uint64_t seed) {
  const int r = approx.radius();
  const auto rv = spec.rho.at(std::max(r, 1));
  const int rho = rv.rho;
  if (3 * rho > r)
    throw InvalidArgument("rho(r) = " + std::to_string(rho) + " violates rho <= r/3 at r = " +
                          std::to_string(r));
  const auto &group = approx.group();
  const int rmax = spec.truncation_radius(group);
  if (rmax > rho)
    throw InvalidArgument("edge laws reach word length " + std::to_string(rmax) + " > rho = " +
                          std::to_string(rho));
  const auto pairs = anchored_pairs(approx, rho);
  SymmetricMatrix m(approx.vertex_count());
  std::vector<double> diag(approx.vertex_count(), 0.0);
  for (const auto &p : pairs) {
    const auto ux = static_cast<std::size_t>(p.x), uy = static_cast<std::size_t>(p.y);
    std::mt19937_64 rng(mix_seed(seed, ux, uy));
    if (p.x == p.y) {
      diag[ux] += spec.diag_law.sample(rng);
      continue;
    }
    const auto *law = spec.law(group, approx.anchored_product(p.anchor, p.x, p.y));
    if (!law)
      continue;
    const double X = law->sample(rng);
    m.set(ux, uy, X);
    diag[ux] -= spec.alpha * X;
    diag[uy] -= spec.alpha * X;
  }
  for (std::size_t x = 0; x < diag.size(); ++x)
    m.set(x, x, diag[x] == 0.0 ? 0.0 : diag[x]);
  return m;
}

double sphere_size(const Group &group, int k) {
  if (k < 0)
    return 0.0;
  if (k == 0)
    return 1.0;
  switch (group.kind()) {
  case GroupKind::Free:
    return 2.0 * group.rank() * std::pow(2.0 * group.rank() - 1.0, k - 1);
  case GroupKind::Abelian: {
    // sum_i 2^i C(d, i) C(k-1, i-1)
    const int d = group.rank();
    double total = 0.0;
    for (int i = 1; i <= std::min(d, k); ++i) {
      double c1 = 1.0, c2 = 1.0;
      for (int t = 0; t < i; ++t)
        c1 = c1 * (d - t) / (t + 1);
      for (int t = 0; t < i - 1; ++t)
        c2 = c2 * (k - 1 - t) / (t + 1);
      total += std::pow(2.0, i) * c1 * c2;
    }
    return total;
  }
  case GroupKind::Permutation: {
    const auto big = cayley_ball(group, k).elements.size();
    const auto small = cayley_ball(group, k - 1).elements.size();
    return static_cast<double>(big - small);
  }
  }
  return 0.0;
}

RandomHamiltonianSpec percolation_spec(const Group &group,
                                       std::vector<std::pair<GroupElement, double>> p_profile,
                                       double alpha) {
  RandomHamiltonianSpec spec;
  spec.alpha = alpha;
  for (auto &[g, p] : p_profile) {
    if (!(p >= 0.0 && p <= 1.0))
      throw InvalidArgument("percolation probability for " + group.format(g) + " outside [0, 1]");
    spec.edge_law.emplace_back(g, Distribution::bernoulli(p));
  }
  spec.normalize(group);
  return spec;
}

RandomHamiltonianSpec geometric_percolation_spec(const Group &group, double c, double base, int r_max) {
  if (!(c > 0.0) || !(base > 1.0) || r_max < 1)
    throw InvalidArgument("geometric profile needs c > 0, base > 1, r_max >= 1");
  auto prob = [&](int k) { return std::min(1.0, c * std::pow(base, -k)); };
  std::vector<std::pair<GroupElement, double>> profile;
  for (const auto &g : cayley_ball(group, r_max).elements)
    if (!group.is_identity(g))
      profile.emplace_back(g, prob(group.length(g)));
  auto spec = percolation_spec(group, std::move(profile));
  double tail = 0.0;
  bool converged = false;
  for (int k = r_max + 1; k <= r_max + 100000; ++k) {
    const double term = sphere_size(group, k) * prob(k);
    if (!std::isfinite(term))
      break;
    tail += term;
    if (term <= 1e-17 * tail) {
      converged = true;
      break;
    }
  }
  spec.tail_mass = converged ? tail : std::numeric_limits<double>::infinity();
  return spec;
}

std::string to_string(Boundedness b) { return b == Boundedness::Bounded ? "bounded" : "unbounded"; }

Boundedness boundedness_heuristic(const RandomHamiltonianSpec &spec) {
  if (!std::isfinite(spec.diag_law.sup_abs()))
    return Boundedness::Unbounded;
  for (const auto &[g, law] : spec.edge_law)
    if (!std::isfinite(law.sup_abs()))
      return Boundedness::Unbounded;
  return Boundedness::Bounded;
}

} // namespace sofic
