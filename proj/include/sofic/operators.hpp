#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sofic/group.hpp"
#include "sofic/sofic_approx.hpp"

namespace sofic {

inline constexpr std::size_t kDenseCap = 8192;

// ---------------------------------------------------------------------------
// Distributions

class Distribution {
public:
  enum class Family { Constant, Bernoulli, Uniform, Gaussian };

  static Distribution constant(double c);
  static Distribution bernoulli(double p);
  static Distribution uniform(double lo, double hi);
  static Distribution gaussian(double mean, double variance);
  /// "constant(c)", "bernoulli(p)", "uniform(lo,hi)", "gaussian(mean,variance)".
  static Distribution parse(std::string_view text);

  Family family() const { return family_; }
  double first() const { return a_; }
  double second() const { return b_; }

  double sample(std::mt19937_64 &rng) const;
  double mean() const;
  double variance() const;
  /// Essential supremum of |X|; infinite for non-degenerate Gaussians.
  double sup_abs() const;
  bool is_degenerate() const { return variance() == 0.0; }
  /// Value of a degenerate law.
  double atom() const;
  std::string to_string() const;

  friend bool operator==(const Distribution &, const Distribution &) = default;

private:
  Distribution(Family f, double a, double b) : family_(f), a_(a), b_(b) {}
  Family family_;
  double a_;
  double b_;
};

// ---------------------------------------------------------------------------
// Dense symmetric matrices

/// Stores the lower triangle only, so the matrix is symmetric by construction.
class SymmetricMatrix {
public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[offset(i, j)]; }
  void set(std::size_t i, std::size_t j, double v) { data_[offset(i, j)] = v; }
  void add(std::size_t i, std::size_t j, double v) { data_[offset(i, j)] += v; }

  double row_sum(std::size_t i) const;
  double frobenius_norm() const;
  double trace() const;
  bool is_finite() const;
  SymmetricMatrix negated() const;
  const std::vector<double> &packed() const { return data_; }

  friend bool operator==(const SymmetricMatrix &, const SymmetricMatrix &) = default;

private:
  static std::size_t tri(std::size_t i, std::size_t j) { return i * (i + 1) / 2 + j; }
  std::size_t offset(std::size_t i, std::size_t j) const { return i >= j ? tri(i, j) : tri(j, i); }

  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// `symmetric n`, then row i lists entries (i,0)..(i,i) with 17 significant
/// digits.
void write_matrix(std::ostream &os, const SymmetricMatrix &m);
SymmetricMatrix read_matrix(std::istream &is);

/// Dense matrix of a labeled graph: entry (v, target(v, x)) += 1 per label.
SymmetricMatrix graph_adjacency(const LabeledGraph &g);

// ---------------------------------------------------------------------------
// Translation-invariant kernels

/// Finite-support kernel a(g) with a(g) = a(g^-1).
class KernelSpec {
public:
  /// Entries listing only g are completed with g^-1; listing both with
  /// different values, or the same element twice, is an error.
  static KernelSpec from_entries(const Group &group, std::vector<std::pair<GroupElement, double>> entries);
  /// a(s) = 1 for s in S.
  static KernelSpec adjacency(const Group &group);
  /// a(id) = -|S|, a(s) = 1 (diagonal-negative convention).
  static KernelSpec laplacian(const Group &group);
  static KernelSpec identity(const Group &group, double c);

  const std::vector<std::pair<GroupElement, double>> &entries() const { return entries_; }
  double value(const GroupElement &g) const;
  /// Largest word length in the support (0 for an empty kernel).
  int radius() const { return radius_; }

private:
  std::vector<std::pair<GroupElement, double>> entries_; // sorted by element
  int radius_ = 0;
};

/// Which pairs (x, y) receive a kernel value.
enum class AnchorRule {
  Third,    ///< x, y in B_{floor(r/3)}(v) for some good v
  Half,     ///< x, y in B_{floor(r/2)}(v) for some good v
  Covering, ///< sum of a(g) over all g whose label word leads from y to x
};

std::string to_string(AnchorRule rule);
AnchorRule parse_anchor_rule(std::string_view text);

/// Radius of the anchor balls used by `rule` (unused for Covering).
int anchor_radius(AnchorRule rule, int r);

/// Finite operator A_r of a kernel. For Third/Half, every pair found in
/// several anchor balls is checked to receive the same value (NumericFailure
/// otherwise). Covering requires a graph with every label present at every
/// vertex.
SymmetricMatrix assemble_deterministic(const SoficApprox &approx, const KernelSpec &kernel,
                                       AnchorRule rule = AnchorRule::Third);

// ---------------------------------------------------------------------------
// Random Hamiltonians

class RhoSchedule {
public:
  enum class Mode { Log, FiniteRange, Fixed };

  struct Value {
    int rho = 0;
    double raw = 0.0;
    bool deviation = false; ///< raw formula was negative and got clamped
  };

  /// rho(r) = ln r / (4 ln |S|) - 1, rounded up and clamped to >= 1.
  static RhoSchedule log(int generating_set_size);
  /// rho(r) = floor(r / 3).
  static RhoSchedule finite_range();
  static RhoSchedule fixed(int rho);

  Mode mode() const { return mode_; }
  int parameter() const { return param_; }
  Value at(int r) const;
  std::string to_string() const;

private:
  RhoSchedule(Mode m, int p) : mode_(m), param_(p) {}
  Mode mode_;
  int param_;
};

/// X_{x,y} ~ edge_law(psi(x) psi(y)^-1) for x != y, X_{x} ~ diag_law, and
/// a(x,x) = X_{x} - alpha * sum_z X_{x,z}. Elements without a law are 0.
struct RandomHamiltonianSpec {
  double alpha = 0.0;
  std::vector<std::pair<GroupElement, Distribution>> edge_law;
  Distribution diag_law = Distribution::constant(0.0);
  RhoSchedule rho = RhoSchedule::finite_range();
  double tail_mass = 0.0; ///< probability mass dropped by truncation (percolation)

  /// Fills in missing inverses; rejects identity keys, duplicates and
  /// g, g^-1 listed with different laws.
  void normalize(const Group &group);
  const Distribution *law(const Group &group, const GroupElement &g) const;
  /// Longest element carrying a law (R_max).
  int truncation_radius(const Group &group) const;
};

/// Unordered pair {x, y} (x <= y) with the anchor index used for it.
struct AnchoredPair {
  Vertex x;
  Vertex y;
  std::size_t anchor;
};

/// All pairs with j_r > 0 for anchor balls of radius rho, singletons
/// included; the anchor is the largest index whose ball contains the pair.
/// Sorted by (x, y).
std::vector<AnchoredPair> anchored_pairs(const SoficApprox &approx, int rho);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// Samples one realization. Each variable draws from its own generator
/// seeded by (seed, canonical pair), so the result does not depend on the
/// enumeration of V0 or on scheduling. Requires 3 rho <= r and R_max <= rho.
SymmetricMatrix sample_random_hamiltonian(const SoficApprox &approx, const RandomHamiltonianSpec &spec,
                                          std::uint64_t seed);

/// Edge laws Bernoulli(p(g)) with alpha = 1: off-diagonal +X, diagonal -sum X.
RandomHamiltonianSpec percolation_spec(const Group &group,
                                       std::vector<std::pair<GroupElement, double>> p_profile,
                                       double alpha = 1.0);

/// p(g) = min(1, c * base^-|g|) for 1 <= |g| <= r_max; the spec's tail_mass
/// is sum over |g| > r_max (infinite when that series diverges).
RandomHamiltonianSpec geometric_percolation_spec(const Group &group, double c, double base, int r_max);

/// Number of elements of word length exactly k.
double sphere_size(const Group &group, int k);

enum class Boundedness { Bounded, Unbounded };
std::string to_string(Boundedness b);
Boundedness boundedness_heuristic(const RandomHamiltonianSpec &spec);

} // namespace sofic
