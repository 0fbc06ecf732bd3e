#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sofic/group.hpp"
#include "sofic/operators.hpp"

namespace sofic {

struct Spectrum {
  std::vector<double> values; ///< ascending
  /// max(|sum l - tr A|, |sqrt(sum l^2) - |A|_F|) / max(|A|_F, 1): a cheap
  /// consistency check of the eigensolver output.
  double backward_error = 0.0;

  std::size_t size() const { return values.size(); }
};

/// All eigenvalues of a dense symmetric matrix (Eigen's tridiagonal QR).
/// Throws NumericFailure on non-finite entries or solver failure.
Spectrum eigenvalues(const SymmetricMatrix &m);
Spectrum spectrum_from_values(std::vector<double> values);

/// Right-continuous nondecreasing step function: value(l) = values[k] for
/// jumps[k] <= l < jumps[k+1], and `base` left of the first jump.
class StepFunction {
public:
  StepFunction() = default;
  StepFunction(std::vector<double> jumps, std::vector<double> values, double base = 0.0);

  /// ECDF of a sample, each point carrying weight 1/n.
  static StepFunction ecdf(std::vector<double> points);

  const std::vector<double> &jumps() const { return jumps_; }
  const std::vector<double> &values() const { return values_; }
  double base() const { return base_; }
  std::size_t size() const { return jumps_.size(); }

  double operator()(double lambda) const;
  double left_limit(double lambda) const;
  double final_value() const { return values_.empty() ? base_ : values_.back(); }

  friend bool operator==(const StepFunction &, const StepFunction &) = default;

private:
  std::vector<double> jumps_;
  std::vector<double> values_;
  double base_ = 0.0;
};

/// N_r(l) = #{eigenvalues <= l} / n.
StepFunction counting_function(const Spectrum &spec);

/// Pointwise mean on the union of the jump sets.
StepFunction average(const std::vector<StepFunction> &fs);
/// Tabulated curve without monotonicity requirements.
struct Curve {
  std::vector<double> lambda;
  std::vector<double> value;
};

/// Pointwise sample standard deviation (M - 1 in the denominator, 0 for
/// M = 1) on the union grid.
Curve pointwise_stddev(const std::vector<StepFunction> &fs);
/// Sorted union of the jump sets.
std::vector<double> union_grid(const std::vector<StepFunction> &fs);

/// `lambda,value` header, one row per jump, 17 significant digits.
void write_csv(std::ostream &os, const StepFunction &f);
StepFunction read_csv(std::istream &is);
void write_csv(std::ostream &os, const Curve &c);

// ---------------------------------------------------------------------------
// References

/// Kesten-McKay density of the 2s-regular tree adjacency operator.
double mckay_density(double x, int s);
/// Integral of the density up to lambda, in closed form after the
/// substitution lambda = R cos(theta).
double mckay_ids(double lambda, int s);
double mckay_edge(int s);

/// Eigenvalues sum_g a(g) cos(2 pi <k, g> / L) of the kernel operator on
/// (Z/L)^d over all L^d frequencies, as an ECDF.
StepFunction torus_reference_ids(const Group &group, const KernelSpec &kernel, int side);
std::vector<double> torus_eigenvalues(const Group &group, const KernelSpec &kernel, int side);

class ReferenceIDS {
public:
  enum class Kind { McKay, Torus, Tabulated };

  static ReferenceIDS mckay(int s);
  static ReferenceIDS torus(const Group &group, const KernelSpec &kernel, int side);
  static ReferenceIDS tabulated(StepFunction f, std::string tag = "tabulated");

  Kind kind() const { return kind_; }
  const std::string &tag() const { return tag_; }
  double operator()(double lambda) const;
  double left_limit(double lambda) const;
  bool continuous() const { return kind_ == Kind::McKay; }
  /// Only for McKay.
  std::optional<double> density(double x) const;
  /// Underlying step function for Torus / Tabulated.
  const StepFunction *steps() const { return steps_.get(); }
  int rank() const { return s_; }
  /// Smallest interval containing the support.
  std::pair<double, double> support() const;

private:
  Kind kind_ = Kind::Tabulated;
  std::string tag_;
  int s_ = 0;
  std::shared_ptr<const StepFunction> steps_;
};

struct KsResult {
  double ks = 0.0;
  double lambda_star = 0.0; ///< a point where the sup is attained
};

/// Exact sup |a - b| over all one-sided limits at the jump points.
KsResult ks_distance(const StepFunction &a, const StepFunction &b);
KsResult ks_distance(const StepFunction &a, const ReferenceIDS &b);

/// (1/n) sum (z - l)^-1. Throws InvalidArgument for real z.
std::complex<double> stieltjes_trace(const Spectrum &spec, std::complex<double> z);
/// Integral of (z - x)^-1 dF(x) for a step function.
std::complex<double> stieltjes_trace(const StepFunction &f, std::complex<double> z);
/// Same for a reference; McKay by Gauss-Kronrod in the angle variable.
std::complex<double> reference_stieltjes(const ReferenceIDS &ref, std::complex<double> z);

/// Jump locations whose mass is at least `threshold`, after merging jumps
/// closer than `merge` into one atom.
std::vector<double> detect_atoms(const StepFunction &f, double threshold = 1e-3, double merge = 1e-8);

} // namespace sofic
