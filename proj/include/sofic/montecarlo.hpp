#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sofic/operators.hpp"
#include "sofic/sofic_approx.hpp"
#include "sofic/spectral.hpp"

namespace sofic {

struct EnsembleResult {
  std::vector<std::uint64_t> seeds;
  std::vector<StepFunction> samples;
  std::vector<Spectrum> spectra; ///< only when requested
  StepFunction mean;
  Curve stddev;
  double seconds = 0.0; ///< wall clock, not part of the deterministic output
};

/// Seed of sample m of an ensemble.
std::uint64_t ensemble_seed(std::uint64_t seed, std::size_t m);

/// M realizations with seeds ensemble_seed(seed, m), eigensolved in
/// parallel and aggregated in sample order. Errors carry the sample index.
EnsembleResult run_ensemble(const SoficApprox &approx, const RandomHamiltonianSpec &spec, std::size_t M,
                            std::uint64_t seed, bool keep_spectra = false);

/// 2 exp(-2 eps^2 / (n c^2)), not clamped.
double mcdiarmid_bound(std::size_t n_vars, double c, double eps);

/// Number of pairs {x, y} (singletons included) with j_r > 0.
std::size_t count_random_bonds(const SoficApprox &approx, int rho);
/// |V| |S|^(2(rho+1)).
double random_bond_bound(const SoficApprox &approx, int rho);

/// Evenly spaced points strictly inside [lo, hi], dropping those within
/// `gap` of an atom of `f`.
std::vector<double> continuity_grid(const StepFunction &f, double lo, double hi, std::size_t points,
                                    double gap = 1e-6);

struct ConcentrationRow {
  double lambda = 0.0;
  double eps = 0.0;
  double empirical = 0.0; ///< fraction of samples with |N(l) - mean(l)| >= eps
  double bound = 0.0;
  bool pass = true;
};

struct ConcentrationReport {
  std::size_t samples = 0;
  std::size_t n_vars = 0;
  double c = 0.0;
  double slack = 0.0; ///< 3 / sqrt(M)
  int rho = 0;
  bool rho_deviation = false;
  std::vector<double> eps;
  std::vector<double> grid;
  std::vector<double> atoms;
  std::vector<ConcentrationRow> rows;
  bool all_pass = true;
};

/// Rows compare the empirical deviation fraction with the McDiarmid bound
/// for c = 2/|V|; a row fails only if bound <= 1 and empirical > bound + slack.
ConcentrationReport concentration_experiment(const EnsembleResult &ensemble, const SoficApprox &approx,
                                             const RandomHamiltonianSpec &spec, const std::vector<double> &eps,
                                             std::size_t grid_points = 101);
ConcentrationReport concentration_experiment(const SoficApprox &approx, const RandomHamiltonianSpec &spec,
                                             std::size_t M, const std::vector<double> &eps, std::uint64_t seed);

} // namespace sofic
