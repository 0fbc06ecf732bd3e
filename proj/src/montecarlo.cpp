#include "sofic/montecarlo.hpp"

#include <chrono>
#include <cmath>

#include "sofic/errors.hpp"
#include "sofic/parallel.hpp"

namespace sofic {

std::uint64_t ensemble_seed(std::uint64_t seed, std::size_t m) {
  return mix_seed(seed, 0x5eed5eed5eedULL, static_cast<std::uint64_t>(m));
}

namespace {

template <class E> [[noreturn]] void rethrow_tagged(const E &e, std::size_t m) {
  throw E("sample " + std::to_string(m) + ": " + e.what());
}

} // namespace

EnsembleResult run_ensemble(const SoficApprox &approx, const RandomHamiltonianSpec &spec, std::size_t M,
                            std::uint64_t seed, bool keep_spectra) {
  if (M < 1)
    throw InvalidArgument("ensemble needs at least one sample");
  const auto start = std::chrono::steady_clock::now();
  EnsembleResult out;
  out.seeds.resize(M);
  for (std::size_t m = 0; m < M; ++m)
    out.seeds[m] = ensemble_seed(seed, m);
  out.samples.resize(M);
  if (keep_spectra)
    out.spectra.resize(M);
  parallel_for(M, [&](std::size_t m) {
    try {
      auto spectrum = eigenvalues(sample_random_hamiltonian(approx, spec, out.seeds[m]));
      out.samples[m] = counting_function(spectrum);
      if (keep_spectra)
        out.spectra[m] = std::move(spectrum);
    } catch (const InvalidArgument &e) {
      rethrow_tagged(e, m);
    } catch (const ResourceLimit &e) {
      rethrow_tagged(e, m);
    } catch (const NumericFailure &e) {
      rethrow_tagged(e, m);
    }
  });
  out.mean = average(out.samples);
  out.stddev = pointwise_stddev(out.samples);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double mcdiarmid_bound(std::size_t n_vars, double c, double eps) {
  if (n_vars < 1)
    throw InvalidArgument("McDiarmid bound needs at least one variable");
  if (!(c > 0.0))
    throw InvalidArgument("bounded-difference constant must be positive");
  if (!(eps >= 0.0))
    throw InvalidArgument("deviation must be >= 0");
  return 2.0 * std::exp(-2.0 * eps * eps / (static_cast<double>(n_vars) * c * c));
}

std::size_t count_random_bonds(const SoficApprox &approx, int rho) {
  return anchored_pairs(approx, rho).size();
}

double random_bond_bound(const SoficApprox &approx, int rho) {
  return static_cast<double>(approx.vertex_count()) *
         std::pow(static_cast<double>(approx.group().label_count()), 2.0 * (rho + 1));
}

std::vector<double> continuity_grid(const StepFunction &f, double lo, double hi, std::size_t points,
                                    double gap) {
  const auto atoms = detect_atoms(f);
  std::vector<double> grid;
  if (!(hi > lo) || points == 0)
    return grid;
  const double step = (hi - lo) / static_cast<double>(points + 1);
  for (std::size_t k = 1; k <= points; ++k) {
    const double x = lo + step * static_cast<double>(k);
    bool near = false;
    for (double a : atoms)
      near = near || std::abs(x - a) <= gap;
    if (!near)
      grid.push_back(x);
  }
  return grid;
}

ConcentrationReport concentration_experiment(const EnsembleResult &ensemble, const SoficApprox &approx,
                                             const RandomHamiltonianSpec &spec, const std::vector<double> &eps,
                                             std::size_t grid_points) {
  const auto M = ensemble.samples.size();
  if (M < 30)
    throw InvalidArgument("concentration experiment needs M >= 30");
  ConcentrationReport rep;
  rep.samples = M;
  const auto rv = spec.rho.at(std::max(approx.radius(), 1));
  rep.rho = rv.rho;
  rep.rho_deviation = rv.deviation;
  rep.n_vars = count_random_bonds(approx, rep.rho);
  rep.c = 2.0 / static_cast<double>(approx.vertex_count());
  rep.slack = 3.0 / std::sqrt(static_cast<double>(M));
  rep.eps = eps;
  const auto &mean = ensemble.mean;
  rep.atoms = detect_atoms(mean);
  double lo = 0.0, hi = 0.0;
  if (mean.size()) {
    lo = mean.jumps().front();
    hi = mean.jumps().back();
  }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  rep.grid = continuity_grid(mean, lo, hi, grid_points);
  for (double e : eps) {
    const double bound = mcdiarmid_bound(rep.n_vars, rep.c, e);
    for (double x : rep.grid) {
      const double mx = mean(x);
      std::size_t hits = 0;
      for (const auto &f : ensemble.samples)
        hits += std::abs(f(x) - mx) >= e;
      ConcentrationRow row;
      row.lambda = x;
      row.eps = e;
      row.empirical = static_cast<double>(hits) / static_cast<double>(M);
      row.bound = bound;
      row.pass = bound > 1.0 || row.empirical <= bound + rep.slack;
      rep.all_pass = rep.all_pass && row.pass;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

ConcentrationReport concentration_experiment(const SoficApprox &approx, const RandomHamiltonianSpec &spec,
                                             std::size_t M, const std::vector<double> &eps, std::uint64_t seed) {
  return concentration_experiment(run_ensemble(approx, spec, M, seed), approx, spec, eps);
}

} // namespace sofic
