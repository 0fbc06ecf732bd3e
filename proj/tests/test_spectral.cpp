#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "sofic/builders.hpp"
#include "sofic/errors.hpp"
#include "sofic/operators.hpp"
#include "sofic/spectral.hpp"

using namespace sofic;
using cd = std::complex<double>;

namespace {

// Cyclic Jacobi rotations: slow, simple, independent of the library solver.
std::vector<double> jacobi_eigenvalues(const SymmetricMatrix &m) {
  const auto n = m.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i][j] = m(i, j);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        off += a[i][j] * a[i][j];
    if (off < 1e-30)
      break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0)
          continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i)
    ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

// McKay oracle: with x = -R cos(t) the density becomes smooth in t, so plain
// composite Simpson converges fast.
double simpson_theta(double lambda, int s, const std::function<double(double)> &weight = nullptr) {
  const double R = 2 * std::sqrt(2.0 * s - 1);
  if (lambda <= -R)
    return 0;
  const double top = std::acos(std::clamp(-lambda / R, -1.0, 1.0));
  const int N = 20000;
  const double h = top / N;
  auto f = [&](double t) {
    const double x = -R * std::cos(t);
    const double dens = s * R * std::sin(t) / (std::numbers::pi * (4.0 * s * s - x * x));
    return dens * R * std::sin(t) * (weight ? weight(x) : 1.0);
  };
  double sum = f(0) + f(top);
  for (int k = 1; k < N; ++k)
    sum += f(k * h) * (k % 2 ? 4 : 2);
  return sum * h / 3;
}

SymmetricMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  SymmetricMatrix m(rows.size());
  std::size_t i = 0;
  for (auto r : rows) {
    std::size_t j = 0;
    for (double v : r) {
      if (j <= i)
        m.set(i, j, v);
      ++j;
    }
    ++i;
  }
  return m;
}

SymmetricMatrix cycle_adjacency(std::size_t n) {
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    m.add((i + 1) % n, i, 1.0);
  return m;
}

} // namespace

TEST_CASE("small spectra") {
  auto two = eigenvalues(from_rows({{0, 1}, {1, 0}}));
  CHECK(two.values[0] == doctest::Approx(-1));
  CHECK(two.values[1] == doctest::Approx(1));
  auto c4 = eigenvalues(cycle_adjacency(4));
  CHECK(c4.values[0] == doctest::Approx(-2));
  CHECK(std::abs(c4.values[1]) < 1e-14);
  CHECK(std::abs(c4.values[2]) < 1e-14);
  CHECK(c4.values[3] == doctest::Approx(2));
  auto p3 = eigenvalues(from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}));
  CHECK(p3.values[0] == doctest::Approx(-std::sqrt(2.0)));
  CHECK(std::abs(p3.values[1]) < 1e-14);
  CHECK(p3.values[2] == doctest::Approx(std::sqrt(2.0)));
  CHECK(eigenvalues(SymmetricMatrix(0)).size() == 0);
  SymmetricMatrix nan(2);
  nan.set(1, 0, NAN);
  CHECK_THROWS_AS(eigenvalues(nan), NumericFailure);
}

TEST_CASE("eigenvalues match a Jacobi oracle") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (std::size_t n : {1u, 5u, 17u, 40u}) {
    SymmetricMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        m.set(i, j, nd(rng));
    const auto s = eigenvalues(m);
    const auto ref = jacobi_eigenvalues(m);
    const double scale = m.frobenius_norm();
    for (std::size_t k = 0; k < n; ++k)
      CHECK(std::abs(s.values[k] - ref[k]) <= 1e-12 * scale);
    CHECK(s.backward_error <= 1e-12);
    CHECK(std::is_sorted(s.values.begin(), s.values.end()));
  }
}

TEST_CASE("counting functions") {
  const auto f = counting_function(spectrum_from_values({-1, 1}));
  CHECK(f(0) == 0.5);
  CHECK(f(1) == 1.0);
  CHECK(f(-1.0000001) == 0.0);
  const auto z = counting_function(spectrum_from_values({0, 0, 0}));
  CHECK(z(-1e-300) == 0.0);
  CHECK(z(0) == 1.0);
  CHECK(z.size() == 1);
  const auto c4 = counting_function(spectrum_from_values({-2, 0, 0, 2}));
  CHECK(c4(0) == 0.75);
  CHECK(c4.left_limit(0) == 0.25);

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> ud(-5, 5);
  std::vector<double> pts(300);
  for (auto &p : pts)
    p = ud(rng) * 0.5;
  const auto e = StepFunction::ecdf(pts);
  CHECK(e.size() <= pts.size());
  CHECK(e.final_value() == 1.0);
  for (std::size_t k = 1; k < e.size(); ++k)
    CHECK(e.values()[k] > e.values()[k - 1]);
  for (double x : e.jumps())
    CHECK(e(x) == static_cast<double>(std::count_if(pts.begin(), pts.end(), [&](double p) { return p <= x; })) / 300.0);
  CHECK_THROWS_AS(StepFunction({1, 0}, {0.5, 1}), InvalidArgument);
  CHECK_THROWS_AS(StepFunction({0, 1}, {0.5, 0.2}), InvalidArgument);
}

TEST_CASE("averages and spreads") {
  const auto a = StepFunction::ecdf({0, 1});
  const auto b = StepFunction::ecdf({0.5, 2});
  const auto m = average({a, b});
  CHECK(m(0) == 0.25);
  CHECK(m(0.5) == 0.5);
  CHECK(m(1) == 0.75);
  CHECK(m(2) == 1.0);
  CHECK(average({a}) == a);
  const auto sd = pointwise_stddev({a, b});
  CHECK(sd.lambda.size() == 4);
  CHECK(sd.value[0] == doctest::Approx(std::sqrt(0.125)));
  CHECK(sd.value[3] == 0.0);
  CHECK(pointwise_stddev({a}).value == std::vector<double>(2, 0.0));
}

TEST_CASE("csv round trip") {
  const auto f = StepFunction::ecdf({-1.0 / 3.0, 0.1, 0.1, 7e-300, 12345.678901234567});
  std::stringstream ss;
  write_csv(ss, f);
  CHECK(ss.str().rfind("lambda,value\n", 0) == 0);
  CHECK(read_csv(ss) == f);
  std::istringstream bad("x,y\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad), InvalidArgument);
}

TEST_CASE("McKay reference") {
  for (int s : {2, 3, 5}) {
    const double R = mckay_edge(s);
    CHECK(mckay_ids(-R, s) == 0.0);
    CHECK(mckay_ids(R, s) == 1.0);
    CHECK(mckay_ids(0, s) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(simpson_theta(R, s) - 1.0) < 1e-9);
    for (double t : {-0.999, -0.9, -0.5, -0.1, 0.2, 0.7, 0.95, 0.99999}) {
      const double lam = t * R;
      CHECK(std::abs(mckay_ids(lam, s) - simpson_theta(lam, s)) < 1e-9);
    }
    double prev = 0;
    for (double x = -R; x <= R; x += R / 50) {
      const double v = mckay_ids(x, s);
      CHECK(v >= prev);
      prev = v;
    }
  }
  CHECK(mckay_density(0, 2) == doctest::Approx(std::sqrt(3.0) / (4 * std::numbers::pi)));
  CHECK(mckay_density(0, 2) == doctest::Approx(0.137832).epsilon(1e-6));
  CHECK(mckay_density(5, 2) == 0.0);
  CHECK_THROWS_AS(mckay_density(0, 1), InvalidArgument);
}

TEST_CASE("torus reference") {
  const auto z1 = Group::abelian(1);
  const auto z2 = Group::abelian(2);
  auto ev = torus_eigenvalues(z1, KernelSpec::adjacency(z1), 4);
  std::sort(ev.begin(), ev.end());
  const std::vector<double> want{-2, 0, 0, 2};
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(ev[i] - want[i]) < 1e-15);
  for (int L : {64, 256, 1024}) {
    const auto f = torus_reference_ids(z1, KernelSpec::adjacency(z1), L);
    CHECK(std::abs(f(0) - 0.5) <= 1.0 / L + 1e-12);
  }
  for (double v : torus_eigenvalues(z2, KernelSpec::laplacian(z2), 12))
    CHECK((v >= -8 - 1e-12 && v <= 1e-12));
  for (int L : {16, 32})
    for (const auto *g : {&z1, &z2}) {
      const auto k = KernelSpec::adjacency(*g);
      const double ks = ks_distance(torus_reference_ids(*g, k, L), torus_reference_ids(*g, k, 2 * L)).ks;
      MESSAGE("d=" << g->rank() << " L=" << L << " KS(L, 2L) = " << ks);
      CHECK(ks <= 0.1);
    }
  CHECK_THROWS_AS(torus_eigenvalues(z1, KernelSpec::from_entries(z1, {{z1.parse("aa"), 1.0}}), 4), InvalidArgument);
  CHECK_THROWS_AS(torus_eigenvalues(Group::free(2), KernelSpec::adjacency(Group::free(2)), 4), InvalidArgument);
}

TEST_CASE("torus reference agrees with the dense solver") {
  const auto z2 = Group::abelian(2);
  const auto k = KernelSpec::from_entries(z2, {{z2.parse("a"), 1.0}, {z2.parse("ab"), 0.3}, {z2.identity(), -1.0}});
  const auto approx = build_quotient_approx(z2, torus_group(2, 7), std::nullopt, "torus");
  const auto dense = eigenvalues(assemble_deterministic(approx, k, AnchorRule::Covering));
  auto ref = torus_eigenvalues(z2, k, 7);
  std::sort(ref.begin(), ref.end());
  REQUIRE(ref.size() == dense.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    CHECK(std::abs(ref[i] - dense.values[i]) < 1e-12);
}

TEST_CASE("KS distance") {
  const auto a = StepFunction::ecdf({0.0});
  const auto b = StepFunction::ecdf({1.0});
  CHECK(ks_distance(a, a).ks == 0.0);
  const auto r = ks_distance(a, b);
  CHECK(r.ks == 1.0);
  CHECK(r.lambda_star == 0.0);
  const auto c = StepFunction::ecdf({0.0, 1.0, 2.0, 3.0});
  CHECK(ks_distance(c, StepFunction::ecdf({0.5, 1.5, 2.5, 3.5})).ks == 0.25);
  CHECK(ks_distance(a, ReferenceIDS::tabulated(a)).ks == 0.0);

  // A point mass at 0 against McKay: the sup is 1/2, attained at 0.
  const auto m = ks_distance(a, ReferenceIDS::mckay(2));
  CHECK(m.ks == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.lambda_star == 0.0);
  // Symmetric quantile staircase against McKay: error at most 1/n.
  const int n = 200;
  std::vector<double> q;
  const double R = mckay_edge(2);
  for (int i = 1; i <= n; ++i) {
    const double target = (i - 0.5) / n;
    double lo = -R, hi = R;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mckay_ids(mid, 2) < target ? lo : hi) = mid;
    }
    q.push_back(0.5 * (lo + hi));
  }
  const auto stair = ks_distance(StepFunction::ecdf(q), ReferenceIDS::mckay(2)).ks;
  CHECK(stair == doctest::Approx(0.5 / n).epsilon(1e-6));
}

TEST_CASE("Stieltjes transforms") {
  CHECK(stieltjes_trace(spectrum_from_values({0, 0, 0}), cd(0, 1)) == cd(0, -1));
  const auto pm = stieltjes_trace(spectrum_from_values({-1, 1}), cd(0, 1));
  CHECK(pm.real() == doctest::Approx(0.0));
  CHECK(pm.imag() == doctest::Approx(-0.5));
  CHECK_THROWS_AS(stieltjes_trace(spectrum_from_values({1}), cd(2, 0)), InvalidArgument);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<double> vals(100);
  for (auto &v : vals)
    v = nd(rng);
  const auto spec = spectrum_from_values(vals);
  const auto f = counting_function(spec);
  for (double x = -5; x <= 5; x += 0.5)
    for (double eta : {1.0, 0.5}) {
      const cd z(x, eta);
      const auto t = stieltjes_trace(spec, z);
      CHECK(std::abs(t) <= 1 / eta + 1e-15);
      CHECK(std::abs(t - stieltjes_trace(f, z)) < 1e-14);
    }

  const auto ref = ReferenceIDS::mckay(2);
  for (double x : {-4.0, -1.5, 0.0, 2.5})
    for (double eta : {1.0, 0.5}) {
      const cd z(x, eta);
      const double re = simpson_theta(mckay_edge(2), 2, [&](double y) { return std::real(1.0 / (z - y)); });
      const double im = simpson_theta(mckay_edge(2), 2, [&](double y) { return std::imag(1.0 / (z - y)); });
      const auto q = reference_stieltjes(ref, z);
      CHECK(std::abs(q - cd(re, im)) < 1e-9);
    }
}

TEST_CASE("atom detection") {
  const auto f = StepFunction::ecdf({0, 0, 0, 1e-10, 0.5, 1, 1 + 1e-9, 2});
  const auto atoms = detect_atoms(f, 0.2);
  REQUIRE(atoms.size() == 2);
  CHECK(std::abs(atoms[0]) < 1e-9);
  CHECK(atoms[1] == doctest::Approx(1.0));
  CHECK(detect_atoms(f, 0.1).size() == 4);
}
