#include "sofic/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sofic/errors.hpp"

namespace sofic {

Spectrum eigenvalues(const SymmetricMatrix &m) {
  const auto n = m.size();
  if (!m.is_finite())
    throw NumericFailure("matrix has non-finite entries");
  Spectrum out;
  if (n == 0)
    return out;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = m(i, j);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericFailure("symmetric eigensolver did not converge");
  const auto &ev = solver.eigenvalues();
  out.values.assign(ev.data(), ev.data() + ev.size());
  std::sort(out.values.begin(), out.values.end());
  double sum = 0.0, sq = 0.0;
  for (double v : out.values) {
    if (!std::isfinite(v))
      throw NumericFailure("eigensolver returned a non-finite eigenvalue");
    sum += v;
    sq += v * v;
  }
  const double fro = m.frobenius_norm();
  out.backward_error = std::max(std::abs(sum - m.trace()), std::abs(std::sqrt(sq) - fro)) /
                       std::max(fro, 1.0);
  return out;
}

Spectrum spectrum_from_values(std::vector<double> values) {
  for (double v : values)
    if (!std::isfinite(v))
      throw NumericFailure("non-finite eigenvalue");
  std::sort(values.begin(), values.end());
  Spectrum s;
  s.values = std::move(values);
  return s;
}

// ---------------------------------------------------------------------------
// StepFunction

StepFunction::StepFunction(std::vector<double> jumps, std::vector<double> values, double base)
    : jumps_(std::move(jumps)), values_(std::move(values)), base_(base) {
  if (jumps_.size() != values_.size())
    throw InvalidArgument("step function needs one value per jump");
  double prev = base_;
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    if (!std::isfinite(jumps_[k]) || !std::isfinite(values_[k]))
      throw InvalidArgument("step function entries must be finite");
    if (k && !(jumps_[k] > jumps_[k - 1]))
      throw InvalidArgument("step function jumps must be strictly increasing");
    if (values_[k] < prev)
      throw InvalidArgument("step function must be nondecreasing");
    prev = values_[k];
  }
}

StepFunction StepFunction::ecdf(std::vector<double> points) {
  std::sort(points.begin(), points.end());
  std::vector<double> jumps, values;
  const auto n = static_cast<double>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i + 1 < points.size() && points[i + 1] == points[i])
      continue;
    jumps.push_back(points[i]);
    values.push_back(static_cast<double>(i + 1) / n);
  }
  return StepFunction(std::move(jumps), std::move(values));
}

double StepFunction::operator()(double lambda) const {
  auto it = std::upper_bound(jumps_.begin(), jumps_.end(), lambda);
  if (it == jumps_.begin())
    return base_;
  return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

double StepFunction::left_limit(double lambda) const {
  auto it = std::lower_bound(jumps_.begin(), jumps_.end(), lambda);
  if (it == jumps_.begin())
    return base_;
  return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

StepFunction counting_function(const Spectrum &spec) { return StepFunction::ecdf(spec.values); }

std::vector<double> union_grid(const std::vector<StepFunction> &fs) {
  std::vector<double> grid;
  for (const auto &f : fs)
    grid.insert(grid.end(), f.jumps().begin(), f.jumps().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

// Values of every function at every grid point, walking all in step.
std::vector<std::vector<double>> grid_values(const std::vector<StepFunction> &fs,
                                             const std::vector<double> &grid) {
  std::vector<std::vector<double>> out(fs.size(), std::vector<double>(grid.size()));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto &f = fs[i];
    std::size_t k = 0;
    double cur = f.base();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      while (k < f.size() && f.jumps()[k] <= grid[g])
        cur = f.values()[k++];
      out[i][g] = cur;
    }
  }
  return out;
}

} // namespace

StepFunction average(const std::vector<StepFunction> &fs) {
  if (fs.empty())
    throw InvalidArgument("cannot average zero step functions");
  const auto grid = union_grid(fs);
  const auto vals = grid_values(fs, grid);
  const auto m = static_cast<double>(fs.size());
  std::vector<double> mean(grid.size(), 0.0);
  double base = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    base += fs[i].base();
    for (std::size_t g = 0; g < grid.size(); ++g)
      mean[g] += vals[i][g];
  }
  for (auto &v : mean)
    v /= m;
  return StepFunction(grid, std::move(mean), base / m);
}

Curve pointwise_stddev(const std::vector<StepFunction> &fs) {
  if (fs.empty())
    throw InvalidArgument("cannot take the spread of zero step functions");
  Curve out;
  out.lambda = union_grid(fs);
  out.value.assign(out.lambda.size(), 0.0);
  const auto m = fs.size();
  if (m < 2)
    return out;
  const auto vals = grid_values(fs, out.lambda);
  for (std::size_t g = 0; g < out.lambda.size(); ++g) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      mean += vals[i][g];
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      ss += (vals[i][g] - mean) * (vals[i][g] - mean);
    out.value[g] = std::sqrt(ss / static_cast<double>(m - 1));
  }
  return out;
}

namespace {

void write_rows(std::ostream &os, const std::vector<double> &x, const std::vector<double> &y) {
  os << "lambda,value\n";
  char buf[64];
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[k], y[k]);
    os << buf;
  }
}

double parse_double(std::string_view tok) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw InvalidArgument("bad number '" + std::string(tok) + "' in CSV");
  return v;
}

} // namespace

void write_csv(std::ostream &os, const StepFunction &f) { write_rows(os, f.jumps(), f.values()); }

void write_csv(std::ostream &os, const Curve &c) { write_rows(os, c.lambda, c.value); }

StepFunction read_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line != "lambda,value")
    throw InvalidArgument("CSV must start with the header 'lambda,value'");
  std::vector<double> x, y;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InvalidArgument("CSV row without a comma: '" + line + "'");
    x.push_back(parse_double(std::string_view(line).substr(0, comma)));
    y.push_back(parse_double(std::string_view(line).substr(comma + 1)));
  }
  return StepFunction(std::move(x), std::move(y));
}

// ---------------------------------------------------------------------------
// References

double mckay_edge(int s) { return 2.0 * std::sqrt(2.0 * s - 1.0); }

double mckay_density(double x, int s) {
  if (s < 2)
    throw InvalidArgument("McKay law needs s >= 2");
  const double q = 4.0 * (2.0 * s - 1.0) - x * x;
  if (q <= 0.0)
    return 0.0;
  return s * std::sqrt(q) / (std::numbers::pi * (4.0 * s * s - x * x));
}

namespace {

// Integral of f against the McKay density, in the angle x = R cos(theta) that
// removes the square-root edges.
template <class F> double mckay_integral(F f, int s) {
  const double R = mckay_edge(s);
  auto g = [&](double t) {
    const double x = R * std::cos(t);
    return f(x) * mckay_density(x, s) * R * std::sin(t);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, std::numbers::pi, 15, 1e-14);
}

} // namespace

double mckay_ids(double lambda, int s) {
  const double edge = mckay_edge(s);
  if (s < 2)
    throw InvalidArgument("McKay law needs s >= 2");
  if (lambda <= -edge)
    return 0.0;
  if (lambda >= edge)
    return 1.0;
  // Closed form of the mass on [theta, pi] for k = 2s.
  const double k = 2.0 * s;
  const double th = std::acos(lambda / edge);
  const double pi = std::numbers::pi;
  const double phi = std::atan2(k * std::sin(th), (k - 2.0) * std::cos(th));
  const double v = (k * (pi - th) - (k - 2.0) * (pi - phi)) / (2.0 * pi);
  return std::clamp(v, 0.0, 1.0);
}

std::vector<double> torus_eigenvalues(const Group &group, const KernelSpec &kernel, int side) {
  if (group.kind() != GroupKind::Abelian)
    throw InvalidArgument("torus reference needs Z^d");
  if (side < 1 || 2 * kernel.radius() >= side)
    throw InvalidArgument("torus reference needs kernel radius < L/2");
  const int d = group.rank();
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) {
    n *= static_cast<std::size_t>(side);
    if (n > 10'000'000)
      throw ResourceLimit("torus reference exceeds 10^7 frequencies");
  }
  std::vector<double> out(n);
  std::vector<long> k(static_cast<std::size_t>(d), 0);
  const double w = 2.0 * std::numbers::pi / side;
  for (std::size_t idx = 0; idx < n; ++idx) {
    auto rest = idx;
    for (auto &c : k) {
      c = static_cast<long>(rest % static_cast<std::size_t>(side));
      rest /= static_cast<std::size_t>(side);
    }
    double v = 0.0;
    for (const auto &[g, a] : kernel.entries()) {
      long dot = 0;
      for (int i = 0; i < d; ++i)
        dot += k[static_cast<std::size_t>(i)] * g.data[static_cast<std::size_t>(i)];
      // Reduce the phase exactly in integers before taking the cosine.
      dot %= side;
      if (dot < 0)
        dot += side;
      v += a * std::cos(w * static_cast<double>(dot));
    }
    out[idx] = v;
  }
  return out;
}

StepFunction torus_reference_ids(const Group &group, const KernelSpec &kernel, int side) {
  return StepFunction::ecdf(torus_eigenvalues(group, kernel, side));
}

ReferenceIDS ReferenceIDS::mckay(int s) {
  if (s < 2)
    throw InvalidArgument("McKay reference needs s >= 2");
  ReferenceIDS r;
  r.kind_ = Kind::McKay;
  r.s_ = s;
  r.tag_ = "mckay(s=" + std::to_string(s) + ")";
  return r;
}

ReferenceIDS ReferenceIDS::torus(const Group &group, const KernelSpec &kernel, int side) {
  ReferenceIDS r;
  r.kind_ = Kind::Torus;
  r.s_ = group.rank();
  r.tag_ = "torus(d=" + std::to_string(group.rank()) + ",L=" + std::to_string(side) + ")";
  r.steps_ = std::make_shared<const StepFunction>(torus_reference_ids(group, kernel, side));
  return r;
}

ReferenceIDS ReferenceIDS::tabulated(StepFunction f, std::string tag) {
  ReferenceIDS r;
  r.kind_ = Kind::Tabulated;
  r.tag_ = std::move(tag);
  r.steps_ = std::make_shared<const StepFunction>(std::move(f));
  return r;
}

double ReferenceIDS::operator()(double lambda) const {
  return kind_ == Kind::McKay ? mckay_ids(lambda, s_) : (*steps_)(lambda);
}

double ReferenceIDS::left_limit(double lambda) const {
  return kind_ == Kind::McKay ? mckay_ids(lambda, s_) : steps_->left_limit(lambda);
}

std::optional<double> ReferenceIDS::density(double x) const {
  if (kind_ != Kind::McKay)
    return std::nullopt;
  return mckay_density(x, s_);
}

std::pair<double, double> ReferenceIDS::support() const {
  if (kind_ == Kind::McKay)
    return {-mckay_edge(s_), mckay_edge(s_)};
  if (steps_->size() == 0)
    return {0.0, 0.0};
  return {steps_->jumps().front(), steps_->jumps().back()};
}

// ---------------------------------------------------------------------------
// Comparisons

KsResult ks_distance(const StepFunction &a, const StepFunction &b) {
  KsResult best;
  best.ks = std::abs(a.base() - b.base());
  best.lambda_star = a.size() ? a.jumps().front() : (b.size() ? b.jumps().front() : 0.0);
  const auto grid = union_grid({a, b});
  for (double x : grid) {
    const double right = std::abs(a(x) - b(x));
    const double left = std::abs(a.left_limit(x) - b.left_limit(x));
    if (right > best.ks)
      best = {right, x};
    if (left > best.ks)
      best = {left, x};
  }
  return best;
}

KsResult ks_distance(const StepFunction &a, const ReferenceIDS &b) {
  if (b.steps())
    return ks_distance(a, *b.steps());
  KsResult best;
  if (a.size() == 0) {
    const auto [lo, hi] = b.support();
    return a.base() >= 0.5 ? KsResult{a.base(), lo} : KsResult{1.0 - a.base(), hi};
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = a.jumps()[k];
    const double f = b(x);
    const double right = std::abs(a.values()[k] - f);
    const double left = std::abs((k ? a.values()[k - 1] : a.base()) - f);
    if (right > best.ks)
      best = {right, x};
    if (left > best.ks)
      best = {left, x};
  }
  return best;
}

namespace {

void require_complex(std::complex<double> z) {
  if (z.imag() == 0.0)
    throw InvalidArgument("Stieltjes transform needs Im z != 0");
}

} // namespace

std::complex<double> stieltjes_trace(const Spectrum &spec, std::complex<double> z) {
  require_complex(z);
  if (spec.size() == 0)
    throw InvalidArgument("empty spectrum");
  std::complex<double> sum = 0.0;
  for (double l : spec.values)
    sum += 1.0 / (z - l);
  return sum / static_cast<double>(spec.size());
}

std::complex<double> stieltjes_trace(const StepFunction &f, std::complex<double> z) {
  require_complex(z);
  std::complex<double> sum = 0.0;
  double prev = f.base();
  for (std::size_t k = 0; k < f.size(); ++k) {
    sum += (f.values()[k] - prev) / (z - f.jumps()[k]);
    prev = f.values()[k];
  }
  return sum;
}

std::complex<double> reference_stieltjes(const ReferenceIDS &ref, std::complex<double> z) {
  require_complex(z);
  if (ref.steps())
    return stieltjes_trace(*ref.steps(), z);
  const int s = ref.rank();
  auto re = [&](double x) { return std::real(1.0 / (z - x)); };
  auto im = [&](double x) { return std::imag(1.0 / (z - x)); };
  return {mckay_integral(re, s), mckay_integral(im, s)};
}

std::vector<double> detect_atoms(const StepFunction &f, double threshold, double merge) {
  std::vector<double> atoms;
  double prev = f.base();
  std::size_t k = 0;
  while (k < f.size()) {
    const double start = f.jumps()[k];
    double before = prev, loc_sum = 0.0;
    std::size_t count = 0;
    while (k < f.size() && f.jumps()[k] - start <= merge) {
      loc_sum += f.jumps()[k];
      prev = f.values()[k];
      ++count;
      ++k;
    }
    if (prev - before >= threshold)
      atoms.push_back(loc_sum / static_cast<double>(count));
  }
  return atoms;
}

} // namespace sofic
