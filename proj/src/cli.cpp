#include "sofic/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <new>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sofic/builders.hpp"
#include "sofic/errors.hpp"
#include "sofic/montecarlo.hpp"
#include "sofic/operators.hpp"
#include "sofic/parallel.hpp"
#include "sofic/spectral.hpp"

namespace sofic::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Key registry

namespace {

enum : unsigned {
  kBuild = 1,
  kSpectrum = 2,
  kIds = 4,
  kCompare = 8,
  kEnsemble = 16,
  kConcentration = 32,
  kAll = 63,
  kOperator = kSpectrum | kIds | kEnsemble | kConcentration,
  kBuilder = kBuild | kOperator,
  kRandomRuns = kEnsemble | kConcentration,
  kCurves = kIds | kCompare | kEnsemble | kConcentration,
};

} // namespace

const std::vector<std::string> &command_names() {
  static const std::vector<std::string> names{"build", "spectrum", "ids", "compare", "ensemble", "concentration"};
  return names;
}

const std::vector<KeyInfo> &config_keys() {
  static const std::vector<KeyInfo> keys{
      {"seed", "unsigned 64-bit seed; required for random operators", kAll},
      {"threads", "worker threads (default 1); does not change any output", kAll},
      {"output", "output directory (default sofic-out)", kAll},
      {"caps.max_order", "largest permutation group to enumerate (default 10000000)", kBuilder},
      {"caps.max_dense", "largest dense matrix dimension, at most 8192 (default 8192)", kOperator},
      {"group.type", "free | abelian", kBuilder},
      {"group.rank", "s for F_s, d for Z^d", kBuilder},
      {"builder.type", "folner | free-perm | lambda | torus | file", kBuilder},
      {"builder.L", "side length (folner, torus)", kBuilder},
      {"builder.r", "radius of the good set (folner)", kBuilder},
      {"builder.n", "ball radius of the permutation points (free-perm)", kBuilder},
      {"builder.variant", "plain | tilde (free-perm, required)", kBuilder},
      {"builder.lambda", "comma separated reduced words, e.g. e,a,b,A,B,ab,ba (lambda)", kBuilder},
      {"builder.radius", "approximation radius of a quotient (default: largest valid)", kBuilder},
      {"builder.path", "approximation file written by build (file)", kBuilder},
      {"verify.max_radius", "search bound for r_star (default radius + 8)", kBuild},
      {"verify.epsilon", "also require |V0|/|V| >= 1 - epsilon", kBuild},
      {"operator.type", "adjacency | laplacian | kernel | percolation | random | matrix", kOperator},
      {"operator.entries", "kernel values, e.g. a:1,ab:0.5,e:-3 (kernel)", kOperator},
      {"operator.anchor", "third | half | covering (default covering for quotients, third otherwise)", kOperator},
      {"operator.q", "bond probability of every generator (percolation)", kOperator},
      {"operator.alpha", "diagonal coupling (default 1 for percolation, 0 for random)", kOperator},
      {"operator.edges", "edge laws, e.g. a:uniform(0,1);b:bernoulli(0.5) (random)", kOperator},
      {"operator.diag", "diagonal law, e.g. gaussian(0,1) (random, default constant(0))", kOperator},
      {"operator.rho", "log | finite_range | <integer> (random, percolation; default finite_range)", kOperator},
      {"operator.path", "matrix file (matrix)", kOperator},
      {"operator.negate", "true flips the sign of the operator (default false)", kOperator},
      {"reference.type", "none | mckay | torus | tabulated (default none)", kCurves},
      {"reference.s", "McKay rank (default: group rank)", kCurves},
      {"reference.L", "torus side of the oracle (torus)", kCurves},
      {"reference.path", "lambda,value csv (tabulated)", kCurves},
      {"compare.input", "lambda,value csv to compare", kCompare},
      {"compare.other", "second csv; replaces the reference", kCompare},
      {"ensemble.M", "number of samples", kRandomRuns},
      {"concentration.eps", "deviations, comma separated (default 0.1,0.2)", kRandomRuns},
      {"concentration.grid", "grid points (default 101)", kRandomRuns},
      {"plot.title", "plot title", kCurves},
      {"plot.xmin", "left end of the plot", kCurves},
      {"plot.xmax", "right end of the plot", kCurves},
  };
  return keys;
}

namespace {

unsigned command_bit(const std::string &command) {
  const auto &names = command_names();
  const auto it = std::find(names.begin(), names.end(), command);
  if (it == names.end())
    throw InvalidArgument("unknown command '" + command + "'");
  return 1u << (it - names.begin());
}

} // namespace

std::vector<std::string> keys_for(const std::string &command) {
  const unsigned bit = command_bit(command);
  std::vector<std::string> out;
  for (const auto &k : config_keys())
    if (k.commands & bit)
      out.push_back(k.name);
  return out;
}

// ---------------------------------------------------------------------------
// Config text

namespace {

std::string scalar_text(const nlohmann::json &v, const std::string &key) {
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_boolean())
    return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned() || v.is_number_float())
    return v.dump();
  throw InvalidArgument("config key '" + key + "' must be a scalar");
}

void flatten_into(const nlohmann::json &node, const std::string &prefix, ConfigMap &out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const auto &v = it.value();
    if (v.is_object()) {
      flatten_into(v, key, out);
    } else if (v.is_array()) {
      std::string joined;
      for (const auto &e : v)
        joined += (joined.empty() ? "" : ",") + scalar_text(e, key);
      out[key] = joined;
    } else {
      out[key] = scalar_text(v, key);
    }
  }
}

} // namespace

ConfigMap flatten_json(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw InvalidArgument("config must be a JSON object");
  ConfigMap out;
  flatten_into(doc, "", out);
  return out;
}

std::string config_hash(const ConfigMap &config) {
  nlohmann::json canon = nlohmann::json::object();
  for (const auto &[k, v] : config)
    if (k != "threads" && k != "output")
      canon[k] = v;
  const std::string text = canon.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '&': out += "&amp;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::string render_svg(const PlotSpec &plot) {
  if (plot.curves.empty())
    throw InvalidArgument("plot needs at least one curve");
  for (double v : {plot.xmin, plot.xmax, plot.ymin, plot.ymax})
    if (!std::isfinite(v))
      throw InvalidArgument("plot ranges must be finite");
  if (!(plot.xmax > plot.xmin) || !(plot.ymax > plot.ymin))
    throw InvalidArgument("plot ranges must be nonempty");

  constexpr double W = 800, H = 500, ml = 60, mr = 20, mt = 40, mb = 50;
  const auto px = [&](double x) { return ml + (x - plot.xmin) / (plot.xmax - plot.xmin) * (W - ml - mr); };
  const auto py = [&](double y) { return H - mb - (y - plot.ymin) / (plot.ymax - plot.ymin) * (H - mt - mb); };
  const auto clampx = [&](double x) { return std::clamp(x, plot.xmin, plot.xmax); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
     << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<defs><clipPath id=\"area\"><rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
     << "\" height=\"" << H - mt - mb << "\"/></clipPath></defs>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double x = plot.xmin + (plot.xmax - plot.xmin) * k / 5.0;
    const double y = plot.ymin + (plot.ymax - plot.ymin) * k / 5.0;
    os << "<line x1=\"" << fixed(px(x)) << "\" y1=\"" << H - mb << "\" x2=\"" << fixed(px(x)) << "\" y2=\""
       << H - mb + 5 << "\" stroke=\"black\"/>";
    os << "<text x=\"" << fixed(px(x)) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">" << fixed(x, 3)
       << "</text>\n";
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << fixed(py(y)) << "\" x2=\"" << ml << "\" y2=\"" << fixed(py(y))
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << fixed(py(y) + 4) << "\" text-anchor=\"end\">" << fixed(y, 3)
       << "</text>\n";
  }
  if (!plot.title.empty())
    os << "<text x=\"" << W / 2 << "\" y=\"" << mt - 14 << "\" text-anchor=\"middle\" font-size=\"14\">"
       << xml_escape(plot.title) << "</text>\n";

  for (const auto &c : plot.curves) {
    if (c.x.size() != c.y.size())
      throw InvalidArgument("plot curve '" + c.label + "' has mismatched coordinates");
    os << "<path clip-path=\"url(#area)\" fill=\"none\" stroke=\"" << xml_escape(c.color)
       << "\" stroke-width=\"1.5\" d=\"";
    if (c.steps) {
      os << 'M' << fixed(px(plot.xmin)) << ' ' << fixed(py(c.base));
      for (std::size_t i = 0; i < c.x.size(); ++i)
        os << 'H' << fixed(px(clampx(c.x[i]))) << 'V' << fixed(py(c.y[i]));
      os << 'H' << fixed(px(plot.xmax));
    } else {
      for (std::size_t i = 0; i < c.x.size(); ++i)
        os << (i ? 'L' : 'M') << fixed(px(c.x[i])) << ' ' << fixed(py(c.y[i]));
    }
    os << "\"/>\n";
  }
  double ly = mt + 16;
  for (const auto &c : plot.curves) {
    os << "<line x1=\"" << ml + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + 34 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << xml_escape(c.color) << "\" stroke-width=\"2\"/><text x=\"" << ml + 40 << "\" y=\""
       << ly << "\">" << xml_escape(c.label) << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Typed access to the merged config

namespace {

class Settings {
public:
  explicit Settings(ConfigMap m) : m_(std::move(m)) {}

  const ConfigMap &map() const { return m_; }
  bool has(const std::string &k) const { return m_.count(k) != 0; }

  const std::string &text(const std::string &k) const {
    const auto it = m_.find(k);
    if (it == m_.end())
      throw InvalidArgument("config key '" + k + "' is required");
    return it->second;
  }
  std::string text_or(const std::string &k, const std::string &def) const { return has(k) ? text(k) : def; }

  long long integer(const std::string &k) const {
    const auto &s = text(k);
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw InvalidArgument("config key '" + k + "': expected an integer, got '" + s + "'");
    return v;
  }
  long long integer_or(const std::string &k, long long def) const { return has(k) ? integer(k) : def; }
  int bounded(const std::string &k, long long lo, long long hi) const {
    const auto v = integer(k);
    if (v < lo || v > hi)
      throw InvalidArgument("config key '" + k + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "]");
    return static_cast<int>(v);
  }

  std::uint64_t unsigned64(const std::string &k) const {
    const auto &s = text(k);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw InvalidArgument("config key '" + k + "': expected an unsigned integer, got '" + s + "'");
    return v;
  }

  double real(const std::string &k) const { return parse_real(text(k), k); }
  double real_or(const std::string &k, double def) const { return has(k) ? real(k) : def; }

  std::vector<double> reals_or(const std::string &k, std::vector<double> def) const {
    if (!has(k))
      return def;
    std::vector<double> out;
    std::stringstream ss(text(k));
    std::string tok;
    while (std::getline(ss, tok, ','))
      out.push_back(parse_real(trim(tok), k));
    if (out.empty())
      throw InvalidArgument("config key '" + k + "' is empty");
    return out;
  }

  bool boolean_or(const std::string &k, bool def) const {
    if (!has(k))
      return def;
    const auto &s = text(k);
    if (s == "true" || s == "1")
      return true;
    if (s == "false" || s == "0")
      return false;
    throw InvalidArgument("config key '" + k + "': expected true or false, got '" + s + "'");
  }

  std::string choice(const std::string &k, const std::vector<std::string> &allowed) const {
    const auto &s = text(k);
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto &a : allowed)
        list += (list.empty() ? "" : " | ") + a;
      throw InvalidArgument("config key '" + k + "' must be one of " + list + ", got '" + s + "'");
    }
    return s;
  }

  static std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

private:
  static double parse_real(const std::string &s, const std::string &k) {
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      throw InvalidArgument("config key '" + k + "': expected a finite number, got '" + s + "'");
    return v;
  }

  ConfigMap m_;
};

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep))
    out.push_back(Settings::trim(tok));
  return out;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Output {
public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string &name, const std::string &content) const {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os)
      throw InvalidArgument("cannot write '" + (dir_ / name).string() + "'");
    os << content;
    if (!os)
      throw ResourceLimit("write failed for '" + (dir_ / name).string() + "'");
  }
  void write_json(const std::string &name, const ojson &doc) const { write(name, doc.dump(2) + "\n"); }

private:
  fs::path dir_;
};

// ---------------------------------------------------------------------------
// Builders and operators from config

Group make_group(const Settings &s) {
  const auto type = s.choice("group.type", {"free", "abelian"});
  const int rank = s.bounded("group.rank", 1, 26);
  return type == "free" ? Group::free(rank) : Group::abelian(rank);
}

struct Built {
  std::optional<SoficApprox> approx;
  bool quotient = false;
};

Built make_approx(const Settings &s) {
  const auto type = s.choice("builder.type", {"folner", "free-perm", "lambda", "torus", "file"});
  Built b;
  if (type == "file") {
    std::istringstream in(read_file(s.text("builder.path")));
    b.approx.emplace(read_sofic(in));
    b.quotient = b.approx->good().size() == b.approx->vertex_count();
    if (s.has("group.type") || s.has("group.rank")) {
      const auto g = make_group(s);
      if (g.kind() != b.approx->group().kind() || g.rank() != b.approx->group().rank())
        throw InvalidArgument("group section does not match the approximation file");
    }
    return b;
  }
  const auto group = make_group(s);
  const auto cap = static_cast<std::size_t>(s.integer_or("caps.max_order", static_cast<long long>(kDefaultMaxOrder)));
  std::optional<int> radius;
  if (s.has("builder.radius"))
    radius = s.bounded("builder.radius", 0, 1000);
  if (type == "folner") {
    if (group.kind() != GroupKind::Abelian)
      throw InvalidArgument("folner builder needs group.type = abelian");
    b.approx.emplace(build_folner_approx(group.rank(), s.bounded("builder.L", 1, 1 << 20),
                                         s.bounded("builder.r", 0, 1 << 20)));
    return b;
  }
  b.quotient = true;
  if (type == "torus") {
    if (group.kind() != GroupKind::Abelian)
      throw InvalidArgument("torus builder needs group.type = abelian");
    const int L = s.bounded("builder.L", 1, 1 << 20);
    b.approx.emplace(build_quotient_approx(group, torus_group(group.rank(), L), radius,
                                           "torus d=" + std::to_string(group.rank()) + " L=" + std::to_string(L)));
    return b;
  }
  if (group.kind() != GroupKind::Free)
    throw InvalidArgument(type + " builder needs group.type = free");
  const auto inv = standard_inverse(group.rank());
  if (type == "free-perm") {
    const int n = s.bounded("builder.n", 0, 64);
    const auto vname = s.choice("builder.variant", {"plain", "tilde"});
    const auto variant = vname == "plain" ? FreePermVariant::Plain : FreePermVariant::Tilde;
    auto h = generate_perm_group(free_perm_generators(group, n, variant), inv, cap);
    b.approx.emplace(build_quotient_approx(group, h, radius,
                                           "free-perm s=" + std::to_string(group.rank()) + " n=" +
                                               std::to_string(n) + " variant=" + vname));
    return b;
  }
  const auto lambda = LambdaSet::parse(group, s.text("builder.lambda"));
  auto h = generate_perm_group(free_perm_lambda_generators(group, lambda), inv, cap);
  b.approx.emplace(build_quotient_approx(group, h, radius, "lambda " + lambda.to_string(group)));
  return b;
}

struct Operator {
  std::string type;
  std::optional<KernelSpec> kernel;
  std::optional<RandomHamiltonianSpec> random;
  std::optional<SymmetricMatrix> matrix;
  AnchorRule anchor = AnchorRule::Third;
  bool negate = false;

  bool is_random() const { return random.has_value(); }
};

RhoSchedule parse_rho(const Settings &s, const Group &group) {
  if (!s.has("operator.rho") || s.text("operator.rho") == "finite_range")
    return RhoSchedule::finite_range();
  if (s.text("operator.rho") == "log")
    return RhoSchedule::log(group.label_count());
  return RhoSchedule::fixed(s.bounded("operator.rho", 0, 1000));
}

KernelSpec parse_kernel(const Group &group, const std::string &text) {
  std::vector<std::pair<GroupElement, double>> entries;
  for (const auto &item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw InvalidArgument("kernel entry '" + item + "' must look like word:value");
    const auto word = Settings::trim(item.substr(0, colon));
    const auto value = Settings::trim(item.substr(colon + 1));
    double v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size() || !std::isfinite(v))
      throw InvalidArgument("kernel entry '" + item + "' has a bad value");
    entries.emplace_back(group.parse(word), v);
  }
  return KernelSpec::from_entries(group, std::move(entries));
}

KernelSpec negate_kernel(const Group &group, const KernelSpec &k) {
  auto entries = k.entries();
  for (auto &e : entries)
    e.second = -e.second;
  return KernelSpec::from_entries(group, std::move(entries));
}

Operator make_operator(const Settings &s, const Built *built) {
  Operator op;
  op.type = s.choice("operator.type", {"adjacency", "laplacian", "kernel", "percolation", "random", "matrix"});
  op.negate = s.boolean_or("operator.negate", false);
  if (op.type == "matrix") {
    std::istringstream in(read_file(s.text("operator.path")));
    op.matrix = read_matrix(in);
    if (op.negate)
      op.matrix = op.matrix->negated();
    return op;
  }
  if (!built || !built->approx)
    throw InvalidArgument("operator.type = " + op.type + " needs a builder section");
  const auto &group = built->approx->group();
  op.anchor = parse_anchor_rule(s.text_or("operator.anchor", built->quotient ? "covering" : "third"));
  if (op.type == "adjacency" || op.type == "laplacian" || op.type == "kernel") {
    auto k = op.type == "adjacency"   ? KernelSpec::adjacency(group)
             : op.type == "laplacian" ? KernelSpec::laplacian(group)
                                      : parse_kernel(group, s.text("operator.entries"));
    op.kernel = op.negate ? negate_kernel(group, k) : k;
    return op;
  }
  if (op.type == "percolation") {
    const double q = s.real("operator.q");
    std::vector<std::pair<GroupElement, double>> profile;
    for (Label x = 0; x < group.rank(); ++x)
      profile.emplace_back(group.generator(x), q);
    op.random = percolation_spec(group, profile, s.real_or("operator.alpha", 1.0));
  } else {
    RandomHamiltonianSpec spec;
    spec.alpha = s.real_or("operator.alpha", 0.0);
    if (s.has("operator.edges"))
      for (const auto &item : split(s.text("operator.edges"), ';')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          throw InvalidArgument("edge law '" + item + "' must look like word:law");
        spec.edge_law.emplace_back(group.parse(Settings::trim(item.substr(0, colon))),
                                   Distribution::parse(Settings::trim(item.substr(colon + 1))));
      }
    if (s.has("operator.diag"))
      spec.diag_law = Distribution::parse(s.text("operator.diag"));
    spec.normalize(group);
    op.random = spec;
  }
  op.random->rho = parse_rho(s, group);
  return op;
}

void check_dense(const Settings &s, std::size_t n) {
  const auto cap = static_cast<std::size_t>(s.integer_or("caps.max_dense", static_cast<long long>(kDenseCap)));
  if (cap > kDenseCap)
    throw InvalidArgument("caps.max_dense cannot exceed " + std::to_string(kDenseCap));
  if (n > cap)
    throw ResourceLimit("matrix dimension " + std::to_string(n) + " exceeds caps.max_dense = " +
                        std::to_string(cap));
}

std::uint64_t require_seed(const Settings &s) {
  if (!s.has("seed"))
    throw InvalidArgument("random operators need a seed");
  return s.unsigned64("seed");
}

/// One realization; random operators use the seed of ensemble sample 0.
SymmetricMatrix realize(const Settings &s, const Operator &op, const Built &built) {
  if (op.matrix) {
    check_dense(s, op.matrix->size());
    return *op.matrix;
  }
  check_dense(s, built.approx->vertex_count());
  if (op.kernel)
    return assemble_deterministic(*built.approx, *op.kernel, op.anchor);
  auto m = sample_random_hamiltonian(*built.approx, *op.random, ensemble_seed(require_seed(s), 0));
  return op.negate ? m.negated() : m;
}

// ---------------------------------------------------------------------------
// References and curve output

std::optional<ReferenceIDS> make_reference(const Settings &s, const Operator *op, const Built *built) {
  const auto type = s.has("reference.type") ? s.choice("reference.type", {"none", "mckay", "torus", "tabulated"})
                                            : std::string("none");
  if (type == "none")
    return std::nullopt;
  if (type == "mckay") {
    int rank = 0;
    if (s.has("reference.s"))
      rank = s.bounded("reference.s", 2, 26);
    else if (built && built->approx && built->approx->group().kind() == GroupKind::Free)
      rank = built->approx->group().rank();
    else
      throw InvalidArgument("mckay reference needs reference.s or a free group");
    if (rank < 2)
      throw InvalidArgument("mckay reference needs rank >= 2");
    return ReferenceIDS::mckay(rank);
  }
  if (type == "tabulated") {
    std::istringstream in(read_file(s.text("reference.path")));
    return ReferenceIDS::tabulated(read_csv(in), "tabulated " + s.text("reference.path"));
  }
  if (!op || !op->kernel || !built || !built->approx)
    throw InvalidArgument("torus reference needs a deterministic kernel on Z^d");
  return ReferenceIDS::torus(built->approx->group(), *op->kernel, s.bounded("reference.L", 1, 1 << 24));
}

Curve sample_reference(const ReferenceIDS &ref, bool density, std::size_t points = 801) {
  const auto [lo, hi] = ref.support();
  Curve c;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    c.lambda.push_back(x);
    c.value.push_back(density ? ref.density(x).value_or(0.0) : ref(x));
  }
  return c;
}

std::string csv_of(const StepFunction &f) {
  std::ostringstream os;
  write_csv(os, f);
  return os.str();
}

std::string csv_of(const Curve &c) {
  std::ostringstream os;
  write_csv(os, c);
  return os.str();
}

std::pair<double, double> plot_range(const Settings &s, const std::vector<const StepFunction *> &fs,
                                     const std::optional<ReferenceIDS> &ref) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto *f : fs)
    if (f->size()) {
      lo = std::min(lo, f->jumps().front());
      hi = std::max(hi, f->jumps().back());
    }
  if (ref) {
    const auto [a, b] = ref->support();
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  if (!std::isfinite(lo)) {
    lo = -1;
    hi = 1;
  }
  const double pad = std::max(0.05 * (hi - lo), 0.5);
  lo = s.real_or("plot.xmin", lo - pad);
  hi = s.real_or("plot.xmax", hi + pad);
  if (!(hi > lo))
    throw InvalidArgument("plot.xmax must exceed plot.xmin");
  return {lo, hi};
}

PlotCurve step_curve(const StepFunction &f, std::string label, std::string color) {
  PlotCurve c;
  c.label = std::move(label);
  c.color = std::move(color);
  c.steps = true;
  c.base = f.base();
  c.x = f.jumps();
  c.y = f.values();
  return c;
}

std::string curve_plot(const Settings &s, const StepFunction &f, const std::string &label,
                       const std::optional<ReferenceIDS> &ref, const std::string &default_title,
                       const StepFunction *other = nullptr) {
  PlotSpec plot;
  std::vector<const StepFunction *> fs{&f};
  if (other)
    fs.push_back(other);
  std::tie(plot.xmin, plot.xmax) = plot_range(s, fs, ref);
  plot.title = s.text_or("plot.title", default_title);
  plot.curves.push_back(step_curve(f, label, "blue"));
  if (other)
    plot.curves.push_back(step_curve(*other, "other", "red"));
  if (ref) {
    if (ref->steps()) {
      plot.curves.push_back(step_curve(*ref->steps(), "reference IDS (" + ref->tag() + ")", "red"));
    } else {
      const auto ids = sample_reference(*ref, false);
      plot.curves.push_back({"reference IDS (" + ref->tag() + ")", "red", false, 0.0, ids.lambda, ids.value});
      const auto dens = sample_reference(*ref, true);
      plot.curves.push_back({"density of states", "green", false, 0.0, dens.lambda, dens.value});
      for (double v : dens.value)
        plot.ymax = std::max(plot.ymax, 1.05 * v);
    }
  }
  return render_svg(plot);
}

ojson ks_json(const KsResult &r) { return ojson{{"ks", r.ks}, {"lambda_star", r.lambda_star}}; }

ojson header(const std::string &command, const Settings &s) {
  ojson j;
  j["command"] = command;
  j["seed"] = s.has("seed") ? ojson(s.unsigned64("seed")) : ojson(nullptr);
  j["config_hash"] = config_hash(s.map());
  return j;
}

std::string resolvent_csv(const StepFunction &f, const std::optional<ReferenceIDS> &ref, double lo, double hi) {
  std::ostringstream os;
  os << "x,eta,re,im" << (ref ? ",ref_re,ref_im" : "") << "\n";
  for (double eta : {1.0, 0.5})
    for (int i = 0; i <= 20; ++i) {
      const double x = lo + (hi - lo) * i / 20.0;
      const std::complex<double> z(x, eta);
      const auto g = stieltjes_trace(f, z);
      os << num(x) << ',' << num(eta) << ',' << num(g.real()) << ',' << num(g.imag());
      if (ref) {
        const auto r = reference_stieltjes(*ref, z);
        os << ',' << num(r.real()) << ',' << num(r.imag());
      }
      os << "\n";
    }
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_build(const Settings &s, const Output &out, std::ostream &log) {
  const auto built = make_approx(s);
  const auto &a = *built.approx;
  std::optional<int> max_radius;
  if (s.has("verify.max_radius"))
    max_radius = s.bounded("verify.max_radius", 0, 1000);
  const auto rep = verify_sofic(a, a.group(), max_radius);
  bool pass = rep.all_pass();
  std::size_t failures = 0;
  for (bool b : rep.s1_pass)
    failures += !b;
  std::ostringstream g, ap;
  write_graph(g, a.graph());
  write_sofic(ap, a);
  out.write("graph.txt", g.str());
  out.write("approx.txt", ap.str());

  auto j = header("build", s);
  j["construction"] = a.construction();
  j["vertices"] = rep.vertex_count;
  j["radius"] = rep.radius;
  j["girth"] = rep.girth == kInfiniteGirth ? ojson(nullptr) : ojson(rep.girth);
  j["girth_log_ratio"] = rep.girth_log_ratio;
  j["s1_pass"] = failures == 0;
  j["s1_failures"] = failures;
  j["s2_ratio"] = rep.s2_ratio;
  j["epsilon"] = rep.epsilon;
  j["r_star"] = rep.r_star;
  if (s.has("verify.epsilon")) {
    const double eps = s.real("verify.epsilon");
    const bool ok = rep.s2_ratio >= 1.0 - eps;
    j["s2_pass"] = ok;
    pass = pass && ok;
  }
  j["checks_pass"] = pass;
  out.write_json("verify.json", j);
  log << a.construction() << ": " << rep.vertex_count << " vertices, girth "
      << (rep.girth == kInfiniteGirth ? std::string("inf") : std::to_string(rep.girth)) << ", r* = " << rep.r_star
      << ", |V0|/|V| = " << rep.s2_ratio << "\n";
  return pass ? kOk : kChecksFailed;
}

struct Prepared {
  Built built;
  Operator op;
};

Prepared prepare(const Settings &s) {
  Prepared p;
  const bool from_matrix = s.has("operator.type") && s.text("operator.type") == "matrix";
  if (!from_matrix || s.has("builder.type"))
    p.built = make_approx(s);
  p.op = make_operator(s, p.built.approx ? &p.built : nullptr);
  return p;
}

void describe(ojson &j, const Prepared &p) {
  if (p.built.approx) {
    j["construction"] = p.built.approx->construction();
    j["vertices"] = p.built.approx->vertex_count();
    j["radius"] = p.built.approx->radius();
  }
  j["operator"] = p.op.type;
  if (p.op.kernel)
    j["anchor"] = to_string(p.op.anchor);
  j["negate"] = p.op.negate;
}

int cmd_spectrum(const Settings &s, const Output &out, std::ostream &log) {
  const auto p = prepare(s);
  const auto m = realize(s, p.op, p.built);
  const auto spec = eigenvalues(m);
  std::ostringstream mt, ev;
  write_matrix(mt, m);
  for (double v : spec.values)
    ev << num(v) << "\n";
  out.write("matrix.txt", mt.str());
  out.write("eigenvalues.txt", ev.str());
  auto j = header("spectrum", s);
  describe(j, p);
  j["n"] = spec.size();
  j["min"] = spec.size() ? ojson(spec.values.front()) : ojson(nullptr);
  j["max"] = spec.size() ? ojson(spec.values.back()) : ojson(nullptr);
  j["trace"] = m.trace();
  j["backward_error"] = spec.backward_error;
  out.write_json("report.json", j);
  log << spec.size() << " eigenvalues, backward error " << spec.backward_error << "\n";
  return kOk;
}

int cmd_ids(const Settings &s, const Output &out, std::ostream &log) {
  const auto p = prepare(s);
  const auto ref = make_reference(s, &p.op, &p.built);
  const auto spec = eigenvalues(realize(s, p.op, p.built));
  const auto f = counting_function(spec);
  out.write("ecdf.csv", csv_of(f));
  auto j = header("ids", s);
  describe(j, p);
  j["n"] = spec.size();
  j["backward_error"] = spec.backward_error;
  if (ref) {
    out.write("reference.csv", ref->steps() ? csv_of(*ref->steps()) : csv_of(sample_reference(*ref, false)));
    const auto ks = ks_distance(f, *ref);
    auto kj = ks_json(ks);
    kj["reference"] = ref->tag();
    out.write_json("ks.json", kj);
    j["reference"] = ref->tag();
    j["ks"] = ks.ks;
    j["lambda_star"] = ks.lambda_star;
    log << "KS distance to " << ref->tag() << ": " << ks.ks << " at " << ks.lambda_star << "\n";
  }
  const auto [lo, hi] = plot_range(s, {&f}, ref);
  out.write("resolvent.csv", resolvent_csv(f, ref, lo, hi));
  out.write("plot.svg", curve_plot(s, f, "eigenvalue counting function", ref,
                                   p.built.approx ? p.built.approx->construction() : "matrix"));
  out.write_json("report.json", j);
  return kOk;
}

int cmd_compare(const Settings &s, const Output &out, std::ostream &log) {
  std::istringstream in(read_file(s.text("compare.input")));
  const auto f = read_csv(in);
  auto j = header("compare", s);
  j["input"] = s.text("compare.input");
  KsResult ks;
  std::optional<ReferenceIDS> ref;
  std::optional<StepFunction> other;
  if (s.has("compare.other")) {
    if (s.has("reference.type") && s.text("reference.type") != "none")
      throw InvalidArgument("compare.other and reference.type are exclusive");
    std::istringstream oin(read_file(s.text("compare.other")));
    other = read_csv(oin);
    ks = ks_distance(f, *other);
    j["other"] = s.text("compare.other");
  } else {
    if (s.has("reference.type") && s.text("reference.type") == "torus")
      throw InvalidArgument("compare supports mckay and tabulated references");
    ref = make_reference(s, nullptr, nullptr);
    if (!ref)
      throw InvalidArgument("compare needs compare.other or a reference");
    ks = ks_distance(f, *ref);
    j["reference"] = ref->tag();
  }
  j["ks"] = ks.ks;
  j["lambda_star"] = ks.lambda_star;
  out.write_json("ks.json", ks_json(ks));
  out.write_json("report.json", j);
  out.write("plot.svg", curve_plot(s, f, "input", ref, "comparison", other ? &*other : nullptr));
  log << "KS distance " << ks.ks << " at " << ks.lambda_star << "\n";
  return kOk;
}

EnsembleResult ensemble_for(const Settings &s, const Prepared &p) {
  if (!p.op.is_random())
    throw InvalidArgument("ensembles need operator.type = percolation or random");
  const auto M = s.integer("ensemble.M");
  if (M < 1 || M > 1000000)
    throw InvalidArgument("ensemble.M must lie in [1, 1000000]");
  check_dense(s, p.built.approx->vertex_count());
  auto ens = run_ensemble(*p.built.approx, *p.op.random, static_cast<std::size_t>(M), require_seed(s), p.op.negate);
  if (p.op.negate) {
    for (std::size_t m = 0; m < ens.samples.size(); ++m) {
      auto v = ens.spectra[m].values;
      for (auto &x : v)
        x = -x;
      std::reverse(v.begin(), v.end());
      ens.samples[m] = counting_function(spectrum_from_values(std::move(v)));
    }
    ens.mean = average(ens.samples);
    ens.stddev = pointwise_stddev(ens.samples);
  }
  ens.spectra.clear();
  return ens;
}

int run_random(const std::string &command, const Settings &s, const Output &out, std::ostream &log) {
  const auto p = prepare(s);
  const auto ref = make_reference(s, &p.op, &p.built);
  const auto ens = ensemble_for(s, p);

  std::ostringstream samples;
  samples << "sample_id,lambda,value\n";
  for (std::size_t m = 0; m < ens.samples.size(); ++m) {
    const auto &f = ens.samples[m];
    for (std::size_t k = 0; k < f.size(); ++k)
      samples << m << ',' << num(f.jumps()[k]) << ',' << num(f.values()[k]) << "\n";
  }
  out.write("samples.csv", samples.str());
  out.write("mean.csv", csv_of(ens.mean));
  out.write("stddev.csv", csv_of(ens.stddev));

  auto j = header(command, s);
  describe(j, p);
  const auto rv = p.op.random->rho.at(std::max(p.built.approx->radius(), 1));
  j["rho"] = rv.rho;
  j["rho_schedule"] = p.op.random->rho.to_string();
  j["rho_deviation"] = rv.deviation;
  j["boundedness"] = to_string(boundedness_heuristic(*p.op.random));
  j["samples"] = ens.samples.size();
  if (ref) {
    const auto ks = ks_distance(ens.mean, *ref);
    j["reference"] = ref->tag();
    j["ks"] = ks.ks;
    j["lambda_star"] = ks.lambda_star;
    out.write_json("ks.json", ks_json(ks));
  }

  bool pass = true;
  const bool want = command == "concentration" || ens.samples.size() >= 30;
  if (want) {
    const auto eps = s.reals_or("concentration.eps", {0.1, 0.2});
    const int grid = s.has("concentration.grid") ? s.bounded("concentration.grid", 1, 100000) : 101;
    const auto rep =
        concentration_experiment(ens, *p.built.approx, *p.op.random, eps, static_cast<std::size_t>(grid));
    std::ostringstream rows;
    rows << "lambda,eps,empirical,bound,pass\n";
    for (const auto &r : rep.rows)
      rows << num(r.lambda) << ',' << num(r.eps) << ',' << num(r.empirical) << ',' << num(r.bound) << ','
           << (r.pass ? 1 : 0) << "\n";
    out.write("concentration.csv", rows.str());
    ojson c;
    c["n_vars"] = rep.n_vars;
    c["c"] = rep.c;
    c["slack"] = rep.slack;
    c["grid_points"] = rep.grid.size();
    c["atoms"] = rep.atoms;
    ojson per = ojson::array();
    for (double e : rep.eps) {
      double worst = 0.0, bound = 0.0;
      bool ok = true;
      for (const auto &r : rep.rows)
        if (r.eps == e) {
          worst = std::max(worst, r.empirical);
          bound = r.bound;
          ok = ok && r.pass;
        }
      per.push_back(ojson{{"eps", e}, {"bound", bound}, {"max_fraction", worst}, {"pass", ok}});
      log << "eps " << e << ": max empirical fraction " << worst << ", bound " << bound << (ok ? " pass" : " FAIL")
          << "\n";
    }
    c["bounds"] = per;
    c["all_pass"] = rep.all_pass;
    j["concentration"] = c;
    pass = rep.all_pass;
  } else {
    j["concentration"] = nullptr;
  }
  out.write_json("report.json", j);
  out.write("plot.svg", curve_plot(s, ens.mean, "mean counting function", ref,
                                   p.built.approx->construction() + ", M = " + std::to_string(ens.samples.size())));
  log << ens.samples.size() << " samples of " << p.built.approx->vertex_count() << " vertices\n";
  return pass ? kOk : kChecksFailed;
}

int dispatch(const std::string &command, const Settings &s, const Output &out, std::ostream &log) {
  if (command == "build")
    return cmd_build(s, out, log);
  if (command == "spectrum")
    return cmd_spectrum(s, out, log);
  if (command == "ids")
    return cmd_ids(s, out, log);
  if (command == "compare")
    return cmd_compare(s, out, log);
  if (command == "concentration" && !s.has("ensemble.M"))
    throw InvalidArgument("config key 'ensemble.M' is required");
  return run_random(command, s, out, log);
}

// ---------------------------------------------------------------------------
// Argument handling

struct Flags {
  std::string config;
  std::vector<std::string> set;
  std::vector<std::string> folner, free_perm, torus, reference;
  std::vector<std::string> lambda;
  std::string approx, matrix, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool negate = false;
};

std::map<std::string, std::string> key_values(const std::vector<std::string> &tokens, const std::string &flag,
                                              const std::vector<std::string> &allowed) {
  std::map<std::string, std::string> out;
  for (const auto &t : tokens) {
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(flag + ": expected key=value, got '" + t + "'");
    const auto k = t.substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw InvalidArgument(flag + ": unknown key '" + k + "'");
    out[k] = t.substr(eq + 1);
  }
  return out;
}

std::string need(const std::map<std::string, std::string> &kv, const std::string &flag, const std::string &k) {
  const auto it = kv.find(k);
  if (it == kv.end())
    throw InvalidArgument(flag + " needs " + k + "=...");
  return it->second;
}

ConfigMap merge(const Flags &f) {
  ConfigMap cfg;
  if (!f.config.empty())
    cfg = flatten_json(read_file(f.config));
  if (!f.folner.empty()) {
    const auto kv = key_values(f.folner, "--folner", {"d", "L", "r"});
    cfg["group.type"] = "abelian";
    cfg["group.rank"] = need(kv, "--folner", "d");
    cfg["builder.type"] = "folner";
    cfg["builder.L"] = need(kv, "--folner", "L");
    cfg["builder.r"] = need(kv, "--folner", "r");
  }
  if (!f.torus.empty()) {
    const auto kv = key_values(f.torus, "--torus", {"d", "L", "radius"});
    cfg["group.type"] = "abelian";
    cfg["group.rank"] = need(kv, "--torus", "d");
    cfg["builder.type"] = "torus";
    cfg["builder.L"] = need(kv, "--torus", "L");
    if (kv.count("radius"))
      cfg["builder.radius"] = kv.at("radius");
  }
  if (!f.free_perm.empty()) {
    const auto kv = key_values(f.free_perm, "--free-perm", {"s", "n", "variant", "radius"});
    cfg["group.type"] = "free";
    cfg["group.rank"] = need(kv, "--free-perm", "s");
    cfg["builder.type"] = "free-perm";
    cfg["builder.n"] = need(kv, "--free-perm", "n");
    cfg["builder.variant"] = need(kv, "--free-perm", "variant");
    if (kv.count("radius"))
      cfg["builder.radius"] = kv.at("radius");
  }
  if (!f.lambda.empty()) {
    const auto kv = key_values({f.lambda.begin() + 1, f.lambda.end()}, "--lambda", {"s", "radius"});
    cfg["group.type"] = "free";
    cfg["group.rank"] = kv.count("s") ? kv.at("s") : "2";
    cfg["builder.type"] = "lambda";
    cfg["builder.lambda"] = f.lambda.front();
    if (kv.count("radius"))
      cfg["builder.radius"] = kv.at("radius");
  }
  if (!f.approx.empty()) {
    cfg["builder.type"] = "file";
    cfg["builder.path"] = f.approx;
  }
  if (!f.matrix.empty()) {
    cfg["operator.type"] = "matrix";
    cfg["operator.path"] = f.matrix;
  }
  if (!f.reference.empty()) {
    cfg["reference.type"] = f.reference.front();
    for (const auto &[k, v] : key_values({f.reference.begin() + 1, f.reference.end()}, "--reference",
                                         {"s", "L", "path"}))
      cfg["reference." + k] = v;
  }
  for (const auto &item : f.set) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidArgument("--set expects key=value, got '" + item + "'");
    cfg[item.substr(0, eq)] = item.substr(eq + 1);
  }
  if (f.seed)
    cfg["seed"] = std::to_string(*f.seed);
  if (f.threads)
    cfg["threads"] = std::to_string(*f.threads);
  if (!f.out.empty())
    cfg["output"] = f.out;
  if (f.negate)
    cfg["operator.negate"] = "true";
  return cfg;
}

void validate_keys(const std::string &command, const ConfigMap &cfg) {
  const auto allowed = keys_for(command);
  for (const auto &[k, v] : cfg)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw InvalidArgument("unknown config key '" + k + "' for command '" + command + "'");
}

std::string key_help(const std::string &command) {
  std::string text = "Config keys (JSON file via --config, nested objects flatten to dotted keys; flags override):\n";
  const unsigned bit = command_bit(command);
  for (const auto &k : config_keys())
    if (k.commands & bit) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "  %-20s %s\n", k.name.c_str(), k.help.c_str());
      text += buf;
    }
  text += "Exit codes: 0 ok, 1 checks failed, 2 config error, 3 resource cap, 4 numeric failure.";
  return text;
}

void add_flags(CLI::App *sub, Flags &f) {
  sub->add_option("-c,--config", f.config, "JSON config file");
  sub->add_option("--set", f.set, "key=value overrides")->expected(1, -1);
  sub->add_option("--folner", f.folner, "Z^d box: d=.. L=.. r=..")->expected(1, -1);
  sub->add_option("--torus", f.torus, "Z^d torus quotient: d=.. L=.. [radius=..]")->expected(1, -1);
  sub->add_option("--free-perm", f.free_perm, "permutation quotient of F_s: s=.. n=.. variant=plain|tilde")
      ->expected(1, -1);
  sub->add_option("--lambda", f.lambda, "Lambda-set quotient of F_s: WORDS [s=2] [radius=..]")->expected(1, -1);
  sub->add_option("--approx", f.approx, "approximation file written by build");
  sub->add_option("--matrix", f.matrix, "matrix file");
  sub->add_option("--reference", f.reference, "none|mckay|torus|tabulated [s=..] [L=..] [path=..]")
      ->expected(1, -1);
  sub->add_option("--seed", f.seed, "seed");
  sub->add_option("--threads", f.threads, "worker threads");
  sub->add_option("--out", f.out, "output directory");
  sub->add_flag("--negate", f.negate, "flip the sign of the operator");
}

void write_error(const fs::path &dir, const std::string &kind, const std::string &message, int code,
                 std::ostream &err) {
  err << "error (" << kind << "): " << message << "\n";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    return;
  std::ofstream os(dir / "error.json");
  os << ojson{{"error", kind}, {"message", message}, {"exit_code", code}}.dump(2) << "\n";
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Sofic approximations, finite-volume operators and their integrated density of states."};
  app.require_subcommand(1, 1);
  Flags flags;
  const std::vector<std::string> about{
      "build an approximation, write graph.txt, approx.txt and verify.json",
      "assemble or sample one operator and write its eigenvalues",
      "eigenvalue counting function against a reference: ecdf.csv, ks.json, plot.svg",
      "KS distance between a counting-function csv and a reference or a second csv",
      "Monte Carlo ensemble of a random operator; concentration report when M >= 30",
      "ensemble plus the bounded-differences concentration check",
  };
  for (std::size_t i = 0; i < command_names().size(); ++i) {
    auto *sub = app.add_subcommand(command_names()[i], about[i]);
    add_flags(sub, flags);
    sub->footer(key_help(command_names()[i]));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  fs::path dir = flags.out.empty() ? fs::path("sofic-out") : fs::path(flags.out);
  try {
    const auto cfg = merge(flags);
    validate_keys(command, cfg);
    const Settings s(cfg);
    dir = s.text_or("output", "sofic-out");
    set_worker_threads(s.has("threads") ? s.bounded("threads", 1, 1024) : 1);
    fs::create_directories(dir);
    const Output o(dir);
    const auto t0 = std::chrono::steady_clock::now();
    const int code = dispatch(command, s, o, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.write("timing.txt", command + " seconds " + fixed(secs, 3) + "\n");
    return code;
  } catch (const InvalidArgument &e) {
    write_error(dir, "config", e.what(), kConfigError, err);
    return kConfigError;
  } catch (const ResourceLimit &e) {
    write_error(dir, "resource", e.what(), kResourceLimit, err);
    return kResourceLimit;
  } catch (const std::bad_alloc &) {
    write_error(dir, "resource", "out of memory", kResourceLimit, err);
    return kResourceLimit;
  } catch (const NumericFailure &e) {
    write_error(dir, "numeric", e.what(), kNumericFailure, err);
    return kNumericFailure;
  } catch (const fs::filesystem_error &e) {
    write_error(dir, "config", e.what(), kConfigError, err);
    return kConfigError;
  } catch (const std::exception &e) {
    write_error(dir, "internal", e.what(), kNumericFailure, err);
    return kNumericFailure;
  }
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  std::vector<const char *> argv;
  argv.push_back("sofic");
  for (const auto &a : args)
    argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace sofic::cli
