#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sofic/cli.hpp"
#include "sofic/errors.hpp"
#include "sofic/spectral.hpp"

using namespace sofic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const auto p = fs::temp_directory_path() / "sofic-cli-test" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json json_file(const fs::path &p) { return nlohmann::json::parse(slurp(p)); }

int sofic_run(std::vector<std::string> args, std::string *stdout_text = nullptr) {
  std::ostringstream out, err;
  const int rc = cli::run(args, out, err);
  if (stdout_text)
    *stdout_text = out.str();
  return rc;
}

StepFunction csv_file(const fs::path &p) {
  std::ifstream in(p);
  return read_csv(in);
}

} // namespace

TEST_CASE("config flattening and hashing") {
  const auto a = cli::flatten_json(R"({"builder": {"type": "folner", "L": 10}, "seed": 7, "concentration": {"eps": [0.1, 0.2]}})");
  CHECK(a.at("builder.type") == "folner");
  CHECK(a.at("builder.L") == "10");
  CHECK(a.at("seed") == "7");
  CHECK(a.at("concentration.eps") == "0.1,0.2");
  const auto b = cli::flatten_json(R"({"seed": 7, "concentration": {"eps": [0.1, 0.2]}, "builder": {"L": 10, "type": "folner"}})");
  CHECK(cli::config_hash(a) == cli::config_hash(b));
  auto c = b;
  c["threads"] = "8";
  c["output"] = "elsewhere";
  CHECK(cli::config_hash(a) == cli::config_hash(c));
  c["seed"] = "8";
  CHECK(cli::config_hash(a) != cli::config_hash(c));
  CHECK(cli::config_hash(a).size() == 16);
  CHECK_THROWS_AS(cli::flatten_json("[1, 2]"), InvalidArgument);
  CHECK_THROWS_AS(cli::flatten_json("{\"a\": null}"), InvalidArgument);
  CHECK_THROWS_AS(cli::flatten_json("{oops"), InvalidArgument);
}

TEST_CASE("help lists every key of a subcommand") {
  for (const auto &cmd : cli::command_names()) {
    std::string text;
    CHECK(sofic_run({cmd, "--help"}, &text) == cli::kOk);
    for (const auto &k : cli::keys_for(cmd))
      CHECK_MESSAGE(text.find(k) != std::string::npos, cmd << " help misses " << k);
  }
  const auto build_keys = cli::keys_for("build");
  CHECK(std::find(build_keys.begin(), build_keys.end(), "ensemble.M") == build_keys.end());
}

TEST_CASE("unknown keys and bad values are config errors") {
  const auto dir = scratch("errors");
  CHECK(sofic_run({"build", "--folner", "d=2", "L=10", "r=2", "--set", "builder.colour=red", "--out", dir.string()}) ==
        cli::kConfigError);
  const auto err = json_file(dir / "error.json");
  CHECK(err["error"] == "config");
  CHECK(err["exit_code"] == 2);
  CHECK(std::string(err["message"]).find("builder.colour") != std::string::npos);
  // ensemble.M is not a build key.
  CHECK(sofic_run({"build", "--folner", "d=2", "L=10", "r=2", "--set", "ensemble.M=3", "--out", dir.string()}) ==
        cli::kConfigError);
  CHECK(sofic_run({"build", "--free-perm", "s=2", "n=1", "--out", dir.string()}) == cli::kConfigError);
  CHECK(sofic_run({"build", "--folner", "d=2", "L=ten", "r=2", "--out", dir.string()}) == cli::kConfigError);
  CHECK(sofic_run({"build", "--bogus-flag", "--out", dir.string()}) == cli::kConfigError);
  CHECK(sofic_run({"ensemble", "--folner", "d=2", "L=8", "r=3", "--set", "operator.type=percolation",
                   "operator.q=0.5", "ensemble.M=3", "--out", dir.string()}) == cli::kConfigError);
  CHECK(sofic_run({"spectrum", "--folner", "d=2", "L=8", "r=3", "--set", "operator.type=adjacency",
                   "caps.max_dense=10", "--out", dir.string()}) == cli::kResourceLimit);
  CHECK(json_file(dir / "error.json")["exit_code"] == 3);
}

TEST_CASE("build writes the graph and the verification report") {
  const auto dir = scratch("build");
  CHECK(sofic_run({"build", "--free-perm", "s=2", "n=1", "variant=plain", "--out", dir.string()}) == cli::kOk);
  const auto v = json_file(dir / "verify.json");
  CHECK(v["vertices"] == 120);
  CHECK(v["girth"] == 6);
  CHECK(v["s1_pass"] == true);
  CHECK(v["s2_ratio"] == 1.0);
  CHECK(fs::exists(dir / "graph.txt"));
  CHECK(fs::exists(dir / "approx.txt"));
  CHECK(fs::exists(dir / "timing.txt"));

  const auto fol = scratch("build-folner");
  CHECK(sofic_run({"build", "--folner", "d=2", "L=10", "r=2", "--out", fol.string()}) == cli::kOk);
  CHECK(json_file(fol / "verify.json")["s2_ratio"] == doctest::Approx(0.36).epsilon(1e-15));
  CHECK(sofic_run({"build", "--folner", "d=2", "L=10", "r=2", "--set", "verify.epsilon=0.5", "--out", fol.string()}) ==
        cli::kChecksFailed);

  // A written approximation can be read back and used.
  const auto ids = scratch("build-reuse");
  CHECK(sofic_run({"ids", "--approx", (dir / "approx.txt").string(), "--set", "operator.type=adjacency",
                   "--out", ids.string()}) == cli::kOk);
  CHECK(csv_file(ids / "ecdf.csv").size() > 1);
}

TEST_CASE("config file with flag overrides") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "run.json") << R"({"group": {"type": "abelian", "rank": 2},
    "builder": {"type": "folner", "L": 12, "r": 3}, "output": ")" << (dir / "out").string() << R"("})";
  CHECK(sofic_run({"build", "--config", (dir / "run.json").string()}) == cli::kOk);
  CHECK(json_file(dir / "out" / "verify.json")["vertices"] == 144);
  CHECK(sofic_run({"build", "--config", (dir / "run.json").string(), "--set", "builder.L=10"}) == cli::kOk);
  CHECK(json_file(dir / "out" / "verify.json")["vertices"] == 100);
}

TEST_CASE("zero matrix gives a unit step at 0") {
  const auto dir = scratch("zero");
  fs::create_directories(dir);
  std::ofstream(dir / "zero.txt") << "symmetric 3\n0\n0 0\n0 0 0\n";
  CHECK(sofic_run({"ids", "--matrix", (dir / "zero.txt").string(), "--out", dir.string()}) == cli::kOk);
  const auto f = csv_file(dir / "ecdf.csv");
  CHECK(f.jumps() == std::vector<double>{0.0});
  CHECK(f.values() == std::vector<double>{1.0});
  CHECK(fs::exists(dir / "plot.svg"));
  CHECK_FALSE(fs::exists(dir / "ks.json"));
}

TEST_CASE("ids against McKay on the 120-node quotient") {
  const auto dir = scratch("ids120");
  CHECK(sofic_run({"ids", "--free-perm", "s=2", "n=1", "variant=plain", "--set", "operator.type=adjacency",
                   "--reference", "mckay", "--out", dir.string()}) == cli::kOk);
  const auto ks = json_file(dir / "ks.json");
  // Regression value frozen from the first run.
  CHECK(double(ks["ks"]) == doctest::Approx(0.12531977072788086).epsilon(1e-9));
  CHECK(double(ks["lambda_star"]) == doctest::Approx(-2.0).epsilon(1e-9));
  const auto f = csv_file(dir / "ecdf.csv");
  CHECK(f.final_value() == 1.0);
  CHECK(slurp(dir / "resolvent.csv").rfind("x,eta,re,im,ref_re,ref_im\n", 0) == 0);

  // --negate flips the spectrum; the McKay law is symmetric.
  const auto neg = scratch("ids120neg");
  CHECK(sofic_run({"ids", "--free-perm", "s=2", "n=1", "variant=plain", "--set", "operator.type=adjacency",
                   "--negate", "--out", neg.string()}) == cli::kOk);
  const auto g = csv_file(neg / "ecdf.csv");
  CHECK(g.jumps().front() == doctest::Approx(-f.jumps().back()).epsilon(1e-12));
}

TEST_CASE("Z^1 box against the torus oracle") {
  const auto dir = scratch("torus");
  CHECK(sofic_run({"ids", "--torus", "d=1", "L=64", "--set", "operator.type=adjacency", "--reference", "torus",
                   "L=2048", "--out", dir.string()}) == cli::kOk);
  CHECK(double(json_file(dir / "ks.json")["ks"]) <= 0.05);
  const auto cmp = scratch("compare");
  CHECK(sofic_run({"compare", "--set", "compare.input=" + (dir / "ecdf.csv").string(),
                   "compare.other=" + (dir / "reference.csv").string(), "--out", cmp.string()}) == cli::kOk);
  CHECK(json_file(cmp / "ks.json")["ks"] == json_file(dir / "ks.json")["ks"]);
}

TEST_CASE("a one-sample degenerate ensemble matches ids") {
  const auto ens = scratch("ens1");
  const auto ids = scratch("ids1");
  const std::vector<std::string> common{"--folner", "d=2", "L=8", "r=3", "--set", "operator.type=percolation",
                                        "operator.q=1", "--seed", "5"};
  auto a = common;
  a.insert(a.begin(), "ensemble");
  a.insert(a.end(), {"--set", "ensemble.M=1", "--out", ens.string()});
  auto b = common;
  b.insert(b.begin(), "ids");
  b.insert(b.end(), {"--out", ids.string()});
  CHECK(sofic_run(a) == cli::kOk);
  CHECK(sofic_run(b) == cli::kOk);
  CHECK(slurp(ens / "mean.csv") == slurp(ids / "ecdf.csv"));
  CHECK(json_file(ens / "report.json")["concentration"].is_null());
}

TEST_CASE("ensembles are reproducible and report their seed") {
  const auto a = scratch("ens-a");
  const auto b = scratch("ens-b");
  const std::vector<std::string> base{"--folner", "d=2", "L=8", "r=3", "--set", "operator.type=percolation",
                                      "operator.q=0.5", "ensemble.M=30", "--seed", "7"};
  auto run_a = base;
  run_a.insert(run_a.begin(), "concentration");
  run_a.insert(run_a.end(), {"--threads", "1", "--out", a.string()});
  auto run_b = base;
  run_b.insert(run_b.begin(), "concentration");
  run_b.insert(run_b.end(), {"--threads", "4", "--out", b.string()});
  CHECK(sofic_run(run_a) == cli::kOk);
  CHECK(sofic_run(run_b) == cli::kOk);
  for (const char *f : {"samples.csv", "mean.csv", "stddev.csv", "report.json", "concentration.csv", "plot.svg"})
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  const auto rep = json_file(a / "report.json");
  CHECK(rep["seed"] == 7);
  CHECK(rep["config_hash"].get<std::string>().size() == 16);
  CHECK(rep["concentration"]["all_pass"] == true);
  CHECK(rep["concentration"]["bounds"].size() == 2);
  CHECK(slurp(a / "samples.csv").rfind("sample_id,lambda,value\n", 0) == 0);
}

TEST_CASE("svg draws exact steps") {
  cli::PlotSpec plot;
  plot.xmin = 0;
  plot.xmax = 4;
  plot.title = "a < b";
  plot.curves.push_back({"f", "blue", true, 0.0, {1, 2}, {0.5, 1.0}});
  const auto svg = cli::render_svg(plot);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("a &lt; b") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
  // Exactly M, H, V commands for a step curve.
  const auto d = svg.find("d=\"M");
  REQUIRE(d != std::string::npos);
  const auto path = svg.substr(d + 3, svg.find('"', d + 3) - d - 3);
  for (char c : path)
    CHECK((c == 'M' || c == 'H' || c == 'V' || c == ' ' || c == '.' || c == '-' || (c >= '0' && c <= '9')));
  CHECK(path == "M60.00 450.00H240.00V245.00H420.00V40.00H780.00");

  plot.curves.clear();
  CHECK_THROWS_AS(cli::render_svg(plot), InvalidArgument);
  plot.curves.push_back({"f", "blue", true, 0.0, {1}, {1}});
  plot.xmax = plot.xmin;
  CHECK_THROWS_AS(cli::render_svg(plot), InvalidArgument);
}

TEST_CASE("svg size stays small at the dense cap") {
  std::vector<double> pts(8192);
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i] = static_cast<double>(i) / 1000.0;
  const auto f = StepFunction::ecdf(pts);
  cli::PlotSpec plot;
  plot.xmin = -1;
  plot.xmax = 9;
  plot.curves.push_back({"f", "blue", true, 0.0, f.jumps(), f.values()});
  plot.curves.push_back({"g", "red", true, 0.0, f.jumps(), f.values()});
  CHECK(cli::render_svg(plot).size() < 2u * 1024 * 1024);
}
