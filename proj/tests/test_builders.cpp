#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "sofic/builders.hpp"
#include "sofic/errors.hpp"

using namespace sofic;

namespace {

const Group F2 = Group::free(2);

std::string image_of(const Group &g, const CayleyBall &ball, const Permutation &p, const char *w) {
  const auto idx = ball.index.at(g.parse(w));
  return g.format(ball.elements[p(static_cast<std::uint32_t>(idx))]);
}

std::string image_of(const Group &g, const LambdaSet &lam, const Permutation &p, const char *w) {
  const auto idx = *lam.index(g.parse(w));
  return g.format(lam.words()[p(static_cast<std::uint32_t>(idx))]);
}

PermGroupApprox lambda_group(const char *words) {
  const auto lam = LambdaSet::parse(F2, words);
  return generate_perm_group(free_perm_lambda_generators(F2, lam), standard_inverse(2));
}

// Erosion oracle: x is good iff x - k stays in the box for every |k|_1 <= r.
std::size_t eroded_count(int d, int L, int r) {
  std::size_t n = 1;
  for (int i = 0; i < d; ++i)
    n *= static_cast<std::size_t>(L);
  std::size_t good = 0;
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<int> x(static_cast<std::size_t>(d));
    auto rest = v;
    for (auto &c : x) {
      c = static_cast<int>(rest % static_cast<std::size_t>(L));
      rest /= static_cast<std::size_t>(L);
    }
    bool ok = true;
    for (int i = 0; i < d && ok; ++i)
      for (int k = -r; k <= r; ++k) {
        const int y = x[static_cast<std::size_t>(i)] - k;
        if (y < 0 || y >= L)
          ok = false;
      }
    good += ok;
  }
  return good;
}

} // namespace

TEST_CASE("p_a on B_1") {
  const auto ball = cayley_ball(F2, 1);
  const auto p = free_perm(F2, ball, 0, FreePermVariant::Plain);
  CHECK(image_of(F2, ball, p, "e") == "a");
  CHECK(image_of(F2, ball, p, "a") == "A");
  CHECK(image_of(F2, ball, p, "A") == "e");
  CHECK(image_of(F2, ball, p, "b") == "B");
  CHECK(image_of(F2, ball, p, "B") == "b");
}

TEST_CASE("tilde p_a on B_1") {
  const auto ball = cayley_ball(F2, 1);
  const auto p = free_perm(F2, ball, 0, FreePermVariant::Tilde);
  CHECK(image_of(F2, ball, p, "e") == "a");
  CHECK(image_of(F2, ball, p, "a") == "A");
  CHECK(image_of(F2, ball, p, "A") == "e");
  CHECK(image_of(F2, ball, p, "b") == "b");
  CHECK(image_of(F2, ball, p, "B") == "B");
}

TEST_CASE("orbit of the empty word under p_x has length 2n+1") {
  for (int s : {2, 3})
    for (int n = 1; n <= 3; ++n) {
      const auto g = Group::free(s);
      const auto ball = cayley_ball(g, n);
      for (Label x = 0; x < g.label_count(); ++x)
        for (auto variant : {FreePermVariant::Plain, FreePermVariant::Tilde}) {
          const auto p = free_perm(g, ball, x, variant);
          std::uint32_t v = 0;
          int len = 0;
          do {
            v = p(v);
            ++len;
          } while (v != 0);
          CHECK(len == 2 * n + 1);
        }
    }
}

TEST_CASE("sign laws") {
  for (int s : {2, 3})
    for (int n : {1, 2}) {
      const auto g = Group::free(s);
      const auto ball = cayley_ball(g, n);
      const int plain = (n * (s - 1)) % 2 ? -1 : 1;
      const int tilde = ((n - 1) * (s - 1)) % 2 ? -1 : 1;
      for (Label x = 0; x < g.label_count(); ++x) {
        CHECK(free_perm(g, ball, x, FreePermVariant::Plain).sign() == plain);
        CHECK(free_perm(g, ball, x, FreePermVariant::Tilde).sign() == tilde);
      }
    }
  // Cycle decompositions for s = 2: p_a^(1) = (e a A)(b B), tilde p_a^(2) per cycle count.
  const auto b1 = cayley_ball(F2, 1);
  const auto p = free_perm(F2, b1, 0, FreePermVariant::Plain);
  CHECK(p.cycles().size() == 2);
  const auto b2 = cayley_ball(F2, 2);
  CHECK(free_perm(F2, b2, 0, FreePermVariant::Tilde).sign() == -1);
}

TEST_CASE("inverse labels give inverse permutations") {
  for (int n = 1; n <= 3; ++n) {
    const auto ball = cayley_ball(F2, n);
    for (auto variant : {FreePermVariant::Plain, FreePermVariant::Tilde})
      for (Label x = 0; x < 4; ++x)
        CHECK(free_perm(F2, ball, F2.inverse_label(x), variant) ==
              free_perm(F2, ball, x, variant).inverse());
  }
  const auto lam = LambdaSet::parse(F2, "e,a,b,A,B,ab,ba");
  for (Label x = 0; x < 4; ++x)
    CHECK(free_perm_lambda(F2, lam, F2.inverse_label(x)) == free_perm_lambda(F2, lam, x).inverse());
}

TEST_CASE("Lambda permutations on {e,a,b,A,B,ab,ba}") {
  const auto lam = LambdaSet::parse(F2, "e,a,b,A,B,ab,ba");
  const auto pa = free_perm_lambda(F2, lam, 0);
  const auto pb = free_perm_lambda(F2, lam, 1);
  CHECK(image_of(F2, lam, pa, "e") == "a");
  CHECK(image_of(F2, lam, pa, "a") == "A");
  CHECK(image_of(F2, lam, pa, "A") == "e");
  CHECK(image_of(F2, lam, pa, "b") == "ab");
  CHECK(image_of(F2, lam, pa, "ab") == "b");
  CHECK(image_of(F2, lam, pa, "ba") == "ba");
  CHECK(image_of(F2, lam, pa, "B") == "B");
  CHECK(image_of(F2, lam, pb, "e") == "b");
  CHECK(image_of(F2, lam, pb, "b") == "B");
  CHECK(image_of(F2, lam, pb, "B") == "e");
  CHECK(image_of(F2, lam, pb, "a") == "ba");
  CHECK(image_of(F2, lam, pb, "ba") == "a");
  CHECK(image_of(F2, lam, pb, "ab") == "ab");
  CHECK(image_of(F2, lam, pb, "A") == "A");
  CHECK(lambda_backtrack(F2, lam, 1, F2.parse("b")) == 2);
  CHECK(lambda_backtrack(F2, lam, 1, F2.parse("ab")) == 0);
}

TEST_CASE("Lambda = B_n agrees with tilde except on words starting with x") {
  for (int n : {1, 2}) {
    const auto ball = cayley_ball(F2, n);
    const auto lam = LambdaSet::ball(F2, n);
    for (Label x = 0; x < 4; ++x) {
      const auto pl = free_perm_lambda(F2, lam, x);
      const auto pt = free_perm(F2, ball, x, FreePermVariant::Tilde);
      for (std::size_t i = 0; i < ball.elements.size(); ++i) {
        const auto &w = ball.elements[i];
        const bool leaves = F2.length(F2.left_multiply(x, w)) > n;
        const bool starts_x = !w.data.empty() && w.data.front() == x;
        const bool power = std::all_of(w.data.begin(), w.data.end(), [&](int l) { return l == x; });
        if (!(leaves && starts_x) || power)
          CHECK(pl(static_cast<std::uint32_t>(i)) == pt(static_cast<std::uint32_t>(i)));
      }
    }
  }
}

TEST_CASE("LambdaSet validation") {
  CHECK_THROWS_AS(LambdaSet::parse(F2, "a,b"), InvalidArgument);
  CHECK_THROWS_AS(LambdaSet::parse(F2, "e,a,a"), InvalidArgument);
  CHECK_THROWS_AS(LambdaSet::parse(F2, "e,ab"), InvalidArgument);
  CHECK_THROWS_AS(LambdaSet::parse(F2, "e,,a"), InvalidArgument);
  CHECK_THROWS_AS(LambdaSet::parse(Group::abelian(2), "e,a"), InvalidArgument);
  const auto lam = LambdaSet::parse(F2, "e, a ,aa");
  CHECK(lam.size() == 3);
  CHECK(lam.to_string(F2) == "e,a,aa");
}

TEST_CASE("figure family orders and girths") {
  const auto h60 = generate_perm_group(free_perm_generators(F2, 1, FreePermVariant::Tilde), standard_inverse(2));
  const auto h120 = generate_perm_group(free_perm_generators(F2, 1, FreePermVariant::Plain), standard_inverse(2));
  const auto h720 = lambda_group("e,a,b,A,B,ab");
  const auto h2520 = lambda_group("e,a,b,A,B,ab,AB");
  const auto h5040 = lambda_group("e,a,b,A,B,ab,ba");
  CHECK(h60.order() == 60);
  CHECK(girth(h60.graph) == 3);
  CHECK(h120.order() == 120);
  CHECK(girth(h120.graph) == 6);
  CHECK(h720.order() == 720);
  CHECK(girth(h720.graph) == 3);
  CHECK(h2520.order() == 2520);
  CHECK(girth(h2520.graph) == 3);
  CHECK(h5040.order() == 5040);
  CHECK(girth(h5040.graph) == 6);
  for (const auto *h : {&h60, &h120, &h720, &h2520, &h5040}) {
    CHECK(h->graph.is_label_consistent());
    CHECK(h->graph.edge_count() == 4 * h->order());
  }
  // Tilde generators with n = 1 are even, so the group sits in A_5.
  for (const auto &e : h60.elements)
    CHECK(e.sign() == 1);
}

TEST_CASE("girth bound 2n+1 for s = 3") {
  const auto g = Group::free(3);
  for (auto variant : {FreePermVariant::Plain, FreePermVariant::Tilde}) {
    const auto h = generate_perm_group(free_perm_generators(g, 1, variant), standard_inverse(3));
    CHECK(girth(h.graph) >= 3);
    const double ratio = girth(h.graph) / std::log(static_cast<double>(h.order()));
    MESSAGE("s=3 n=1 order " << h.order() << " girth/ln|H| = " << ratio);
  }
}

TEST_CASE("generate_perm_group guards") {
  const auto gens = free_perm_generators(F2, 2, FreePermVariant::Plain);
  CHECK_THROWS_AS(generate_perm_group(gens, standard_inverse(2), 10000), ResourceLimit);
  auto bad = free_perm_generators(F2, 1, FreePermVariant::Plain);
  std::swap(bad[0], bad[1]);
  CHECK_THROWS_AS(generate_perm_group(bad, {1, 0, 3, 2}), InvalidArgument);
  CHECK_THROWS_AS(generate_perm_group({Permutation({1, 0}), Permutation({0, 1, 2})}, {1, 0}),
                  InvalidArgument);
}

TEST_CASE("quotient graphs are vertex transitive up to the girth radius") {
  for (const char *words : {"e,a,b,A,B,ab", "e,a,b,A,B,ab,ba"}) {
    const auto h = lambda_group(words);
    const int r = (girth(h.graph) - 1) / 2;
    for (Vertex v = 0; v < static_cast<Vertex>(h.order()); v += 37)
      for (int k = 0; k <= r; ++k)
        CHECK(labeled_ball_isomorphic(h.graph, 0, h.graph, v, k));
  }
}

TEST_CASE("Folner boxes") {
  const auto box = build_folner_approx(2, 10, 2);
  CHECK(box.vertex_count() == 100);
  CHECK(box.good().size() == 36);
  CHECK(box.good().size() == eroded_count(2, 10, 2));
  CHECK(box.good_ratio() == doctest::Approx(0.36));
  const auto report = verify_sofic(box);
  CHECK(report.all_pass());
  CHECK(report.s1_pass.size() == 36);
  CHECK(report.r_star == 2);
  CHECK(report.girth == 4);

  const auto line = build_folner_approx(1, 5, 0);
  CHECK(line.good().size() == 5);
  CHECK(line.epsilon() == 0.0);
  CHECK(verify_sofic(line).girth == kInfiniteGirth);

  for (int d : {1, 2, 3})
    for (int L : {7, 9})
      CHECK(build_folner_approx(d, L, 2).good().size() == eroded_count(d, L, 2));

  CHECK_THROWS_AS(build_folner_approx(1, 4, 2), InvalidArgument);
  CHECK_THROWS_AS(build_folner_approx(2, 10, -1), InvalidArgument);
}

TEST_CASE("Folner defect decreases to zero") {
  for (int d : {1, 2}) {
    double prev = 1.0;
    for (int L = 5; L <= 200; L += 5) {
      const double eps = folner_defect(d, L, 2);
      CHECK(eps < prev);
      CHECK(eps == doctest::Approx(build_folner_approx(d, L, 2).epsilon()));
      prev = eps;
    }
    CHECK(prev < 0.05);
  }
}

TEST_CASE("quotient approximations") {
  const auto h120 = generate_perm_group(free_perm_generators(F2, 1, FreePermVariant::Plain), standard_inverse(2));
  const auto approx = build_quotient_approx(F2, h120, std::nullopt, "h120");
  CHECK(approx.radius() == 2);
  CHECK(approx.good_ratio() == 1.0);
  const auto rep = verify_sofic(approx);
  CHECK(rep.all_pass());
  CHECK(rep.r_star == 2);
  CHECK(rep.s2_ratio == 1.0);
  CHECK(rep.girth == 6);
  CHECK(rep.girth_log_ratio == doctest::Approx(6.0 / std::log(120.0)));

  const auto h5040 = lambda_group("e,a,b,A,B,ab,ba");
  const auto big = build_quotient_approx(F2, h5040, std::nullopt, "h5040");
  CHECK(big.radius() >= 2);
  CHECK(verify_sofic(big).r_star >= 2);

  CHECK_THROWS_AS(build_quotient_approx(F2, h120, 3, "too far"), InvalidArgument);
  const auto rep_lo = verify_sofic(build_quotient_approx(F2, h120, 1, "h120 r=1"));
  CHECK(rep_lo.r_star == 2);
}

TEST_CASE("torus quotients of Z^d") {
  const auto t = torus_group(2, 8);
  CHECK(t.order() == 64);
  const auto approx = build_quotient_approx(Group::abelian(2), t, std::nullopt, "torus");
  CHECK(approx.radius() == 3);
  CHECK(girth(t.graph) == 4);
  const auto t1 = torus_group(1, 9);
  CHECK(build_quotient_approx(Group::abelian(1), t1, std::nullopt, "ring").radius() == 3);
  CHECK(girth(t1.graph) == 9);
}

TEST_CASE("verify_sofic reports a too-large radius") {
  const auto h60 = generate_perm_group(free_perm_generators(F2, 1, FreePermVariant::Tilde), standard_inverse(2));
  // A triangle through every vertex already lies inside its radius-1 ball.
  const auto approx = build_quotient_approx(F2, h60, std::nullopt, "h60");
  CHECK(approx.radius() == 0);
  const auto box = build_folner_approx(2, 10, 2);
  const auto rep = verify_sofic(box, Group::free(2));
  CHECK_FALSE(rep.all_pass());
  CHECK(rep.r_star == 1);
}

TEST_CASE("approximation files round-trip") {
  const auto box = build_folner_approx(2, 7, 1);
  std::stringstream ss;
  write_sofic(ss, box);
  const auto text = ss.str();
  const auto back = read_sofic(ss);
  CHECK(back.graph() == box.graph());
  CHECK(back.good() == box.good());
  CHECK(back.construction() == box.construction());
  std::stringstream again;
  write_sofic(again, back);
  CHECK(again.str() == text);

  auto corrupted = text;
  const auto pos = corrupted.rfind(" e\n");
  REQUIRE(pos != std::string::npos);
  corrupted.replace(pos, 3, " a\n");
  std::istringstream bad(corrupted);
  CHECK_THROWS_AS(read_sofic(bad), InvalidArgument);
}
