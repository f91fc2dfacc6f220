#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "padiclab/balltree.hpp"
#include "padiclab/experiments.hpp"
#include "padiclab/margulis.hpp"
#include "padiclab/pointset.hpp"
#include "padiclab/rng.hpp"

using namespace padiclab;

TEST_CASE("contraction integral: constant integrand") {
  // w = (0,1,0), |lambda| = p: the expanded coordinate dominates with norm
  // p^2 everywhere, so the alpha = 1/2 moment is p^{-1}.
  double v = contraction_integral_ints(5, 0, 1, 0, 1, 0.5);
  CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("contraction integral: three-shell decomposition") {
  // w = (0,0,1), |lambda| = p: norms p^2, 1, p^{-2} on shells of mass
  // 4/5, 4/25, 1/25, so the alpha = 1/2 moment is
  // (4/5) 5^{-1} + (4/25) + (1/25) 5 = 0.52.
  double v = contraction_integral_ints(5, 0, 0, 1, 1, 0.5);
  CHECK(v == doctest::Approx(0.52).epsilon(1e-12));
}

TEST_CASE("contraction integral: alpha -> 0 gives total mass") {
  double v = contraction_integral_ints(5, 3, 7, 11, 2, 1e-12);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("contraction integral matches uniform-depth refinement") {
  struct Case {
    std::int64_t a, b, c;
    int n;
  };
  for (const Case& cs : {Case{0, 0, 1, 1}, Case{1, 2, 3, 1}, Case{5, 1, 10, 2},
                         Case{24, 15, 95, 1}, Case{2, 0, 50, 2}}) {
    double exact = contraction_integral_ints(5, cs.a, cs.b, cs.c, cs.n, 0.7);
    double d1 = contraction_integral_at_depth(5, cs.a, cs.b, cs.c, cs.n, 0.7,
                                              2 * cs.n + 5);
    double d2 = contraction_integral_at_depth(5, cs.a, cs.b, cs.c, cs.n, 0.7,
                                              2 * cs.n + 6);
    CHECK(d1 == d2);  // stabilized
    CHECK(exact == doctest::Approx(d1).epsilon(1e-12));
  }
}

TEST_CASE("contraction integral: exhaustive agreement at shallow depth") {
  // every direction class mod p at a small lambda: exact shells vs the
  // stabilized uniform grid
  for (std::uint64_t a = 0; a < 5; ++a)
    for (std::uint64_t b = 0; b < 5; ++b)
      for (std::uint64_t c = 0; c < 5; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        double exact = contraction_integral_ints(5, a, b, c, 1, 0.5);
        double grid = contraction_integral_at_depth(5, a, b, c, 1, 0.5, 8);
        CHECK(exact == doctest::Approx(grid).epsilon(1e-12));
      }
}

TEST_CASE("step size formula and verification") {
  // alpha = 1/2, C2 = 4 at p = 5: smallest m with
  // 4 * 5^{-m/8} / (5 - sqrt 5) <= 1/5, i.e. m = ceil(8 log_5(20/(5-sqrt 5))).
  int m = compute_m_alpha(5, 0.5, 4.0);
  double target = 8.0 * std::log(20.0 / (5.0 - std::sqrt(5.0))) / std::log(5.0);
  CHECK(m == static_cast<int>(std::ceil(target)));
  CHECK(m == 10);
  // monotone in alpha (alpha-hat shrinks as alpha grows)
  CHECK(compute_m_alpha(5, 0.3, 4.0) <= compute_m_alpha(5, 0.5, 4.0));
  CHECK(compute_m_alpha(5, 0.5, 4.0) <= compute_m_alpha(5, 0.7, 4.0));
  // the display itself, on the depth-1 direction grid
  double worst = contraction_worst_ratio(5, 0.5, m, 1);
  CHECK(worst <= 1.0 + 1e-9);
}

TEST_CASE("measured contraction constant covers the direction grid") {
  double c2 = measure_c2(5, 0.5, 2);
  CHECK(c2 > 0.0);
  // by construction, every grid case satisfies the bound at c2
  const std::uint64_t pm = 25;
  for (std::uint64_t a = 0; a < pm; a += 7)
    for (std::uint64_t b = 0; b < pm; b += 5)
      for (std::uint64_t c = 0; c < pm; c += 3) {
        if (a == 0 && b == 0 && c == 0) continue;
        RVec w(PAdic::integer(5, 12, static_cast<std::int64_t>(a)),
               PAdic::integer(5, 12, static_cast<std::int64_t>(b)),
               PAdic::integer(5, 12, static_cast<std::int64_t>(c)));
        PAdic lam = PAdic::rational(5, 12, 1, 5);
        CHECK_NOTHROW(contraction_integral(w, lam, 0.5, c2));
      }
}

TEST_CASE("walk atoms") {
  WalkMeasure nu{5, 3, 1};
  auto a0 = walk_convolve(nu, 0);
  REQUIRE(a0.size() == 1);
  CHECK(a0[0].rs.empty());
  CHECK(a0[0].mass == 1.0);

  auto a1 = walk_convolve(nu, 1);
  CHECK(a1.size() == 5);
  double mass = 0;
  for (const auto& a : a1) mass += a.mass;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

  auto a2 = walk_convolve(WalkMeasure{5, 3, 2}, 2);
  CHECK(a2.size() == 625);
  mass = 0;
  for (const auto& a : a2) mass += a.mass;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(walk_convolve(WalkMeasure{5, 3, 4}, 5, 1000),
                  std::invalid_argument);
  auto mc = walk_convolve(WalkMeasure{5, 3, 4}, 5, 1000,
                          MonteCarloOpts{256, 17});
  CHECK(mc.size() == 256);
}

TEST_CASE("margulis recursion on a singleton reduces to iterated integrals") {
  PointSet F(5, 3, 4, {{0, 1, 0}});
  TransverseConfig cfg{F, 0.5};
  double c2 = 4.0;
  int m = compute_m_alpha(5, 0.5, c2);
  WalkMeasure nu{5, m, 1};
  auto rep = margulis_recursion_check(cfg, nu, 1, c2);
  CHECK(rep.precondition_ok);
  CHECK(rep.pass);
  // ell = 0 value is f(e)
  CHECK(margulis_value(cfg, nu, {}) ==
        doctest::Approx(std::pow(5.0, 0.5 * 0)).epsilon(1e-12));
}

TEST_CASE("margulis recursion contracts on random configurations") {
  double c2 = measure_c2(5, 0.5, 2);
  int m = compute_m_alpha(5, 0.5, c2);
  WalkMeasure nu{5, m, 1};
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    PointSet raw = random_ball_set(seed, 5, 4, 50, 0);
    std::vector<Residues> pts;
    for (const auto& x : raw.points())
      if (!(x[0] == 0 && x[1] == 0 && x[2] == 0)) pts.push_back(x);
    TransverseConfig cfg{PointSet(5, 3, 4, std::move(pts)), 0.5};
    double prev = margulis_value(cfg, nu, {});
    for (int ell = 1; ell <= 2; ++ell) {
      auto rep = margulis_recursion_check(cfg, nu, ell, c2);
      CHECK(rep.pass);
      CHECK(rep.lhs <= prev * 0.2 * (1 + 1e-9));  // one factor of p^{-1} per step
      prev = rep.lhs;
    }
  }
}

TEST_CASE("energy equals the displaced margulis value") {
  // trivial base point: both sides are the plain energy sum
  PointSet F0 = random_ball_set(30, 5, 6, 40, 2);
  std::vector<Residues> with_zero = F0.points();
  bool has_zero = false;
  for (const auto& x : with_zero)
    if (x == Residues{0, 0, 0}) has_zero = true;
  if (!has_zero) with_zero.push_back({0, 0, 0});
  PointSet Fz(5, 3, 6, std::move(with_zero));
  auto pz = energy_vs_margulis(Fz, Residues{0, 0, 0}, 0.5);
  PBallTree tz(Fz);
  CHECK(pz.energy == energy_sum(tz, 0.5, {0, 0, 0}));
  CHECK(pz.f_model == pz.energy);

  PointSet F = random_ball_set(31, 5, 6, 80, 2);
  auto pair = energy_vs_margulis(F, F.points()[7], 0.5);
  CHECK(pair.energy == doctest::Approx(pair.f_model).epsilon(1e-12));

  // two-point configuration: both reduce to a single distance power
  PointSet two(5, 3, 6, {{25, 0, 0}, {50, 25, 0}});
  auto p2 = energy_vs_margulis(two, two.points()[0], 0.5);
  CHECK(p2.energy == doctest::Approx(p2.f_model).epsilon(1e-12));
  CHECK(p2.energy ==
        doctest::Approx(std::pow(5.0, 0.5 * 2)).epsilon(1e-12));
}
