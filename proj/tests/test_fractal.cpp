#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "padiclab/balltree.hpp"
#include "padiclab/bourgain.hpp"
#include "padiclab/experiments.hpp"
#include "padiclab/padic.hpp"
#include "padiclab/pointset.hpp"
#include "padiclab/rng.hpp"

using namespace padiclab;

namespace {

// Brute-force ball count: ||x - center|| <= p^{-k}.
std::uint32_t scan_count(const PointSet& s, const Residues& center, int k) {
  std::uint32_t n = 0;
  for (const auto& x : s.points())
    if (s.distance_valuation(x, center) >= k) ++n;
  return n;
}

}  // namespace

TEST_CASE("tree counts: singleton and full grid") {
  PointSet single(5, 3, 3, {{7, 0, 24}});
  PBallTree t1(single);
  for (int k = 0; k <= 3; ++k) CHECK(t1.ball_count({7, 0, 24}, k) == 1);

  std::vector<Residues> all;
  for (std::uint64_t a = 0; a < 5; ++a)
    for (std::uint64_t b = 0; b < 5; ++b)
      for (std::uint64_t c = 0; c < 5; ++c) all.push_back({a, b, c});
  PointSet grid(5, 3, 1, std::move(all));
  PBallTree t2(grid);
  CHECK(t2.root().count() == 125);
  CHECK(t2.ball_count({2, 3, 4}, 1) == 1);
}

TEST_CASE("tree counts match a linear scan on random sets") {
  PointSet s = random_ball_set(404, 5, 4, 1000, 0);
  PBallTree tree(s);
  CounterRng rng(405, 0);
  for (int q = 0; q < 1000; ++q) {
    Residues center{rng.next_below(625), rng.next_below(625),
                    rng.next_below(625)};
    int k = static_cast<int>(rng.next_below(5));
    CHECK(tree.ball_count(center, k) == scan_count(s, center, k));
  }
}

TEST_CASE("duplicates are rejected") {
  CHECK_THROWS_AS(PointSet(5, 3, 2, {{1, 2, 3}, {1, 2, 3}}),
                  std::invalid_argument);
}

TEST_CASE("profiles of exactly self-similar sets") {
  // full grid: ratio (b)^3 relative to b1 = 1
  std::vector<Residues> all;
  for (std::uint64_t a = 0; a < 25; ++a)
    for (std::uint64_t b = 0; b < 25; ++b)
      for (std::uint64_t c = 0; c < 25; ++c) all.push_back({a, b, c});
  PointSet grid(5, 3, 2, std::move(all));
  PBallTree tree(grid);
  auto prof = non_concentration_profile(tree, 2, 0);
  CHECK(prof.min_constant(3.0, 5) == doctest::Approx(1.0));
  CHECK(prof.fitted_alpha(5) == doctest::Approx(3.0));

  // line: ratio b, alpha = 1, D = 1
  PointSet line = axis_set(5, 3, 0, 0);
  PBallTree ltree(line);
  auto lprof = non_concentration_profile(ltree, 3, 0);
  CHECK(lprof.min_constant(1.0, 5) == doctest::Approx(1.0));
  CHECK(lprof.fitted_alpha(5) == doctest::Approx(1.0));

  // singleton: constant profile
  PointSet single(5, 3, 3, {{3, 1, 4}});
  PBallTree stree(single);
  auto sprof = non_concentration_profile(stree, 3, 0);
  CHECK(sprof.min_constant(0.0, 5) == doctest::Approx(1.0));
  CHECK(sprof.fitted_alpha(5) == doctest::Approx(0.0));
}

TEST_CASE("profile numerators never grow under subsets") {
  PointSet s = random_ball_set(77, 5, 3, 200, 0);
  PBallTree tree(s);
  auto prof = non_concentration_profile(tree, 3, 0);
  std::vector<Residues> half(s.points().begin(), s.points().begin() + 100);
  PointSet sub(5, 3, 3, std::move(half));
  PBallTree subtree(sub);
  auto subprof = non_concentration_profile(subtree, 3, 0);
  for (std::size_t i = 0; i < prof.max_counts.size(); ++i)
    CHECK(subprof.max_counts[i] <= prof.max_counts[i]);
}

TEST_CASE("energy sums: worked values") {
  // two points at distance p^{-1}
  PointSet pair(5, 3, 3, {{0, 0, 0}, {5, 0, 0}});
  PBallTree tree(pair);
  CHECK(energy_sum(tree, 0.5, {0, 0, 0}) ==
        doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));

  // full depth-1 grid: all 124 other points at distance 1
  std::vector<Residues> all;
  for (std::uint64_t a = 0; a < 5; ++a)
    for (std::uint64_t b = 0; b < 5; ++b)
      for (std::uint64_t c = 0; c < 5; ++c) all.push_back({a, b, c});
  PointSet grid(5, 3, 1, std::move(all));
  PBallTree gtree(grid);
  CHECK(energy_sum(gtree, 0.5, {0, 0, 0}) == doctest::Approx(124.0));

  // alpha -> 0 limit approaches #F - 1
  CHECK(energy_sum(gtree, 1e-9, {0, 0, 0}) ==
        doctest::Approx(124.0).epsilon(1e-6));
}

TEST_CASE("energy grows when points are added") {
  PointSet s = random_ball_set(505, 5, 3, 60, 0);
  std::vector<Residues> more = s.points();
  Residues extra{101, 17, 3};
  if (scan_count(s, extra, 3) == 0) more.push_back(extra);
  PointSet t(5, 3, 3, std::move(more));
  PBallTree st(s), tt(t);
  CHECK(energy_sum(st, 0.5, s.points()[0]) <=
        energy_sum(tt, 0.5, s.points()[0]));
}

TEST_CASE("csv round trip") {
  PointSet s = random_ball_set(606, 7, 3, 40, 0);
  PointSet back = PointSet::from_csv(s.to_csv());
  CHECK(back.size() == s.size());
  CHECK(back.prime() == 7);
  CHECK(back.depth() == 3);
  CHECK(back.points() == s.points());
}

TEST_CASE("localization and pruning on structured sets") {
  // a line through a surrounding cloud: the regular core survives
  std::vector<Residues> pts;
  const int m = 6;
  const std::uint64_t pm = pow_u64(5, m);
  for (std::uint64_t t = 0; t < pow_u64(5, 5); ++t)
    pts.push_back({(t * 5) % pm, 0, 0});
  PointSet line(5, 3, m, std::move(pts));
  auto res = bourgain_regularize(line, 0.9, 0.02, 1.5);
  REQUIRE(res.subset.has_value());
  CHECK(res.subset->size() >= 2);
  CHECK(std::isfinite(res.measured_constant));
  CHECK(res.measured_constant >= 1.0);
  // output lives in one ball of radius p^{-l1} around w0
  for (const auto& x : res.subset->points())
    CHECK(res.subset->distance_valuation(x, res.w0) >= res.l1);
}

TEST_CASE("pruning output always passes its own scan") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    PointSet F = random_regular_set(seed, 5, 6, 0.8, 500, 4000);
    if (F.size() < 5) continue;
    PBallTree tree(F);
    double D = std::max(1.0, max_energy(tree, 0.8) /
                                 std::pow(static_cast<double>(F.size()), 1.02));
    auto res = bourgain_regularize(F, 0.8, 0.02, D);
    REQUIRE(res.subset.has_value());
    PBallTree sub(*res.subset);
    auto counts = sub.max_count_per_scale();
    for (int k = 0; k <= res.scan_depth; ++k) {
      double ratio = static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                     static_cast<double>(res.subset->size());
      double bound = res.measured_constant *
                     std::pow(5.0, -res.target_exponent * (k - res.l1));
      CHECK(ratio <= bound * (1 + 1e-9));
    }
  }
}

TEST_CASE("localization picks the heavier of two separated clusters") {
  // two self-similar clusters in distant balls; the big one wins
  const int m = 6;
  const std::uint64_t pm = pow_u64(5, m);
  std::vector<Residues> pts;
  for (std::uint64_t t = 0; t < pow_u64(5, 4); ++t)
    pts.push_back({(t * 25) % pm, 1, 0});  // 625 points near (0,1,0)
  for (std::uint64_t t = 0; t < pow_u64(5, 2); ++t)
    pts.push_back({(t * 25) % pm, 2, 0});  // 25 points near (0,2,0)
  PointSet F(5, 3, m, std::move(pts));
  auto res = bourgain_regularize(F, 0.9, 0.03, 4.0);
  REQUIRE(res.subset.has_value());
  // w0 sits in the heavy cluster (second coordinate 1)
  CHECK(res.w0[1] == 1);
  CHECK(res.subset->size() > 125);
}

TEST_CASE("pruning rejects degenerate inputs") {
  PointSet single(5, 3, 4, {{25, 0, 0}});
  CHECK_THROWS_AS(bourgain_regularize(single, 0.8, 0.05, 1.0),
                  std::domain_error);
}
