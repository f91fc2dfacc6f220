#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "padiclab/haar.hpp"
#include "padiclab/padic.hpp"
#include "padiclab/rng.hpp"

using namespace padiclab;

namespace {

PAdic random_padic(CounterRng& rng, std::int64_t p, int m, int max_val = 6) {
  int val = static_cast<int>(rng.next_below(2 * max_val + 1)) - max_val;
  std::uint64_t pk = pow_u64(p, m);
  std::uint64_t u;
  do {
    u = rng.next_below(pk);
  } while (u % static_cast<std::uint64_t>(p) == 0 || u == 0);
  return PAdic::unit_power(p, m, val, u);
}

}  // namespace

TEST_CASE("modular inverse via extended euclid") {
  // 1/2 at p=5, precision 3: 2 * 63 = 126 = 1 mod 125.
  PAdic x = PAdic::rational(5, 3, 1, 2);
  CHECK(x.valuation() == 0);
  CHECK(x.unit() == 63);
}

TEST_CASE("doubling keeps the unit for odd p") {
  PAdic p5 = PAdic::integer(5, 6, 5);
  PAdic s = p5 + p5;
  CHECK(s.valuation() == 1);
  CHECK(s.unit() % 5 == 2);
}

TEST_CASE("full cancellation flags indeterminate valuation") {
  PAdic x = PAdic::integer(5, 4, 7);
  PAdic d = x - x;
  CHECK(d.is_vanished());
  CHECK(d.valuation_bound() >= 4);
  CHECK_THROWS_AS((void)d.norm(), precision_error);
  CHECK_THROWS_AS((void)d.valuation(), precision_error);
}

TEST_CASE("norm basics") {
  CHECK(PAdic::integer(5, 4, 5).norm() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(PAdic::integer(5, 4, 6).norm() == 1.0);
  CHECK(PAdic::zero(5, 4).norm() == 0.0);
}

TEST_CASE("division by zero and by vanished fail loudly") {
  PAdic one = PAdic::one(5, 4);
  CHECK_THROWS_AS(one / PAdic::zero(5, 4), std::domain_error);
  PAdic vanished = one - one;
  CHECK_THROWS_AS(one / vanished, precision_error);
}

TEST_CASE("norm is exactly multiplicative") {
  CounterRng rng(2024, 1);
  for (int i = 0; i < 2000; ++i) {
    PAdic x = random_padic(rng, 5, 8);
    PAdic y = random_padic(rng, 5, 8);
    CHECK((x * y).valuation() == x.valuation() + y.valuation());
  }
}

TEST_CASE("ultrametric inequality with equality for distinct valuations") {
  CounterRng rng(2024, 2);
  for (int i = 0; i < 10000; ++i) {
    PAdic x = random_padic(rng, 7, 8);
    PAdic y = random_padic(rng, 7, 8);
    PAdic s = x + y;
    int vmin = std::min(x.valuation(), y.valuation());
    CHECK(s.valuation_bound() >= vmin);
    if (x.valuation() != y.valuation()) CHECK(s.valuation() == vmin);
  }
}

TEST_CASE("division inverts multiplication at precision") {
  CounterRng rng(2024, 3);
  for (int i = 0; i < 2000; ++i) {
    PAdic x = random_padic(rng, 13, 6);
    PAdic y = random_padic(rng, 13, 6);
    CHECK((x * y / y).equal_at_precision(x));
  }
}

TEST_CASE("residues") {
  PAdic x = PAdic::integer(5, 6, 2 + 3 * 5 + 4 * 25);
  CHECK(x.residue(1) == 2);
  CHECK(x.residue(2) == 17);
  CHECK(x.residue(3) == 117);
  CHECK(PAdic::integer(5, 6, -1).residue(2) == 24);
  CHECK_THROWS_AS(PAdic::rational(5, 6, 1, 5).residue(2), std::domain_error);
}

TEST_CASE("haar: total mass and one residue class") {
  ZpGrid g1(5, 0);
  CHECK(haar_integrate({1.0}, g1) == 1.0);

  ZpGrid g2(5, 2);
  std::vector<double> ind(25, 0.0);
  for (std::size_t r = 0; r < 25; r += 5) ind[r] = 1.0;  // p Z_p
  CHECK(haar_integrate(ind, g2) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("haar: norm integrand via shell decomposition") {
  // f(t) = |t|_5 at depth 3, residue 0 assigned 5^{-3}.
  ZpGrid g(5, 3);
  std::vector<double> f(125);
  for (std::uint64_t r = 0; r < 125; ++r) {
    if (r == 0) {
      f[r] = std::pow(5.0, -3);
    } else {
      int v = 0;
      std::uint64_t x = r;
      while (x % 5 == 0) {
        x /= 5;
        ++v;
      }
      f[r] = std::pow(5.0, -v);
    }
  }
  double expect = (1.0 - 0.2) * (1 + 1.0 / 25 + 1.0 / 625) + std::pow(5.0, -6);
  CHECK(haar_integrate(f, g) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("haar: refinement invariance is bit-exact") {
  CounterRng rng(77, 4);
  ZpGrid g(7, 2);
  std::vector<double> f(49);
  for (auto& v : f) v = rng.next_real() * 3.0 - 1.5;
  double base = haar_integrate(f, g);
  std::vector<double> lifted = ZpGrid::refine(f, 7);
  ZpGrid g3(7, 3);
  CHECK(haar_integrate(lifted, g3) == base);  // identical, not approximate
}

TEST_CASE("haar: rejects empty and mismatched tables") {
  ZpGrid g(5, 2);
  CHECK_THROWS_AS(haar_integrate({}, g), std::invalid_argument);
  CHECK_THROWS_AS(haar_integrate(std::vector<double>(24, 1.0), g),
                  std::invalid_argument);
}
