#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "padiclab/padic.hpp"
#include "padiclab/rng.hpp"
#include "padiclab/sl2.hpp"

using namespace padiclab;

namespace {
constexpr std::int64_t P = 5;
constexpr int M = 10;

PAdic pa(std::int64_t n) { return PAdic::integer(P, M, n); }

PAdic random_unit_scaled(CounterRng& rng, int min_val, int max_val) {
  std::uint64_t pk = pow_u64(P, M);
  std::uint64_t u;
  do {
    u = rng.next_below(pk);
  } while (u == 0 || u % P == 0);
  int v = min_val + static_cast<int>(rng.next_below(
                        static_cast<std::uint64_t>(max_val - min_val + 1)));
  return PAdic::unit_power(P, M, v, u);
}

SL2Elem random_khn(CounterRng& rng, int n) {
  PAdic one = PAdic::one(P, M);
  PAdic a = one + random_unit_scaled(rng, n, n + 3);
  PAdic b = random_unit_scaled(rng, n, n + 3);
  PAdic c = random_unit_scaled(rng, n, n + 3);
  return SL2Elem(a, b, c, (one + b * c) / a);
}

}  // namespace

TEST_CASE("adjoint of the unipotent subgroup") {
  RVec w = RVec::from_integers(P, M, 0, 0, 1);
  RVec out = ad_u(pa(1), w);
  CHECK(out.w11.equal_at_precision(pa(1)));
  CHECK(out.w12.equal_at_precision(pa(-1)));
  CHECK(out.w21.equal_at_precision(pa(1)));

  RVec w2 = RVec::from_integers(P, M, 1, 0, 0);
  RVec out2 = ad_u(pa(1), w2);
  CHECK(out2.w11.equal_at_precision(pa(1)));
  CHECK(out2.w12.equal_at_precision(pa(-2)));
  CHECK(out2.w21.equal_at_precision(pa(0)));

  CHECK(ad_u(pa(0), w).equal_at_precision(w));
}

TEST_CASE("adjoint of the diagonal subgroup") {
  PAdic lambda = PAdic::rational(P, M, 1, 5);  // |lambda| = p
  RVec w = RVec::from_integers(P, M, 0, 1, 0);
  RVec out = ad_diag(lambda, w);
  CHECK(out.w11.is_zero());
  CHECK(out.w12.valuation() == -2);  // norm p^2
  CHECK(out.w21.is_zero());

  CHECK(ad_diag(pa(1), w).equal_at_precision(w));
  RVec diag_vec = RVec::from_integers(P, M, 1, 0, 0);
  CHECK(ad_diag(lambda, diag_vec).equal_at_precision(diag_vec));
  CHECK_THROWS_AS(ad_diag(PAdic::zero(P, M), w), std::domain_error);
}

TEST_CASE("one-parameter groups multiply additively") {
  CounterRng rng(99, 0);
  for (int i = 0; i < 100; ++i) {
    PAdic r = random_unit_scaled(rng, -2, 4);
    PAdic s = random_unit_scaled(rng, -2, 4);
    GElem prod = GElem::u(r) * GElem::u(s);
    CHECK(prod.right.b.equal_at_precision(r + s));
    CHECK(prod.left.b.equal_at_precision(r + s));
  }
}

TEST_CASE("congruence level membership") {
  PAdic p2 = pa(25);
  SL2Elem g(pa(1), p2, PAdic::zero(P, M), pa(1));
  GElem gg(g, g);
  CHECK(gg.in_level(2));
  CHECK_FALSE(gg.in_level(3));
  CHECK(GElem::identity(P, M).in_level(M));
}

TEST_CASE("diagonal conjugation rescales the unipotent parameter") {
  // a_1 u_r a_1^{-1} = u_{p^{-2} r}
  PAdic r = pa(7);
  GElem lhs = GElem::a_power(P, M, 1) * GElem::u(r) *
              GElem::a_power(P, M, 1).inverse();
  PAdic expect = r / pa(25);
  CHECK(lhs.right.b.equal_at_precision(expect));
}

TEST_CASE("triangular factorization: identity and worked example") {
  auto id = SL2Elem::identity(P, M);
  auto f = gauss_decompose(id, 1);
  CHECK(f.uminus.equal_at_precision(id));
  CHECK(f.diag.equal_at_precision(id));
  CHECK(f.uplus.equal_at_precision(id));

  // (1, p; p, 1+p^2): lower parameter p, diagonal 1, upper parameter p.
  SL2Elem k(pa(1), pa(5), pa(5), pa(26));
  auto g = gauss_decompose(k, 1);
  CHECK(g.uminus.c.equal_at_precision(pa(5)));
  CHECK(g.diag.a.equal_at_precision(pa(1)));
  CHECK(g.uplus.b.equal_at_precision(pa(5)));
  CHECK((g.uminus * g.diag * g.uplus).equal_at_precision(k));
}

TEST_CASE("triangular factorization: random round-trips at level 1") {
  CounterRng rng(2025, 1);
  for (int i = 0; i < 10000; ++i) {
    SL2Elem k = random_khn(rng, 1);
    auto f = gauss_decompose(k, 1);
    CHECK((f.uminus * f.diag * f.uplus).equal_at_precision(k));
    CHECK(f.uminus.c.valuation_bound() >= 1);
    CHECK(f.uplus.b.valuation_bound() >= 1);
    PAdic am1 = f.diag.a - PAdic::one(P, M);
    CHECK(am1.valuation_bound() >= 1);
  }
}

TEST_CASE("factorization rejects elements outside the level") {
  SL2Elem u = SL2Elem::u(pa(1));
  CHECK_THROWS_AS(gauss_decompose(u, 1), std::domain_error);
}

TEST_CASE("entry box membership") {
  QhWindow w{1, 2, 1};  // eta = p^{-1}, beta = p^{-2}, m = 1
  CHECK(qh_membership(SL2Elem::identity(P, M), w));
  CHECK(qh_membership(SL2Elem::u(pa(5)), w));        // |b| = eta
  CHECK_FALSE(qh_membership(SL2Elem::u(pa(1)), w));  // |b| = p eta
  CHECK(qh_membership(SL2Elem::uminus(pa(125)), w));
  CHECK_FALSE(qh_membership(SL2Elem::uminus(pa(25)), w));
}

TEST_CASE("entry box is closed under product and inverse") {
  CounterRng rng(7, 2);
  QhWindow win{2, 2, 1};
  PAdic one = PAdic::one(P, M);
  auto random_member = [&]() {
    // u^-(s) d(lam) u(r) with the window bounds
    PAdic s = random_unit_scaled(rng, 3, 6);        // beta p^{-m}
    PAdic lam = one + random_unit_scaled(rng, 2, 5);  // 1 + beta
    PAdic r = random_unit_scaled(rng, 2, 5);        // eta
    return SL2Elem::uminus(s) * SL2Elem::diag(lam) * SL2Elem::u(r);
  };
  for (int i = 0; i < 1000; ++i) {
    SL2Elem a = random_member();
    SL2Elem b = random_member();
    REQUIRE(qh_membership(a, win));
    REQUIRE(qh_membership(b, win));
    CHECK(qh_membership(a * b, win));
    CHECK(qh_membership(a.inverse(), win));
  }
}

TEST_CASE("conjugation containment with the doubled depth index") {
  // q a_m u_r k rewritten as a_m u_{r'} k' with k' in the beta-ball; the
  // entry box needs |c| <= beta p^{-2m} for the rewrite to close up.
  CounterRng rng(11, 3);
  const int beta_exp = 2, m = 1;
  PAdic one = PAdic::one(P, M);
  for (int i = 0; i < 300; ++i) {
    PAdic s = random_unit_scaled(rng, beta_exp + 2 * m, beta_exp + 2 * m + 2);
    PAdic lam = one + random_unit_scaled(rng, beta_exp, beta_exp + 2);
    PAdic rq = random_unit_scaled(rng, beta_exp, beta_exp + 2);
    SL2Elem q = SL2Elem::uminus(s) * SL2Elem::diag(lam) * SL2Elem::u(rq);
    REQUIRE(qh_membership(q, QhWindow{beta_exp, beta_exp, 2 * m}));

    SL2Elem k = random_khn(rng, beta_exp);
    PAdic r = random_unit_scaled(rng, 0, 2);
    SL2Elem am = SL2Elem::a_power(P, M, m);
    SL2Elem prod = q * am * SL2Elem::u(r) * k;

    // explicit solve: X = a_{-m} M, r' = X12 / X22, k' = u(-r') X
    SL2Elem x = SL2Elem::a_power(P, M, -m) * prod;
    PAdic rprime = x.b / x.d;
    SL2Elem kprime = SL2Elem::u(-rprime) * x;
    PAdic k11m1 = kprime.a - one;
    PAdic k22m1 = kprime.d - one;
    CHECK(k11m1.valuation_bound() >= beta_exp);
    CHECK(kprime.b.valuation_bound() >= beta_exp);
    CHECK(kprime.c.valuation_bound() >= beta_exp);
    CHECK(k22m1.valuation_bound() >= beta_exp);
    PAdic shift = rprime - r;
    CHECK(shift.valuation_bound() >= beta_exp);
  }
}
