#include "padiclab/sl2.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>

namespace padiclab {

namespace {

// min of valuation lower bounds, treating exact zero as +inf.
int min_bound(std::initializer_list<const PAdic*> xs) {
  int m = std::numeric_limits<std::int32_t>::max();
  for (const PAdic* x : xs) m = std::min(m, x->valuation_bound());
  return m;
}

// Exact min valuation across coordinates: a vanished coordinate is only
// tolerated when a regular one already attains a strictly smaller value.
int exact_min_valuation(std::initializer_list<const PAdic*> xs,
                        const char* what) {
  int best = std::numeric_limits<std::int32_t>::max();
  bool best_exact = false;
  for (const PAdic* x : xs) {
    if (x->is_zero()) continue;
    if (x->is_regular()) {
      if (x->valuation() < best || (x->valuation() == best && !best_exact)) {
        best = x->valuation();
        best_exact = true;
      }
    } else if (x->valuation_bound() < best) {
      best = x->valuation_bound();
      best_exact = false;
    }
  }
  if (best == std::numeric_limits<std::int32_t>::max())
    throw std::domain_error(std::string(what) + ": zero input");
  if (!best_exact)
    throw precision_error(std::string(what) +
                          ": valuation indeterminate at this precision");
  return best;
}

}  // namespace

RVec::RVec(PAdic a, PAdic b, PAdic c)
    : w11(std::move(a)), w12(std::move(b)), w21(std::move(c)) {
  if (w11.prime() != w12.prime() || w11.prime() != w21.prime() ||
      w11.context_precision() != w12.context_precision() ||
      w11.context_precision() != w21.context_precision())
    throw std::invalid_argument("RVec: mixed contexts");
}

RVec RVec::zero(std::int64_t p, int m) {
  return RVec(PAdic::zero(p, m), PAdic::zero(p, m), PAdic::zero(p, m));
}

RVec RVec::from_integers(std::int64_t p, int m, std::int64_t a, std::int64_t b,
                         std::int64_t c) {
  return RVec(PAdic::integer(p, m, a), PAdic::integer(p, m, b),
              PAdic::integer(p, m, c));
}

bool RVec::is_zero() const {
  return w11.is_zero() && w12.is_zero() && w21.is_zero();
}

int RVec::min_valuation() const {
  return exact_min_valuation({&w11, &w12, &w21}, "RVec::min_valuation");
}

double RVec::sup_norm() const {
  if (is_zero()) return 0.0;
  return std::pow(static_cast<double>(prime()),
                  -static_cast<double>(min_valuation()));
}

RVec RVec::operator+(const RVec& o) const {
  return RVec(w11 + o.w11, w12 + o.w12, w21 + o.w21);
}

RVec RVec::operator-(const RVec& o) const {
  return RVec(w11 - o.w11, w12 - o.w12, w21 - o.w21);
}

RVec RVec::operator-() const { return RVec(-w11, -w12, -w21); }

RVec RVec::scaled(const PAdic& c) const {
  return RVec(w11 * c, w12 * c, w21 * c);
}

bool RVec::equal_at_precision(const RVec& o) const {
  return w11.equal_at_precision(o.w11) && w12.equal_at_precision(o.w12) &&
         w21.equal_at_precision(o.w21);
}

RVec ad_u(const PAdic& r, const RVec& w) {
  PAdic two = PAdic::integer(r.prime(), r.context_precision(), 2);
  PAdic r2 = r * r;
  return RVec(w.w11 + w.w21 * r, w.w12 - two * w.w11 * r - w.w21 * r2, w.w21);
}

RVec ad_diag(const PAdic& lambda, const RVec& w) {
  if (lambda.is_zero()) throw std::domain_error("ad_diag: lambda = 0");
  PAdic l2 = lambda * lambda;
  return RVec(w.w11, l2 * w.w12, w.w21 / l2);
}

SL2Elem::SL2Elem(PAdic a_, PAdic b_, PAdic c_, PAdic d_)
    : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {
  PAdic det = a * d - b * c;
  PAdic one = PAdic::one(a.prime(), a.context_precision());
  if (!det.equal_at_precision(one))
    throw std::invalid_argument("SL2Elem: determinant != 1 at precision");
}

SL2Elem SL2Elem::identity(std::int64_t p, int m) {
  return SL2Elem(PAdic::one(p, m), PAdic::zero(p, m), PAdic::zero(p, m),
                 PAdic::one(p, m));
}

SL2Elem SL2Elem::u(const PAdic& r) {
  auto p = r.prime();
  auto m = r.context_precision();
  return SL2Elem(PAdic::one(p, m), r, PAdic::zero(p, m), PAdic::one(p, m));
}

SL2Elem SL2Elem::uminus(const PAdic& r) {
  auto p = r.prime();
  auto m = r.context_precision();
  return SL2Elem(PAdic::one(p, m), PAdic::zero(p, m), r, PAdic::one(p, m));
}

SL2Elem SL2Elem::diag(const PAdic& lambda) {
  if (lambda.is_zero()) throw std::domain_error("diag: lambda = 0");
  auto p = lambda.prime();
  auto m = lambda.context_precision();
  return SL2Elem(lambda, PAdic::zero(p, m), PAdic::zero(p, m),
                 PAdic::one(p, m) / lambda);
}

SL2Elem SL2Elem::a_power(std::int64_t p, int m, int n) {
  return diag(PAdic::unit_power(p, m, -n, 1));
}

SL2Elem SL2Elem::operator*(const SL2Elem& o) const {
  return SL2Elem(a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
                 c * o.b + d * o.d);
}

SL2Elem SL2Elem::inverse() const { return SL2Elem(d, -b, -c, a); }

int SL2Elem::distance_valuation() const {
  PAdic one = PAdic::one(a.prime(), a.context_precision());
  PAdic am1 = a - one;
  PAdic dm1 = d - one;
  return min_bound({&am1, &b, &c, &dm1});
}

bool SL2Elem::equal_at_precision(const SL2Elem& o) const {
  return a.equal_at_precision(o.a) && b.equal_at_precision(o.b) &&
         c.equal_at_precision(o.c) && d.equal_at_precision(o.d);
}

RVec ad_sl2(const SL2Elem& h, const RVec& w) {
  // h W h^{-1} with W = (w11 w12; w21 -w11), h^{-1} = (d -b; -c a).
  PAdic x11 = h.a * w.w11 + h.b * w.w21;
  PAdic x12 = h.a * w.w12 - h.b * w.w11;
  PAdic x21 = h.c * w.w11 + h.d * w.w21;
  PAdic x22 = h.c * w.w12 - h.d * w.w11;
  PAdic y11 = x11 * h.d - x12 * h.c;
  PAdic y12 = -(x11 * h.b) + x12 * h.a;
  PAdic y21 = x21 * h.d - x22 * h.c;
  return RVec(y11, y12, y21);
}

GElem GElem::identity(std::int64_t p, int m) {
  return GElem(SL2Elem::identity(p, m), SL2Elem::identity(p, m));
}

GElem GElem::n(const PAdic& r, const PAdic& s) {
  return GElem(SL2Elem::u(r + s), SL2Elem::u(r));
}

GElem GElem::diag(const PAdic& lambda) {
  return GElem(SL2Elem::diag(lambda), SL2Elem::diag(lambda));
}

GElem GElem::a_power(std::int64_t p, int m, int n) {
  return GElem(SL2Elem::a_power(p, m, n), SL2Elem::a_power(p, m, n));
}

GElem GElem::operator*(const GElem& o) const {
  return GElem(left * o.left, right * o.right);
}

GElem GElem::inverse() const { return GElem(left.inverse(), right.inverse()); }

bool GElem::in_level(int n) const {
  return left.in_level(n) && right.in_level(n);
}

GaussFactors gauss_decompose(const SL2Elem& k, int n) {
  if (n < 1) throw std::invalid_argument("gauss_decompose: level must be >= 1");
  if (k.distance_valuation() < n)
    throw std::domain_error("gauss_decompose: element outside K_H[n]");
  // a = 1 + O(p^n) is a unit, so the elimination is well defined.
  SL2Elem um = SL2Elem::uminus(k.c / k.a);
  SL2Elem dg = SL2Elem::diag(k.a);
  SL2Elem up = SL2Elem::u(k.b / k.a);
  return GaussFactors{um, dg, up};
}

bool qh_membership(const SL2Elem& h, const QhWindow& w) {
  if (w.eta_exp < 0 || w.beta_exp < w.eta_exp || w.m < 0)
    throw std::invalid_argument("qh_membership: need beta <= eta <= 1, m >= 0");
  PAdic one = PAdic::one(h.prime(), h.context_precision());
  PAdic am1 = h.a - one;
  PAdic dm1 = h.d - one;
  return am1.valuation_bound() >= w.beta_exp &&
         dm1.valuation_bound() >= w.beta_exp &&
         h.b.valuation_bound() >= w.eta_exp &&
         h.c.valuation_bound() >= w.beta_exp + w.m;
}

}  // namespace padiclab
