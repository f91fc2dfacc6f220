#include "padiclab/explog.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace padiclab {

namespace {

struct ScalarSeries {
  PAdic c;  // sum delta^n / (2n)!
  PAdic s;  // sum delta^n / (2n+1)!
};

// Both series converge on |delta| <= p^{-2} for p >= 5 since
// v(delta^n / (2n)!) >= 2n - 2n/(p-1) grows without bound.
ScalarSeries eval_series(const PAdic& delta) {
  auto p = delta.prime();
  auto m = delta.context_precision();
  PAdic c = PAdic::one(p, m);
  PAdic s = PAdic::one(p, m);
  PAdic term_c = PAdic::one(p, m);
  PAdic term_s = PAdic::one(p, m);
  for (int n = 1; n <= 4 * m + 8; ++n) {
    term_c = term_c * delta /
             PAdic::integer(p, m, static_cast<std::int64_t>(2 * n - 1) * (2 * n));
    term_s = term_s * delta /
             PAdic::integer(p, m, static_cast<std::int64_t>(2 * n) * (2 * n + 1));
    bool c_done = !term_c.is_regular() || term_c.valuation() > m + 1;
    bool s_done = !term_s.is_regular() || term_s.valuation() > m + 1;
    if (!c_done) c = c + term_c;
    if (!s_done) s = s + term_s;
    if (c_done && s_done) return {c, s};
  }
  throw std::logic_error("scalar exp series did not terminate");
}

// Requires a certified bound ||w||_p <= p^{-min_val} (valuation lower
// bounds suffice; no exact valuation needed).
void require_in_ball(const RVec& w, const char* what, int min_val) {
  if (w.w11.valuation_bound() < min_val ||
      w.w12.valuation_bound() < min_val ||
      w.w21.valuation_bound() < min_val)
    throw std::domain_error(std::string(what) + ": input outside domain ball");
}

}  // namespace

SL2Elem exp_r(const RVec& w) {
  auto p = w.prime();
  auto m = w.context_precision();
  if (w.is_zero()) return SL2Elem::identity(p, m);
  require_in_ball(w, "exp_r", 1);
  PAdic delta = w.w11 * w.w11 + w.w12 * w.w21;  // -det(w)
  auto [c, s] = eval_series(delta);
  return SL2Elem(c + s * w.w11, s * w.w12, s * w.w21, c - s * w.w11);
}

RVec log_r(const SL2Elem& g) {
  auto p = g.prime();
  auto m = g.context_precision();
  if (g.distance_valuation() < 1)
    throw std::domain_error("log_r: element outside domain ball");
  PAdic two = PAdic::integer(p, m, 2);
  PAdic t = (g.a + g.d) / two;          // C(delta)
  PAdic e = t * t - PAdic::one(p, m);   // delta * S(delta)^2
  // Solve delta = e / S(delta)^2 by fixed-point iteration; the map is an
  // ultrametric contraction with factor |e| <= p^{-1} on this domain.
  PAdic delta = e;
  PAdic s = PAdic::one(p, m);
  for (int it = 0; it < 2 * m + 8; ++it) {
    s = eval_series(delta).s;
    PAdic next = e / (s * s);
    if (next.equal_at_precision(delta)) {
      delta = next;
      break;
    }
    delta = next;
  }
  s = eval_series(delta).s;
  PAdic w11 = (g.a - g.d) / (two * s);
  return RVec(w11, g.b / s, g.c / s);
}

RVec bch_product(const RVec& w1, const RVec& w2) {
  require_in_ball(w1, "bch_product", BCH_DOMAIN_EXP);
  require_in_ball(w2, "bch_product", BCH_DOMAIN_EXP);
  auto same_rep = [](const PAdic& a, const PAdic& b) {
    return a.kind() == b.kind() && a.valuation_bound() == b.valuation_bound() &&
           a.relative_precision() == b.relative_precision() &&
           a.unit() == b.unit();
  };
  RVec diff = w1 - w2;
  if (diff.is_zero() || (same_rep(w1.w11, w2.w11) && same_rep(w1.w12, w2.w12) &&
                         same_rep(w1.w21, w2.w21)))
    return RVec::zero(w1.prime(), w1.context_precision());
  RVec w = log_r(exp_r(w1) * exp_r(w2).inverse());
  // Product-rule norm identity: ||w|| = ||w1 - w2|| as exact valuations.
  int vd = diff.min_valuation();
  int vw = w.min_valuation();
  if (vd != vw)
    throw std::logic_error("bch_product: norm identity violated");
  return w;
}

}  // namespace padiclab
