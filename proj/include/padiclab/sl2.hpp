#pragma once

#include "padiclab/padic.hpp"
#include "padiclab/rvec.hpp"

namespace padiclab {

// 2x2 determinant-one matrix over Q_p. The determinant is checked to hold
// at the working precision on construction.
struct SL2Elem {
  PAdic a, b, c, d;

  SL2Elem() = default;
  SL2Elem(PAdic a_, PAdic b_, PAdic c_, PAdic d_);

  static SL2Elem identity(std::int64_t p, int m);
  static SL2Elem u(const PAdic& r);       // (1 r; 0 1)
  static SL2Elem uminus(const PAdic& r);  // (1 0; r 1)
  static SL2Elem diag(const PAdic& lambda);
  // a_n = d_{p^{-n}}.
  static SL2Elem a_power(std::int64_t p, int m, int n);

  std::int64_t prime() const { return a.prime(); }
  int context_precision() const { return a.context_precision(); }

  SL2Elem operator*(const SL2Elem& o) const;
  SL2Elem inverse() const;

  // Largest n with ||g - I||_p <= p^{-n} derivable from the entries'
  // precision (entries indistinguishable from I count as the full bound).
  int distance_valuation() const;
  bool in_level(int n) const { return distance_valuation() >= n; }

  bool equal_at_precision(const SL2Elem& o) const;
};

// Conjugation action on the transverse algebra: h w h^{-1}.
RVec ad_sl2(const SL2Elem& h, const RVec& w);

// Pair of SL2 factors; elements of SL2 x SL2.
struct GElem {
  SL2Elem left, right;

  GElem() = default;
  GElem(SL2Elem l, SL2Elem r) : left(std::move(l)), right(std::move(r)) {}

  static GElem identity(std::int64_t p, int m);
  // n(r, s) = ((1 r+s; 0 1), (1 r; 0 1)).
  static GElem n(const PAdic& r, const PAdic& s);
  static GElem u(const PAdic& r) { return n(r, PAdic::zero(r.prime(), r.context_precision())); }
  static GElem v(const PAdic& s) { return n(PAdic::zero(s.prime(), s.context_precision()), s); }
  static GElem diag(const PAdic& lambda);
  static GElem a_power(std::int64_t p, int m, int n);

  GElem operator*(const GElem& o) const;
  GElem inverse() const;

  // g in K[n]: ||g - I||_p <= p^{-n} in both factors.
  bool in_level(int n) const;
};

struct GaussFactors {
  SL2Elem uminus;  // in U^-[n]
  SL2Elem diag;    // in D[n]
  SL2Elem uplus;   // in U[n]
};

// Triangular factorization k = u^-(c/a) d(a) u(b/a) for k in K_H[n], n >= 1.
GaussFactors gauss_decompose(const SL2Elem& k, int n);

// Entry box with |a-1|, |d-1| <= beta, |b| <= eta, |c| <= beta p^{-m};
// parameters are powers of p given by their exponents (eta = p^{-eta_exp}).
struct QhWindow {
  int eta_exp;   // >= 0
  int beta_exp;  // >= eta_exp
  int m;         // >= 0
};

bool qh_membership(const SL2Elem& h, const QhWindow& w);

}  // namespace padiclab
