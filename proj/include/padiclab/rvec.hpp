#pragma once

#include "padiclab/padic.hpp"

namespace padiclab {

// Trace-zero 2x2 matrix over Q_p in the coordinates (w11, w12, w21); the
// (2,2) entry is -w11. Carrier of the transverse algebra.
struct RVec {
  PAdic w11, w12, w21;

  RVec() = default;
  RVec(PAdic a, PAdic b, PAdic c);
  static RVec zero(std::int64_t p, int m);
  static RVec from_integers(std::int64_t p, int m, std::int64_t a,
                            std::int64_t b, std::int64_t c);

  std::int64_t prime() const { return w11.prime(); }
  int context_precision() const { return w11.context_precision(); }

  bool is_zero() const;
  // min over coordinate valuations; throws precision_error when a vanished
  // coordinate could dominate.
  int min_valuation() const;
  // ||w||_p = max of coordinate norms = p^{-min_valuation}.
  double sup_norm() const;

  RVec operator+(const RVec& o) const;
  RVec operator-(const RVec& o) const;
  RVec operator-() const;
  RVec scaled(const PAdic& c) const;

  bool equal_at_precision(const RVec& o) const;
};

// Ad_{u_r} w = (w11 + w21 r, w12 - 2 w11 r - w21 r^2, w21).
RVec ad_u(const PAdic& r, const RVec& w);

// Ad_{d_lambda} w = (w11, lambda^2 w12, lambda^{-2} w21), lambda != 0.
RVec ad_diag(const PAdic& lambda, const RVec& w);

}  // namespace padiclab
