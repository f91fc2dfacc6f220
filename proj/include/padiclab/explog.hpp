#pragma once

#include "padiclab/rvec.hpp"
#include "padiclab/sl2.hpp"

namespace padiclab {

// Radius exponent of the product-rule domain: inputs must satisfy
// ||w||_p <= p^{-BCH_DOMAIN_EXP}. Valid for p >= 5.
inline constexpr int BCH_DOMAIN_EXP = 2;

// exp(w) for ||w||_p <= p^{-1}, via w^2 = -det(w) I:
// exp(w) = C(delta) I + S(delta) w with delta = -det(w) and the even/odd
// scalar series truncated once terms fall below the working precision.
SL2Elem exp_r(const RVec& w);

// Inverse of exp_r on ||g - I||_p <= p^{-1}.
RVec log_r(const SL2Elem& g);

// w with exp(w1) exp(-w2) = exp(w). Requires ||wi||_p <= p^{-BCH_DOMAIN_EXP};
// the result satisfies ||w||_p = ||w1 - w2||_p exactly (checked).
RVec bch_product(const RVec& w1, const RVec& w2);

}  // namespace padiclab
