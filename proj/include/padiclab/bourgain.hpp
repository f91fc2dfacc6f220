#pragma once

#include <optional>

#include "padiclab/balltree.hpp"
#include "padiclab/pointset.hpp"

namespace padiclab {

struct BourgainResult {
  Residues w0{0, 0, 0};     // member of the output set
  int l1 = 0;               // localization ball radius b1 = p^{-l1}
  std::optional<PointSet> subset;
  double measured_constant = 0.0;  // C' from the verification scan
  double target_exponent = 0.0;    // alpha - 20 eps
  int scan_depth = 0;              // deepest verified scale
  // Diagnostic: the asymptotic size inequality (#F)^{eps/2} > 4 log_p(#F).
  bool asymptotic_size_inequality = false;
};

// Localize-and-prune regularization: picks a ball B(w0, b1) at an
// admissible scale, then trims per-level ball populations until the subset
// is non-concentrated at exponent alpha - 20 eps relative to b1. The
// returned constant is measured by an exhaustive scan over ball-tree nodes
// down to scale 1/#F; the scan is the acceptance test of the output.
//
// Preconditions: F is energy-admissible at (alpha, eps, D), i.e.
// max_w energy_sum(F, alpha, w) <= D (#F)^{1+eps}, and large enough that
// the admissible scale window [ceil(eps log_p n), floor(q log_p n)] with
// q = (3-alpha+5eps)/(3-alpha+20eps) contains a positive integer. Throws
// std::domain_error when the window is empty or #F < p (size condition),
// and std::runtime_error when no candidate ball passes the scan.
BourgainResult bourgain_regularize(const PointSet& F, double alpha, double eps,
                                   double D);

}  // namespace padiclab
