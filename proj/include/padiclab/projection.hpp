#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "padiclab/haar.hpp"
#include "padiclab/padic.hpp"
#include "padiclab/pointset.hpp"
#include "padiclab/rvec.hpp"

namespace padiclab {

// xi_r(w) = (Ad_{u_r} w)_{12} = w12 - 2 w11 r - w21 r^2.
PAdic xi(const PAdic& r, const RVec& w);

// Residue form on grid points: xi_r(w) mod p^m.
std::uint64_t xi_residue(std::int64_t p, int m, std::uint64_t r,
                         const Residues& w);

struct ScanParams {
  int l0 = 0;          // finest scale b0 = p^{-l0}
  int l1 = 0;          // coarsest scale b1 = p^{-l1} (E lives in B(0, b1))
  double alpha = 0.5;  // hypothesis exponent
  double eps = 0.1;    // exponent loss of the conclusion
  std::uint64_t j_center = 0;  // parameter ball J = j_center + p^{j_depth} Z_p
  int j_depth = 0;
  int r_depth = 2;     // enumeration depth for r
  // Good r's must achieve constant <= slack * D'; the family constant of
  // the theorem is tower-size, so the slack is a structural stand-in.
  double constant_slack_factor = 0.0;  // 0 means default (= p)
  bool diagnostic = false;  // keep scanning on hypothesis failure
};

struct RRecord {
  std::uint64_t r = 0;
  bool good = false;
  std::size_t er_size = 0;
  double constant = 0.0;            // smallest constant on the kept subset
  std::vector<double> constants;    // per-scale constants on the kept subset
};

struct ProjectionReport {
  std::int64_t p = 0;
  int depth = 0;
  double alpha = 0.0;
  double eps = 0.0;
  double hypothesis_constant = 0.0;  // D' measured at exponent alpha
  bool hypothesis_ok = false;
  std::vector<RRecord> rs;
  double exceptional_mass = 0.0;     // (#bad residues) * p^{-r_depth}
  double good_mass = 0.0;
  double max_good_constant = 0.0;
};

// For every depth-r_depth residue r in J, measures how well the fibers of
// xi_r spread E: per point w the smallest c with
//   #{w' : |xi_r(w') - xi_r(w)| <= b} <= c (b/b1)^{alpha-eps} #E
// over b in [b0, b1]; E_r keeps the points with c <= threshold and r is
// good when #E_r >= (1 - 1/p) #E.
ProjectionReport projection_theorem_scan(const PointSet& E,
                                         const ScanParams& params);

// Exact Haar measure of {t in Z_p : |a t^2 + b t + c|_p <= p^n} as a
// rational with denominator p^depth, for a, b, c in Z_p and n <= 0.
// Requires depth >= -n and max(|a|,|b|,|c|) = 1 for the sublevel bound
// measure <= p^2 p^{n/2}, which is asserted.
Rational quad_sublevel_measure(const PAdic& a, const PAdic& b, const PAdic& c,
                               int n, int depth);

// Integer-coefficient fast path (coefficients are residues mod p^depth).
Rational quad_sublevel_measure_ints(std::int64_t p, std::int64_t a,
                                    std::int64_t b, std::int64_t c, int n,
                                    int depth);

struct ShearResult {
  std::uint64_t r0 = 0;  // shear parameter in {0, p^2, 1}
  PointSet image;        // subset of Ad_{u_{r0}} E with |w12| >= p^{-4} ||w||
};

// Selects r0 in {0, p^2, 1} and the subset of sheared points whose (1,2)
// coordinate carries the norm up to p^4; the subset keeps at least #E/4
// points.
ShearResult shear_select(const PointSet& E);

// Displacement change of base point: maps each w' in F' to the w with
// exp(w) = exp(w') exp(-w0). Pairwise distances and the whole ball-count
// profile are preserved. Points and w0 must lie in the product-rule
// domain ||.|| <= p^{-2}.
PointSet change_base_point(const PointSet& fprime, const Residues& w0);

}  // namespace padiclab
