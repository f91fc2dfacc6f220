#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "padiclab/haar.hpp"
#include "padiclab/pointset.hpp"
#include "padiclab/rvec.hpp"

namespace padiclab {

using BigInt = boost::multiprecision::cpp_int;

// Valuation distribution of r -> ||d_lambda u_r . w||_p over Z_p: exact
// rational mass per norm valuation. Computed by adaptive class refinement
// with closed-form geometric tails around the roots of the two coordinate
// polynomials, so it is the stabilized limit of uniform-depth refinement.
struct ContractionShells {
  std::map<long, Rational> mass;  // norm valuation -> Haar mass

  // sum over shells of mass * p^{alpha * valuation}, in valuation order.
  double moment(double alpha, std::int64_t p) const;
};

ContractionShells contraction_shells(std::int64_t p, const BigInt& w11,
                                     const BigInt& w12, const BigInt& w21,
                                     int lambda_exp);

// Exact integral over Z_p of ||d_lambda u_r . w||^{-alpha} dr. lambda_exp =
// -v(lambda) >= 1 (|lambda| > 1). When assert_c2 is set, checks the bound
// value <= C2 |lambda|^{-(1-alpha)/4} / (p - p^alpha) * ||w||^{-alpha}.
double contraction_integral(const RVec& w, const PAdic& lambda, double alpha,
                            std::optional<double> assert_c2 = std::nullopt);

// Same on raw integer coordinates.
double contraction_integral_ints(std::int64_t p, const BigInt& w11,
                                 const BigInt& w12, const BigInt& w21,
                                 int lambda_exp, double alpha);

// Uniform-depth evaluation at class representatives; agrees exactly with
// the shell value once two successive depths match (the stabilized regime).
double contraction_integral_at_depth(std::int64_t p, const BigInt& w11,
                                     const BigInt& w12, const BigInt& w21,
                                     int lambda_exp, double alpha, int depth);

// Empirical bound for the absolute constant in the contraction inequality:
// 2 x the max of value * (p - p^alpha) p^{alpha_hat * n} ||w||^alpha over
// the canonical direction grid at the given depth and n in lambda_exps.
double measure_c2(std::int64_t p, double alpha, int grid_depth = 3,
                  const std::vector<int>& lambda_exps = {1, 2, 3},
                  int threads = 1);

// Smallest step size m with C2 p^{-alpha_hat m} / (p - p^alpha) <= p^{-1},
// alpha_hat = (1 - alpha) / 4.
int compute_m_alpha(std::int64_t p, double alpha, double c2);

// Checks the step-size display: for every nonzero direction w at the grid
// depth, integral(a_m u_r . w) <= p^{-1} ||w||^{-alpha} (1 + tol).
// Returns the worst ratio integral / (p^{-1} ||w||^{-alpha}).
double contraction_worst_ratio(std::int64_t p, double alpha, int m,
                               int grid_depth, int threads = 1);

// Random-walk measure: steps a_{m_step} u_r with r drawn from the depth
// r_depth residue grid of Z_p, each atom of mass p^{-r_depth}.
struct WalkMeasure {
  std::int64_t p;
  int m_step;
  int r_depth;
};

struct WalkAtom {
  std::vector<std::uint64_t> rs;  // r_1 ... r_ell
  double mass;
};

struct MonteCarloOpts {
  std::uint64_t samples;
  std::uint64_t seed;
};

// Atoms of the ell-fold convolution, in lexicographic tuple order. Falls
// back to Monte Carlo sampling (recorded in the atoms' masses) when the
// full enumeration exceeds `budget` and mc is provided; throws otherwise.
std::vector<WalkAtom> walk_convolve(const WalkMeasure& nu, int ell,
                                    std::uint64_t budget = 2000000,
                                    std::optional<MonteCarloOpts> mc = std::nullopt);

// Transverse configuration: distinct nonzero displacement vectors and the
// Margulis exponent.
struct TransverseConfig {
  PointSet F;  // dim 3, zero tuple forbidden
  double alpha;
};

// f(h) = sum_{w in F} ||Ad_h w||^{-alpha} for a walk word h, evaluated in
// exact rational coordinate arithmetic.
double margulis_value(const TransverseConfig& cfg, const WalkMeasure& nu,
                      const std::vector<std::uint64_t>& word_rs);

struct RecursionReport {
  double lhs = 0.0;     // integral of f over the ell-fold convolution
  double f_identity = 0.0;
  double bound = 0.0;   // p^{-ell} f(e)
  int ell = 0;
  int m_required = 0;   // compute_m_alpha at the configured c2
  bool precondition_ok = false;
  bool pass = false;
};

// Average contraction of the Margulis function along the walk:
// integral f d nu^(ell) <= p^{-ell} f(e) (1 + 1e-9). If m_step is below
// the required step size the check still runs and reports the violation
// of the precondition.
RecursionReport margulis_recursion_check(const TransverseConfig& cfg,
                                         const WalkMeasure& nu, int ell,
                                         double c2);

struct EnergyMargulisPair {
  double energy = 0.0;
  double f_model = 0.0;
};

// Energy at w0 versus the Margulis value at the displaced base point; the
// two agree exactly because displacement preserves all norms.
EnergyMargulisPair energy_vs_margulis(const PointSet& F, const Residues& w0,
                                      double alpha);

}  // namespace padiclab
