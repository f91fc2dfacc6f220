#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "padiclab/haar.hpp"

namespace padiclab {

using BigInt = boost::multiprecision::cpp_int;

// Finite place set {infinity} + listed primes over Q.
struct PlaceSet {
  std::vector<std::int64_t> primes;  // sorted, distinct

  explicit PlaceSet(std::vector<std::int64_t> ps = {});
  std::size_t size() const { return primes.size() + 1; }  // + infinity
  bool contains(std::int64_t q) const;
};

// Exact rational with a declared place set.
struct SAdicScalar {
  Rational value;
  PlaceSet places;
};

struct HeightRecord {
  Rational inf_abs;                     // |x|_infinity
  std::vector<Rational> finite_abs;    // |x|_q per listed prime
  Rational s_norm;                      // max over the place set
  Rational s_height;                    // product over the place set
  bool s_integer = false;               // |x|_q <= 1 outside the place set
  Rational full_height;                 // product over ALL places (= 1)
};

// v_q of an exact rational.
long rational_valuation(const Rational& x, std::int64_t q);

HeightRecord place_norms(const SAdicScalar& x);

// For a nonzero S-integer with ||x||_S <= C: checks ||1/x||_S <= C^{#S-1}.
bool inverse_norm_check(const SAdicScalar& x);

using IntMatrix = std::vector<std::vector<BigInt>>;
using IntVector = std::vector<BigInt>;
using RatVector = std::vector<Rational>;

// Basis of the saturated integer kernel ker(A) cap Z^n via fraction-free
// row reduction of [A^T | I]; basis vectors are size-reduced and their
// max-norms are checked against the T^{3n} budget.
std::vector<IntVector> integer_kernel_basis(const IntMatrix& A,
                                            const BigInt& T);

struct NearestKernelResult {
  RatVector point;        // w0 in ker(A), exact
  double distance = 0.0;  // ||w - w0||_2
  double residual = 0.0;  // ||A w||_2
  double conditioning = 0.0;  // reported C(A) with ||w - w0|| <= C(A) ||A w||
};

// Orthogonal projection of w onto ker(A), exact in rational arithmetic;
// the conditioning constant is 1/sigma_min+(A) from a dense SVD.
NearestKernelResult nearest_kernel_point(const IntMatrix& A,
                                         const RatVector& w);

// gcd of all s x s minors equals 1 iff the rows span a saturated lattice.
bool is_saturated_basis(const std::vector<IntVector>& basis);

Rational parse_rational(const std::string& text);  // "num/den" or integer

// Rows of comma-separated integers.
IntMatrix parse_matrix_csv(const std::string& text);
RatVector parse_vector_csv(const std::string& text);  // "num/den" entries

}  // namespace padiclab
