#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace padiclab {

// Finite congruence quotient model: SL_2(Z/p^n Z), or the two-factor
// product when factors = 2 (size-gated). Carries the filtration
// K[m] = ker(reduction mod p^m) for 0 <= m <= n and the normalized
// counting measure.
class FiniteQuotient {
 public:
  using Mat = std::array<std::uint8_t, 4>;  // (a, b, c, d) mod p^n

  FiniteQuotient(std::int64_t p, int level, int factors = 1,
                 std::size_t size_cap = 1u << 20);

  std::int64_t prime() const { return p_; }
  int level() const { return n_; }
  int factors() const { return factors_; }
  int dim_model() const { return 3 * factors_; }
  std::size_t size() const {
    return elems_.size() / static_cast<std::size_t>(factors_);
  }

  // Element access; an element is `factors` matrices.
  const std::vector<Mat>& elements() const { return elems_; }
  const Mat& matrix(std::size_t idx, int factor) const {
    return elems_[idx * static_cast<std::size_t>(factors_) +
                  static_cast<std::size_t>(factor)];
  }

  std::size_t index_of(const std::vector<Mat>& g) const;
  std::size_t multiply(std::size_t i, std::size_t j) const;
  std::size_t inverse(std::size_t i) const;
  std::size_t identity_index() const { return identity_; }

  // Congruence class of x under K[m]: equal classes iff same left coset.
  std::uint32_t coset_id(std::size_t x, int m) const {
    return coset_ids_[static_cast<std::size_t>(m)][x];
  }
  std::size_t coset_count(int m) const { return coset_counts_[static_cast<std::size_t>(m)]; }
  std::size_t subgroup_size(int m) const { return size() / coset_count(m); }

  // Elements of K[m] (indices), for sampling.
  std::vector<std::size_t> level_subgroup(int m) const;

 private:
  std::int64_t p_;
  int n_;
  int factors_;
  std::uint32_t modulus_;  // p^n
  std::vector<Mat> elems_;  // factors consecutive matrices per element
  std::vector<std::uint64_t> keys_;  // sorted packed keys
  std::vector<std::uint32_t> key_to_index_;
  std::size_t identity_ = 0;
  std::vector<std::vector<std::uint32_t>> coset_ids_;  // per m = 0..n
  std::vector<std::size_t> coset_counts_;

  std::uint64_t pack(const Mat* g) const;
};

// Real-valued function on the quotient, indexed by element order. The
// element order is the lexicographic enumeration of the matrix entries
// (a, b, c, d) per factor and is stable across runs.
struct QuotientFunction {
  std::vector<double> values;

  double l2_norm(const FiniteQuotient& q) const;  // normalized measure
  double sup_norm() const;

  // "index,value" lines with a "# elements=<n>" header.
  std::string to_csv() const;
  static QuotientFunction from_csv(const std::string& text);
};

// Averaging projection over K[m]-cosets; idempotent and self-adjoint.
QuotientFunction avg_project(const FiniteQuotient& q, const QuotientFunction& f,
                             int m);

// pr[0] = Av[0], pr[m] = Av[m] - Av[m-1]: mutually orthogonal projections
// summing to the identity.
QuotientFunction pr_project(const FiniteQuotient& q, const QuotientFunction& f,
                            int m);

// S_d(f)^2 = sum_m p^{m d} ||pr[m] f||_2^2.
double sobolev_norm(const FiniteQuotient& q, const QuotientFunction& f, int d);

// Left translation (g . f)(x) = f(g^{-1} x).
QuotientFunction translate(const FiniteQuotient& q, const QuotientFunction& f,
                           std::size_t g);

// Finite-level constants of the norm properties, derived from the coset
// index bounds [G : K[m]] (see verify_properties).
struct SobolevConstants {
  double s1 = 0.0;                 // ||f||_inf <= s1 S_d(f)
  std::vector<double> s3;          // per r: ||g.f - f||_inf <= s3[r] p^{-r} S_d(f)
  double s4 = 0.0;                 // S_d(f1 f2) <= s4 S_d(f1) S_d(f2)
};

SobolevConstants derive_constants(const FiniteQuotient& q, int d);

struct SobolevPropertyReport {
  int d = 0;
  bool d_above_threshold = false;  // d >= dim_model + 2
  SobolevConstants constants;
  double s1_ratio = 0.0;  // max over checks of lhs / (constant * rhs)
  double s2_error = 0.0;  // |S_d(g.f) - S_d(f)| relative
  double s3_ratio = 0.0;
  double s4_ratio = 0.0;
  bool pass = false;
};

// Evaluates the four norm properties on concrete data: invariance under
// translation (exact), the sup-norm bound, the translation-continuity
// bound for g in K[r], and submultiplicativity.
SobolevPropertyReport verify_properties(const FiniteQuotient& q,
                                        const QuotientFunction& f,
                                        const QuotientFunction& f2,
                                        std::size_t g, int d, int r);

}  // namespace padiclab
