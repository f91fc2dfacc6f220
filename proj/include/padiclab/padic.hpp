#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace padiclab {

// Raised when an operation needs a valuation that the inputs' precision
// cannot determine (e.g. the norm of x - x at full precision).
struct precision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_supported_prime(std::int64_t p);

// Largest unit precision m with p^m < 2^62, so residues fit in uint64.
int max_precision(std::int64_t p);

std::uint64_t pow_u64(std::int64_t p, int k);

// Inverse of a mod p^k; a must be a unit.
std::uint64_t inv_mod_pk(std::uint64_t a, std::int64_t p, int k);

// Element of Q_p in the capped-relative model: x = p^val * unit where the
// unit is known modulo p^rel. Every element carries its prime and the
// context precision m (the construction-time relative precision). Exact
// zero and below-precision values ("valuation >= bound") are explicit
// states so norms are never silently wrong.
class PAdic {
 public:
  enum class Kind : std::uint8_t { Regular, Zero, Vanished };

  PAdic() : p_(0), m_(0), kind_(Kind::Zero), val_(0), rel_(0), unit_(0) {}

  static PAdic zero(std::int64_t p, int m);
  static PAdic one(std::int64_t p, int m) { return integer(p, m, 1); }
  static PAdic integer(std::int64_t p, int m, std::int64_t n);
  static PAdic rational(std::int64_t p, int m, std::int64_t num,
                        std::int64_t den);
  // p^val * unit with unit a unit residue; rel defaults to the context m.
  static PAdic unit_power(std::int64_t p, int m, int val, std::uint64_t unit);
  // Value known to be divisible by p^bound and otherwise unknown.
  static PAdic vanished(std::int64_t p, int m, int bound);

  std::int64_t prime() const { return p_; }
  int context_precision() const { return m_; }
  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::Zero; }
  bool is_vanished() const { return kind_ == Kind::Vanished; }
  bool is_regular() const { return kind_ == Kind::Regular; }

  // Exact valuation. Throws precision_error for Vanished, and
  // std::domain_error for exact zero (v(0) = +infinity).
  int valuation() const;
  // Lower bound on the valuation; valid for every state.
  int valuation_bound() const;
  int relative_precision() const { return rel_; }
  std::uint64_t unit() const { return unit_; }

  // |x|_p = p^{-v}. 0 for exact zero; throws precision_error for Vanished.
  double norm() const;

  PAdic operator-() const;
  PAdic operator+(const PAdic& o) const;
  PAdic operator-(const PAdic& o) const;
  PAdic operator*(const PAdic& o) const;
  PAdic operator/(const PAdic& o) const;

  // x == y at the available precision, i.e. x - y is not Regular.
  bool equal_at_precision(const PAdic& o) const;

  // Residue of x modulo p^k, for x in Z_p (val >= 0). Throws
  // precision_error if the inputs' precision does not pin it down.
  std::uint64_t residue(int k) const;

  std::string to_string() const;

 private:
  PAdic(std::int64_t p, int m, Kind kind, int val, int rel, std::uint64_t unit)
      : p_(p), m_(m), kind_(kind), val_(val), rel_(rel), unit_(unit) {}

  void check_compatible(const PAdic& o) const;
  static PAdic make_regular(std::int64_t p, int m, long val, int rel,
                            std::uint64_t unit);

  std::int64_t p_;
  std::int32_t m_;
  Kind kind_;
  std::int32_t val_;   // Regular: exact valuation; Vanished: lower bound
  std::int32_t rel_;   // known unit digits
  std::uint64_t unit_; // residue in (Z/p^rel)^x, 0 for Zero/Vanished
};

inline bool operator==(const PAdic& a, const PAdic& b) {
  return a.equal_at_precision(b);
}

}  // namespace padiclab
