#include "padiclab/padic.hpp"

#include <algorithm>
#include <cmath>

namespace padiclab {

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t mod) {
  return static_cast<std::uint64_t>((u128(a) * b) % mod);
}

}  // namespace

bool is_supported_prime(std::int64_t p) {
  return p == 5 || p == 7 || p == 11 || p == 13;
}

int max_precision(std::int64_t p) {
  const std::uint64_t cap = (std::uint64_t{1} << 62);
  int k = 0;
  u128 acc = 1;
  while (acc * static_cast<std::uint64_t>(p) < cap) {
    acc *= static_cast<std::uint64_t>(p);
    ++k;
  }
  return k;
}

std::uint64_t pow_u64(std::int64_t p, int k) {
  if (k < 0) throw std::invalid_argument("pow_u64: negative exponent");
  u128 acc = 1;
  for (int i = 0; i < k; ++i) {
    acc *= static_cast<std::uint64_t>(p);
    if (acc >= (u128(1) << 63)) throw std::overflow_error("pow_u64 overflow");
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t inv_mod_pk(std::uint64_t a, std::int64_t p, int k) {
  const std::int64_t mod = static_cast<std::int64_t>(pow_u64(p, k));
  std::int64_t r0 = mod, r1 = static_cast<std::int64_t>(a % mod);
  std::int64_t t0 = 0, t1 = 1;
  while (r1 != 0) {
    std::int64_t q = r0 / r1;
    std::int64_t r2 = r0 - q * r1;
    r0 = r1;
    r1 = r2;
    std::int64_t t2 =
        t0 - static_cast<std::int64_t>((__int128(q) * t1) % mod);
    t0 = t1;
    t1 = t2 % mod;
  }
  if (r0 != 1) throw std::domain_error("inv_mod_pk: not a unit");
  std::int64_t r = t0 % mod;
  if (r < 0) r += mod;
  return static_cast<std::uint64_t>(r);
}

PAdic PAdic::zero(std::int64_t p, int m) {
  PAdic x(p, m, Kind::Zero, 0, 0, 0);
  return x;
}

PAdic PAdic::make_regular(std::int64_t p, int m, long val, int rel,
                          std::uint64_t unit) {
  if (rel <= 0) return vanished(p, m, static_cast<int>(val));
  if (val > std::numeric_limits<std::int32_t>::max() ||
      val < std::numeric_limits<std::int32_t>::min())
    throw std::overflow_error("PAdic valuation overflow");
  return PAdic(p, m, Kind::Regular, static_cast<int>(val), rel, unit);
}

PAdic PAdic::integer(std::int64_t p, int m, std::int64_t n) {
  if (!is_supported_prime(p)) throw std::invalid_argument("unsupported prime");
  if (m < 1 || m > max_precision(p))
    throw std::invalid_argument("precision out of range");
  if (n == 0) return zero(p, m);
  bool neg = n < 0;
  std::uint64_t v = neg ? static_cast<std::uint64_t>(-(n + 1)) + 1
                        : static_cast<std::uint64_t>(n);
  int val = 0;
  while (v % static_cast<std::uint64_t>(p) == 0) {
    v /= static_cast<std::uint64_t>(p);
    ++val;
  }
  std::uint64_t pk = pow_u64(p, m);
  std::uint64_t u = v % pk;  // coprime to p, hence nonzero
  if (neg) u = pk - u;
  return make_regular(p, m, val, m, u);
}

PAdic PAdic::rational(std::int64_t p, int m, std::int64_t num,
                      std::int64_t den) {
  if (den == 0) throw std::domain_error("division by zero");
  if (num == 0) return zero(p, m);
  PAdic n = integer(p, m, num);
  PAdic d = integer(p, m, den);
  return n / d;
}

PAdic PAdic::unit_power(std::int64_t p, int m, int val, std::uint64_t unit) {
  if (!is_supported_prime(p)) throw std::invalid_argument("unsupported prime");
  if (m < 1 || m > max_precision(p))
    throw std::invalid_argument("precision out of range");
  std::uint64_t pk = pow_u64(p, m);
  unit %= pk;
  if (unit == 0 || unit % static_cast<std::uint64_t>(p) == 0)
    throw std::invalid_argument("unit_power: residue not a unit");
  return PAdic(p, m, Kind::Regular, val, m, unit);
}

PAdic PAdic::vanished(std::int64_t p, int m, int bound) {
  return PAdic(p, m, Kind::Vanished, bound, 0, 0);
}

int PAdic::valuation() const {
  if (kind_ == Kind::Regular) return val_;
  if (kind_ == Kind::Zero)
    throw std::domain_error("valuation of exact zero is +infinity");
  throw precision_error("valuation indeterminate: only known >= " +
                        std::to_string(val_));
}

int PAdic::valuation_bound() const {
  if (kind_ == Kind::Zero) return std::numeric_limits<std::int32_t>::max();
  return val_;
}

double PAdic::norm() const {
  if (kind_ == Kind::Zero) return 0.0;
  if (kind_ == Kind::Vanished)
    throw precision_error("norm indeterminate: valuation only known >= " +
                          std::to_string(val_));
  return std::pow(static_cast<double>(p_), -static_cast<double>(val_));
}

void PAdic::check_compatible(const PAdic& o) const {
  if (p_ == 0 || o.p_ == 0)
    throw std::invalid_argument("operation on default-constructed PAdic");
  if (p_ != o.p_ || m_ != o.m_)
    throw std::invalid_argument("mixed p-adic contexts");
}

PAdic PAdic::operator-() const {
  if (kind_ != Kind::Regular) return *this;
  std::uint64_t pk = pow_u64(p_, rel_);
  return PAdic(p_, m_, Kind::Regular, val_, rel_, (pk - unit_) % pk);
}

PAdic PAdic::operator+(const PAdic& o) const {
  check_compatible(o);
  if (kind_ == Kind::Zero) return o;
  if (o.kind_ == Kind::Zero) return *this;

  if (kind_ == Kind::Vanished || o.kind_ == Kind::Vanished) {
    if (kind_ == Kind::Vanished && o.kind_ == Kind::Vanished)
      return vanished(p_, m_, std::min(val_, o.val_));
    const PAdic& reg = (kind_ == Kind::Regular) ? *this : o;
    const PAdic& van = (kind_ == Kind::Regular) ? o : *this;
    if (reg.val_ < van.val_) {
      // |sum| = |reg| exactly; digits above the vanished bound are unknown.
      int rel = std::min<int>(reg.rel_, van.val_ - reg.val_);
      std::uint64_t u = reg.unit_ % pow_u64(p_, rel);
      return make_regular(p_, m_, reg.val_, rel, u);
    }
    return vanished(p_, m_, van.val_);
  }

  const PAdic& lo = (val_ <= o.val_) ? *this : o;
  const PAdic& hi = (val_ <= o.val_) ? o : *this;
  long shift = static_cast<long>(hi.val_) - lo.val_;
  // Absolute precision of the sum, relative to p^{lo.val}.
  long rel_cap = std::min<long>(lo.rel_, shift + hi.rel_);
  if (rel_cap <= 0) return vanished(p_, m_, lo.val_);
  if (shift >= rel_cap) {
    std::uint64_t u = lo.unit_ % pow_u64(p_, static_cast<int>(rel_cap));
    return make_regular(p_, m_, lo.val_, static_cast<int>(rel_cap), u);
  }
  std::uint64_t pk = pow_u64(p_, static_cast<int>(rel_cap));
  std::uint64_t shifted =
      mulmod(hi.unit_ % pk, pow_u64(p_, static_cast<int>(shift)), pk);
  std::uint64_t s = (lo.unit_ % pk + shifted) % pk;
  if (s == 0) return vanished(p_, m_, lo.val_ + static_cast<int>(rel_cap));
  int c = 0;
  while (s % static_cast<std::uint64_t>(p_) == 0) {
    s /= static_cast<std::uint64_t>(p_);
    ++c;
  }
  return make_regular(p_, m_, lo.val_ + c, static_cast<int>(rel_cap) - c, s);
}

PAdic PAdic::operator-(const PAdic& o) const { return *this + (-o); }

PAdic PAdic::operator*(const PAdic& o) const {
  check_compatible(o);
  if (kind_ == Kind::Zero || o.kind_ == Kind::Zero) return zero(p_, m_);
  if (kind_ == Kind::Vanished || o.kind_ == Kind::Vanished)
    return vanished(p_, m_, val_ + o.val_);
  int rel = std::min(rel_, o.rel_);
  std::uint64_t pk = pow_u64(p_, rel);
  std::uint64_t u = mulmod(unit_ % pk, o.unit_ % pk, pk);
  return make_regular(p_, m_, static_cast<long>(val_) + o.val_, rel, u);
}

PAdic PAdic::operator/(const PAdic& o) const {
  check_compatible(o);
  if (o.kind_ == Kind::Zero) throw std::domain_error("division by zero");
  if (o.kind_ == Kind::Vanished)
    throw precision_error("division by a value of indeterminate valuation");
  if (kind_ == Kind::Zero) return zero(p_, m_);
  if (kind_ == Kind::Vanished) return vanished(p_, m_, val_ - o.val_);
  int rel = std::min(rel_, o.rel_);
  std::uint64_t pk = pow_u64(p_, rel);
  std::uint64_t u = mulmod(unit_ % pk, inv_mod_pk(o.unit_ % pk, p_, rel), pk);
  return make_regular(p_, m_, static_cast<long>(val_) - o.val_, rel, u);
}

bool PAdic::equal_at_precision(const PAdic& o) const {
  return !(*this - o).is_regular();
}

std::uint64_t PAdic::residue(int k) const {
  if (k < 0) throw std::invalid_argument("negative residue depth");
  if (k == 0) return 0;
  if (kind_ == Kind::Zero) return 0;
  if (kind_ == Kind::Vanished) {
    if (val_ >= k) return 0;
    throw precision_error("residue not determined at this precision");
  }
  if (val_ < 0) throw std::domain_error("residue of a non-integer");
  if (val_ >= k) return 0;
  if (val_ + rel_ < k)
    throw precision_error("residue not determined at this precision");
  std::uint64_t pk = pow_u64(p_, k);
  return mulmod(unit_ % pk, pow_u64(p_, val_), pk);
}

std::string PAdic::to_string() const {
  if (kind_ == Kind::Zero) return "0";
  if (kind_ == Kind::Vanished)
    return "O(" + std::to_string(p_) + "^" + std::to_string(val_) + ")";
  return std::to_string(p_) + "^" + std::to_string(val_) + "*" +
         std::to_string(unit_) + " (mod " + std::to_string(p_) + "^" +
         std::to_string(val_ + rel_) + ")";
}

}  // namespace padiclab
