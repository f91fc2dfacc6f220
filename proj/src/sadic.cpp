#include "padiclab/sadic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace padiclab {

namespace {

using boost::multiprecision::abs;
using boost::multiprecision::denominator;
using boost::multiprecision::gcd;
using boost::multiprecision::numerator;
using boost::multiprecision::pow;

BigInt big_pow(std::int64_t b, long e) { return pow(BigInt(b), static_cast<unsigned>(e)); }

}  // namespace

PlaceSet::PlaceSet(std::vector<std::int64_t> ps) : primes(std::move(ps)) {
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
  for (std::int64_t q : primes)
    if (q < 2) throw std::invalid_argument("invalid prime in place set");
}

bool PlaceSet::contains(std::int64_t q) const {
  return std::binary_search(primes.begin(), primes.end(), q);
}

long rational_valuation(const Rational& x, std::int64_t q) {
  if (x == 0) throw std::domain_error("valuation of zero");
  long v = 0;
  BigInt num = numerator(x), den = denominator(x);
  while (num % q == 0) {
    num /= q;
    ++v;
  }
  while (den % q == 0) {
    den /= q;
    --v;
  }
  return v;
}

HeightRecord place_norms(const SAdicScalar& x) {
  if (x.value == 0) throw std::domain_error("height of zero");
  HeightRecord rec;
  rec.inf_abs = x.value < 0 ? Rational(-x.value) : x.value;
  rec.s_norm = rec.inf_abs;
  rec.s_height = rec.inf_abs;
  for (std::int64_t q : x.places.primes) {
    long v = rational_valuation(x.value, q);
    Rational a = v >= 0 ? Rational(1, big_pow(q, v)) : Rational(big_pow(q, -v));
    rec.finite_abs.push_back(a);
    rec.s_norm = std::max(rec.s_norm, a);
    rec.s_height *= a;
  }
  // Product over all places: walk the primes of numerator and denominator.
  rec.full_height = rec.inf_abs;
  BigInt num = abs(numerator(x.value)), den = denominator(x.value);
  auto strip = [&](BigInt n, int sign) {
    for (BigInt q = 2; q * q <= n; ++q) {
      while (n % q == 0) {
        n /= q;
        rec.full_height *= sign > 0 ? Rational(1, q) : Rational(q);
      }
    }
    if (n > 1)
      rec.full_height *= sign > 0 ? Rational(1, n) : Rational(n);
  };
  strip(num, +1);
  strip(den, -1);

  rec.s_integer = true;
  BigInt d = den;
  for (std::int64_t q : x.places.primes)
    while (d % q == 0) d /= q;
  rec.s_integer = (d == 1);
  return rec;
}

bool inverse_norm_check(const SAdicScalar& x) {
  HeightRecord rec = place_norms(x);
  if (!rec.s_integer)
    throw std::domain_error("inverse_norm_check: input is not an S-integer");
  SAdicScalar inv{Rational(1) / x.value, x.places};
  HeightRecord irec = place_norms(inv);
  Rational bound = 1;
  for (std::size_t i = 1; i < x.places.size(); ++i) bound *= rec.s_norm;
  return irec.s_norm <= bound;
}

namespace {

// Integer row echelon on the image block of [A^T | I]; rows whose image
// part vanishes carry the kernel lattice in the identity block.
std::vector<IntVector> kernel_rows(const IntMatrix& A) {
  const std::size_t m = A.size();
  const std::size_t n = m == 0 ? 0 : A[0].size();
  std::vector<IntVector> rows(n, IntVector(m + n, BigInt(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) rows[i][j] = A[j][i];
    rows[i][m + i] = 1;
  }
  std::size_t rank_col = 0;
  for (std::size_t col = 0; col < m && rank_col < n; ++col) {
    // gcd-style elimination keeps everything integral
    for (;;) {
      std::size_t pivot = n;
      for (std::size_t r = rank_col; r < n; ++r) {
        if (rows[r][col] == 0) continue;
        if (pivot == n || abs(rows[r][col]) < abs(rows[pivot][col])) pivot = r;
      }
      if (pivot == n) break;
      std::swap(rows[rank_col], rows[pivot]);
      bool reduced = true;
      for (std::size_t r = rank_col + 1; r < n; ++r) {
        if (rows[r][col] == 0) continue;
        BigInt q = rows[r][col] / rows[rank_col][col];
        if (q != 0)
          for (std::size_t c = 0; c < m + n; ++c)
            rows[r][c] -= q * rows[rank_col][c];
        if (rows[r][col] != 0) reduced = false;
      }
      if (reduced) {
        ++rank_col;
        break;
      }
    }
  }
  std::vector<IntVector> kernel;
  for (std::size_t r = 0; r < n; ++r) {
    bool zero_image = true;
    for (std::size_t j = 0; j < m; ++j)
      if (rows[r][j] != 0) zero_image = false;
    if (!zero_image) continue;
    IntVector v(rows[r].begin() + static_cast<long>(m), rows[r].end());
    kernel.push_back(std::move(v));
  }
  return kernel;
}

Rational dot(const IntVector& a, const IntVector& b) {
  BigInt s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return Rational(s);
}

}  // namespace

std::vector<IntVector> integer_kernel_basis(const IntMatrix& A,
                                            const BigInt& T) {
  if (A.empty()) throw std::invalid_argument("empty matrix");
  const std::size_t n = A[0].size();
  for (const auto& row : A) {
    if (row.size() != n) throw std::invalid_argument("ragged matrix");
    for (const auto& e : row)
      if (abs(e) > T) throw std::invalid_argument("entry exceeds the bound T");
  }
  auto basis = kernel_rows(A);

  // Pairwise size reduction (no swaps needed at this scale).
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (std::size_t j = 0; j < basis.size(); ++j) {
        if (i == j) continue;
        Rational denom = dot(basis[j], basis[j]);
        if (denom == 0) continue;
        Rational mu = dot(basis[i], basis[j]) / denom;
        BigInt q = numerator(mu) / denominator(mu);  // truncated quotient
        Rational frac = mu - Rational(q);
        if (frac > Rational(1, 2)) q += 1;
        if (frac < Rational(-1, 2)) q -= 1;
        if (q != 0)
          for (std::size_t c = 0; c < n; ++c) basis[i][c] -= q * basis[j][c];
      }
    }
  }

  // Verify exactness and the norm budget.
  BigInt budget = pow(T < 2 ? BigInt(2) : T, static_cast<unsigned>(3 * n));
  for (const auto& v : basis) {
    for (const auto& row : A) {
      BigInt s = 0;
      for (std::size_t c = 0; c < n; ++c) s += row[c] * v[c];
      if (s != 0) throw std::logic_error("kernel vector fails A v = 0");
    }
    for (const auto& e : v)
      if (abs(e) > budget)
        throw std::logic_error("kernel basis vector exceeds the norm budget");
  }
  return basis;
}

bool is_saturated_basis(const std::vector<IntVector>& basis) {
  if (basis.empty()) return true;
  const std::size_t s = basis.size();
  const std::size_t n = basis[0].size();
  if (s > n) return false;
  // gcd over all s x s minors (exhaustive; intended for small instances).
  std::vector<std::size_t> cols(s);
  for (std::size_t i = 0; i < s; ++i) cols[i] = i;
  BigInt g = 0;
  for (;;) {
    // minor on `cols` by fraction-free expansion
    IntMatrix sub(s, IntVector(s));
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) sub[i][j] = basis[i][cols[j]];
    // Bareiss determinant
    BigInt det = 1;
    bool singular = false;
    BigInt prev = 1;
    for (std::size_t k = 0; k < s && !singular; ++k) {
      if (sub[k][k] == 0) {
        std::size_t swap_row = s;
        for (std::size_t r = k + 1; r < s; ++r)
          if (sub[r][k] != 0) {
            swap_row = r;
            break;
          }
        if (swap_row == s) {
          singular = true;
          break;
        }
        std::swap(sub[k], sub[swap_row]);
        det = -det;
      }
      for (std::size_t r = k + 1; r < s; ++r)
        for (std::size_t c = k + 1; c < s; ++c)
          sub[r][c] = (sub[r][c] * sub[k][k] - sub[r][k] * sub[k][c]) / prev;
      prev = sub[k][k];
    }
    if (!singular) {
      det *= sub[s - 1][s - 1];
      g = gcd(g, abs(det));
      if (g == 1) return true;
    }
    // next combination
    std::size_t i = s;
    while (i > 0) {
      --i;
      if (cols[i] != i + n - s) {
        ++cols[i];
        for (std::size_t j = i + 1; j < s; ++j) cols[j] = cols[j - 1] + 1;
        break;
      }
      if (i == 0) return g == 1;
    }
    if (s == 0) break;
  }
  return g == 1;
}

NearestKernelResult nearest_kernel_point(const IntMatrix& A,
                                         const RatVector& w) {
  const std::size_t n = A.empty() ? w.size() : A[0].size();
  if (w.size() != n) throw std::invalid_argument("dimension mismatch");
  BigInt t = 2;
  for (const auto& row : A)
    for (const auto& e : row) {
      BigInt ae = abs(e);
      if (ae > t) t = ae;
    }
  auto basis = integer_kernel_basis(A, t);

  NearestKernelResult res;
  res.point.assign(n, Rational(0));
  const std::size_t s = basis.size();
  if (s > 0) {
    // Solve (B B^T) y = B w exactly, then w0 = B^T y.
    std::vector<RatVector> gram(s, RatVector(s + 1, Rational(0)));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) gram[i][j] = dot(basis[i], basis[j]);
      Rational rhs = 0;
      for (std::size_t c = 0; c < n; ++c) rhs += Rational(basis[i][c]) * w[c];
      gram[i][s] = rhs;
    }
    // Gaussian elimination over Q.
    for (std::size_t k = 0; k < s; ++k) {
      std::size_t pivot = k;
      while (pivot < s && gram[pivot][k] == 0) ++pivot;
      if (pivot == s) throw std::logic_error("gram matrix singular");
      std::swap(gram[k], gram[pivot]);
      for (std::size_t r = 0; r < s; ++r) {
        if (r == k || gram[r][k] == 0) continue;
        Rational f = gram[r][k] / gram[k][k];
        for (std::size_t c = k; c <= s; ++c) gram[r][c] -= f * gram[k][c];
      }
    }
    for (std::size_t i = 0; i < s; ++i) {
      Rational yi = gram[i][s] / gram[i][i];
      for (std::size_t c = 0; c < n; ++c)
        res.point[c] += yi * Rational(basis[i][c]);
    }
  }

  double dist = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double d = (w[c] - res.point[c]).convert_to<double>();
    dist += d * d;
  }
  res.distance = std::sqrt(dist);

  const std::size_t mrows = A.size();
  Eigen::MatrixXd Ad(mrows, n);
  for (std::size_t i = 0; i < mrows; ++i)
    for (std::size_t j = 0; j < n; ++j)
      Ad(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          A[i][j].convert_to<double>();
  Eigen::VectorXd wd(n);
  for (std::size_t j = 0; j < n; ++j)
    wd(static_cast<Eigen::Index>(j)) = w[j].convert_to<double>();
  res.residual = (Ad * wd).norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ad);
  double smin = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    double sv = svd.singularValues()(i);
    if (sv > 1e-9) smin = sv;  // values are sorted descending
  }
  res.conditioning = smin > 0 ? 1.0 / smin : 0.0;
  return res;
}

IntMatrix parse_matrix_csv(const std::string& text) {
  IntMatrix out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    IntVector row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(BigInt(cell));
    if (!out.empty() && row.size() != out[0].size())
      throw std::invalid_argument("ragged CSV matrix");
    out.push_back(std::move(row));
  }
  if (out.empty()) throw std::invalid_argument("empty CSV matrix");
  return out;
}

RatVector parse_vector_csv(const std::string& text) {
  RatVector out;
  std::istringstream cells(text);
  std::string cell;
  while (std::getline(cells, cell, ',')) out.push_back(parse_rational(cell));
  if (out.empty()) throw std::invalid_argument("empty CSV vector");
  return out;
}

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(BigInt(text));
  BigInt num(text.substr(0, slash));
  BigInt den(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator");
  return Rational(num, den);
}

}  // namespace padiclab
