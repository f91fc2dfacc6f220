#include "padiclab/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "padiclab/padic.hpp"

namespace padiclab {

namespace {

std::uint32_t mul_mod(std::uint32_t a, std::uint32_t b, std::uint32_t mod) {
  return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) % mod);
}

FiniteQuotient::Mat mat_mul(const FiniteQuotient::Mat& x,
                            const FiniteQuotient::Mat& y, std::uint32_t mod) {
  auto at = [&](const FiniteQuotient::Mat& m, int i) {
    return static_cast<std::uint32_t>(m[static_cast<std::size_t>(i)]);
  };
  std::uint32_t a = (mul_mod(at(x, 0), at(y, 0), mod) +
                     mul_mod(at(x, 1), at(y, 2), mod)) % mod;
  std::uint32_t b = (mul_mod(at(x, 0), at(y, 1), mod) +
                     mul_mod(at(x, 1), at(y, 3), mod)) % mod;
  std::uint32_t c = (mul_mod(at(x, 2), at(y, 0), mod) +
                     mul_mod(at(x, 3), at(y, 2), mod)) % mod;
  std::uint32_t d = (mul_mod(at(x, 2), at(y, 1), mod) +
                     mul_mod(at(x, 3), at(y, 3), mod)) % mod;
  return {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
          static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(d)};
}

FiniteQuotient::Mat mat_inv(const FiniteQuotient::Mat& x, std::uint32_t mod) {
  // det = 1, so the adjugate is the inverse.
  auto neg = [&](std::uint8_t v) {
    return static_cast<std::uint8_t>((mod - v) % mod);
  };
  return {x[3], neg(x[1]), neg(x[2]), x[0]};
}

}  // namespace

std::uint64_t FiniteQuotient::pack(const Mat* g) const {
  std::uint64_t key = 0;
  for (int f = 0; f < factors_; ++f)
    for (int i = 0; i < 4; ++i)
      key = key * modulus_ + g[f][static_cast<std::size_t>(i)];
  return key;
}

FiniteQuotient::FiniteQuotient(std::int64_t p, int level, int factors,
                               std::size_t size_cap)
    : p_(p), n_(level), factors_(factors) {
  if (!is_supported_prime(p)) throw std::invalid_argument("unsupported prime");
  if (level < 1 || pow_u64(p, level) > 255)
    throw std::invalid_argument("level out of range for the table model");
  if (factors != 1 && factors != 2)
    throw std::invalid_argument("factors must be 1 or 2");
  modulus_ = static_cast<std::uint32_t>(pow_u64(p, level));

  // |SL2(Z/p^n)| = p^{3n} (1 - p^{-2}).
  std::size_t single = static_cast<std::size_t>(
      pow_u64(p, 3 * level) / (p * p) * (p * p - 1));
  std::size_t expect = factors == 1 ? single : single * single;
  if (expect > size_cap)
    throw std::invalid_argument("quotient model exceeds the size gate");

  std::vector<Mat> singles;
  singles.reserve(single);
  for (std::uint32_t a = 0; a < modulus_; ++a)
    for (std::uint32_t b = 0; b < modulus_; ++b)
      for (std::uint32_t c = 0; c < modulus_; ++c)
        for (std::uint32_t d = 0; d < modulus_; ++d) {
          std::uint32_t det = (mul_mod(a, d, modulus_) + modulus_ -
                               mul_mod(b, c, modulus_)) % modulus_;
          if (det == 1)
            singles.push_back({static_cast<std::uint8_t>(a),
                               static_cast<std::uint8_t>(b),
                               static_cast<std::uint8_t>(c),
                               static_cast<std::uint8_t>(d)});
        }
  if (singles.size() != single)
    throw std::logic_error("quotient group size mismatch");

  if (factors_ == 1) {
    elems_ = std::move(singles);
  } else {
    elems_.reserve(expect * 2);
    for (const auto& l : singles)
      for (const auto& r : singles) {
        elems_.push_back(l);
        elems_.push_back(r);
      }
  }

  const std::size_t count = size();
  keys_.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    keys_[i] = pack(&elems_[i * static_cast<std::size_t>(factors_)]);
  std::vector<std::uint32_t> order(count);
  for (std::size_t i = 0; i < count; ++i)
    order[i] = static_cast<std::uint32_t>(i);
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    return keys_[x] < keys_[y];
  });
  std::vector<std::uint64_t> sorted(count);
  for (std::size_t i = 0; i < count; ++i) sorted[i] = keys_[order[i]];
  key_to_index_ = std::move(order);
  keys_ = std::move(sorted);

  Mat id{1, 0, 0, 1};
  std::vector<Mat> idg(static_cast<std::size_t>(factors_), id);
  identity_ = index_of(idg);

  // Coset classes under K[m]: x ~ y iff they reduce equally mod p^m.
  coset_ids_.resize(static_cast<std::size_t>(n_) + 1);
  coset_counts_.resize(static_cast<std::size_t>(n_) + 1);
  for (int m = 0; m <= n_; ++m) {
    std::uint32_t pm = static_cast<std::uint32_t>(pow_u64(p_, m));
    std::vector<std::uint64_t> reduced(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t key = 0;
      for (int f = 0; f < factors_; ++f)
        for (int e = 0; e < 4; ++e)
          key = key * pm +
                matrix(i, f)[static_cast<std::size_t>(e)] % pm;
      reduced[i] = key;
    }
    std::vector<std::uint64_t> uniq(reduced);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    coset_counts_[static_cast<std::size_t>(m)] = uniq.size();
    auto& ids = coset_ids_[static_cast<std::size_t>(m)];
    ids.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      ids[i] = static_cast<std::uint32_t>(
          std::lower_bound(uniq.begin(), uniq.end(), reduced[i]) -
          uniq.begin());
    }
  }
}

std::size_t FiniteQuotient::index_of(const std::vector<Mat>& g) const {
  if (g.size() != static_cast<std::size_t>(factors_))
    throw std::invalid_argument("wrong factor count");
  std::uint64_t key = pack(g.data());
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key)
    throw std::invalid_argument("element not in the quotient group");
  return key_to_index_[static_cast<std::size_t>(it - keys_.begin())];
}

std::size_t FiniteQuotient::multiply(std::size_t i, std::size_t j) const {
  std::vector<Mat> out(static_cast<std::size_t>(factors_));
  for (int f = 0; f < factors_; ++f)
    out[static_cast<std::size_t>(f)] =
        mat_mul(matrix(i, f), matrix(j, f), modulus_);
  return index_of(out);
}

std::size_t FiniteQuotient::inverse(std::size_t i) const {
  std::vector<Mat> out(static_cast<std::size_t>(factors_));
  for (int f = 0; f < factors_; ++f)
    out[static_cast<std::size_t>(f)] = mat_inv(matrix(i, f), modulus_);
  return index_of(out);
}

std::vector<std::size_t> FiniteQuotient::level_subgroup(int m) const {
  std::vector<std::size_t> out;
  std::uint32_t id_class = coset_id(identity_, m);
  for (std::size_t i = 0; i < size(); ++i)
    if (coset_id(i, m) == id_class) out.push_back(i);
  return out;
}

double QuotientFunction::l2_norm(const FiniteQuotient& q) const {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum / static_cast<double>(q.size()));
}

double QuotientFunction::sup_norm() const {
  double best = 0.0;
  for (double v : values) best = std::max(best, std::fabs(v));
  return best;
}

std::string QuotientFunction::to_csv() const {
  std::ostringstream out;
  out << "# elements=" << values.size() << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i)
    out << i << "," << values[i] << "\n";
  return out.str();
}

QuotientFunction QuotientFunction::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  std::size_t n = 0;
  if (std::sscanf(line.c_str(), "# elements=%zu", &n) != 1)
    throw std::invalid_argument("missing '# elements=<n>' header");
  QuotientFunction f;
  f.values.assign(n, 0.0);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t idx = 0;
    double v = 0;
    if (std::sscanf(line.c_str(), "%zu,%lf", &idx, &v) != 2 || idx >= n)
      throw std::invalid_argument("bad CSV row: " + line);
    f.values[idx] = v;
  }
  return f;
}

QuotientFunction avg_project(const FiniteQuotient& q,
                             const QuotientFunction& f, int m) {
  if (m < 0 || m > q.level()) throw std::invalid_argument("level mismatch");
  if (f.values.size() != q.size())
    throw std::invalid_argument("function size mismatch");
  std::size_t classes = q.coset_count(m);
  std::vector<double> sums(classes, 0.0);
  std::vector<std::uint32_t> counts(classes, 0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    sums[q.coset_id(i, m)] += f.values[i];
    counts[q.coset_id(i, m)] += 1;
  }
  QuotientFunction out;
  out.values.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    out.values[i] = sums[q.coset_id(i, m)] / counts[q.coset_id(i, m)];
  return out;
}

QuotientFunction pr_project(const FiniteQuotient& q, const QuotientFunction& f,
                            int m) {
  if (m == 0) return avg_project(q, f, 0);
  QuotientFunction hi = avg_project(q, f, m);
  QuotientFunction lo = avg_project(q, f, m - 1);
  for (std::size_t i = 0; i < hi.values.size(); ++i)
    hi.values[i] -= lo.values[i];
  return hi;
}

double sobolev_norm(const FiniteQuotient& q, const QuotientFunction& f,
                    int d) {
  if (d < 0) throw std::invalid_argument("degree must be >= 0");
  double total = 0.0;
  for (int m = 0; m <= q.level(); ++m) {
    double nm = pr_project(q, f, m).l2_norm(q);
    total += std::pow(static_cast<double>(q.prime()),
                      static_cast<double>(m) * d) * nm * nm;
  }
  return std::sqrt(total);
}

QuotientFunction translate(const FiniteQuotient& q, const QuotientFunction& f,
                           std::size_t g) {
  std::size_t ginv = q.inverse(g);
  QuotientFunction out;
  out.values.resize(q.size());
  for (std::size_t x = 0; x < q.size(); ++x)
    out.values[x] = f.values[q.multiply(ginv, x)];
  return out;
}

SobolevConstants derive_constants(const FiniteQuotient& q, int d) {
  // For a K[m]-invariant h: |h(x)|^2 <= [G:K[m]] ||h||_2^2, so a
  // Cauchy-Schwarz split of f = sum_m pr[m] f yields
  //   ||f||_inf <= (sum_m [G:K[m]] p^{-m d})^{1/2} S_d(f).
  const double pd = static_cast<double>(q.prime());
  SobolevConstants k;
  double s1sq = 0.0;
  for (int m = 0; m <= q.level(); ++m)
    s1sq += static_cast<double>(q.coset_count(m)) *
            std::pow(pd, -static_cast<double>(m) * d);
  k.s1 = std::sqrt(s1sq);

  // Translation by g in K[r] fixes pr[m] f for m <= r; the surviving tail
  // gives ||g.f - f||_inf <= 2 p^r (sum_{m>r} [G:K[m]] p^{-m d})^{1/2}
  //   * p^{-r} S_d(f).
  k.s3.resize(static_cast<std::size_t>(q.level()) + 1, 0.0);
  for (int r = 0; r <= q.level(); ++r) {
    double tail = 0.0;
    for (int m = r + 1; m <= q.level(); ++m)
      tail += static_cast<double>(q.coset_count(m)) *
              std::pow(pd, -static_cast<double>(m) * d);
    k.s3[static_cast<std::size_t>(r)] =
        2.0 * std::pow(pd, r) * std::sqrt(tail);
  }

  // Product bound: split f1 across levels; low levels multiply into
  // pr[m] f2 with sup-norm control, high levels keep their own l2 mass.
  double tailsum = static_cast<double>(q.level() + 1) /
                   (1.0 - std::pow(pd, -static_cast<double>(d)));
  k.s4 = k.s1 * (1.0 + std::sqrt(tailsum));
  return k;
}

SobolevPropertyReport verify_properties(const FiniteQuotient& q,
                                        const QuotientFunction& f,
                                        const QuotientFunction& f2,
                                        std::size_t g, int d, int r) {
  SobolevPropertyReport rep;
  rep.d = d;
  rep.d_above_threshold = d >= q.dim_model() + 2;
  rep.constants = derive_constants(q, d);

  const double sf = sobolev_norm(q, f, d);
  QuotientFunction gf = translate(q, f, g);

  // Invariance: exact for every group element of the model.
  double sgf = sobolev_norm(q, gf, d);
  rep.s2_error = std::fabs(sgf - sf) / std::max(1e-300, sf);

  rep.s1_ratio = f.sup_norm() / std::max(1e-300, rep.constants.s1 * sf);

  // g must lie in K[r] for the continuity bound.
  if (q.coset_id(g, r) != q.coset_id(q.identity_index(), r))
    throw std::invalid_argument("g must lie in K[r] for the S3 check");
  double diff = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    diff = std::max(diff, std::fabs(gf.values[i] - f.values[i]));
  double s3_bound = rep.constants.s3[static_cast<std::size_t>(r)] *
                    std::pow(static_cast<double>(q.prime()), -r) * sf;
  rep.s3_ratio = diff / std::max(1e-300, s3_bound);
  if (diff == 0.0) rep.s3_ratio = 0.0;

  QuotientFunction prod;
  prod.values.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    prod.values[i] = f.values[i] * f2.values[i];
  double sprod = sobolev_norm(q, prod, d);
  double s4_bound = rep.constants.s4 * sf * sobolev_norm(q, f2, d);
  rep.s4_ratio = sprod / std::max(1e-300, s4_bound);

  rep.pass = rep.d_above_threshold && rep.s2_error <= 1e-12 &&
             rep.s1_ratio <= 1.0 + 1e-9 && rep.s3_ratio <= 1.0 + 1e-9 &&
             rep.s4_ratio <= 1.0 + 1e-9;
  return rep;
}

}  // namespace padiclab
