#include "padiclab/projection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "padiclab/balltree.hpp"
#include "padiclab/explog.hpp"

namespace padiclab {

namespace {

using u128 = unsigned __int128;

int val_of_residue(std::uint64_t x, std::int64_t p, int depth) {
  if (x == 0) return depth;
  int v = 0;
  while (x % static_cast<std::uint64_t>(p) == 0) {
    x /= static_cast<std::uint64_t>(p);
    ++v;
  }
  return v;
}

}  // namespace

PAdic xi(const PAdic& r, const RVec& w) {
  PAdic two = PAdic::integer(r.prime(), r.context_precision(), 2);
  return w.w12 - two * w.w11 * r - w.w21 * r * r;
}

std::uint64_t xi_residue(std::int64_t p, int m, std::uint64_t r,
                         const Residues& w) {
  const std::uint64_t pm = pow_u64(p, m);
  u128 acc = w[1];
  acc += u128(2) * (pm - w[0] % pm) % pm * (r % pm) % pm;
  acc += u128(pm - w[2] % pm) * (static_cast<u128>(r) * r % pm) % pm;
  return static_cast<std::uint64_t>(acc % pm);
}

ProjectionReport projection_theorem_scan(const PointSet& E,
                                         const ScanParams& prm) {
  if (E.dim() != 3) throw std::invalid_argument("scan needs a 3d point set");
  if (E.size() == 0) throw std::invalid_argument("empty point set");
  if (prm.l1 > prm.l0 || prm.l1 < 0 || prm.l0 > E.depth())
    throw std::invalid_argument("need 0 <= l1 <= l0 <= depth");
  if (prm.r_depth < prm.j_depth || prm.r_depth < 1)
    throw std::invalid_argument("r_depth must cover the parameter ball");

  const std::int64_t p = E.prime();
  const int m = E.depth();
  const std::size_t n = E.size();

  ProjectionReport rep;
  rep.p = p;
  rep.depth = prm.r_depth;
  rep.alpha = prm.alpha;
  rep.eps = prm.eps;

  // Hypothesis: E lives in B(0, b1) and its own profile constant at
  // exponent alpha (relative to b1) is the reference D'.
  bool contained = true;
  for (const auto& w : E.points())
    if (E.point_valuation(w) < prm.l1) contained = false;
  PBallTree tree(E);
  NonConcProfile prof = non_concentration_profile(tree, prm.l0, prm.l1);
  rep.hypothesis_constant = prof.min_constant(prm.alpha, p);
  rep.hypothesis_ok = contained;
  if (!contained && !prm.diagnostic)
    throw std::domain_error("hypothesis failure: E not contained in B(0, b1)");

  const double slack =
      prm.constant_slack_factor > 0 ? prm.constant_slack_factor
                                    : static_cast<double>(p);
  const double threshold = slack * std::max(1.0, rep.hypothesis_constant);
  const double exponent = prm.alpha - prm.eps;
  const std::size_t keep_quota = static_cast<std::size_t>(
      std::ceil((1.0 - 1.0 / static_cast<double>(p)) * static_cast<double>(n)));

  const std::uint64_t r_count = pow_u64(p, prm.r_depth - prm.j_depth);
  const std::uint64_t jstep = pow_u64(p, prm.j_depth);

  std::vector<std::uint64_t> proj(n);
  std::vector<double> personal(n);
  for (std::uint64_t idx = 0; idx < r_count; ++idx) {
    std::uint64_t r = (prm.j_center % jstep) + idx * jstep;
    for (std::size_t i = 0; i < n; ++i) proj[i] = xi_residue(p, m, r, E[i]);

    // Fiber counts per scale via sorting by residue mod p^k.
    std::vector<std::vector<std::uint32_t>> counts(
        static_cast<std::size_t>(prm.l0 - prm.l1) + 1,
        std::vector<std::uint32_t>(n));
    for (int k = prm.l1; k <= prm.l0; ++k) {
      const std::uint64_t pk = pow_u64(p, k);
      std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(n);
      for (std::size_t i = 0; i < n; ++i)
        keyed[i] = {proj[i] % pk, static_cast<std::uint32_t>(i)};
      std::sort(keyed.begin(), keyed.end());
      std::size_t i = 0;
      while (i < n) {
        std::size_t j = i;
        while (j < n && keyed[j].first == keyed[i].first) ++j;
        for (std::size_t t = i; t < j; ++t)
          counts[static_cast<std::size_t>(k - prm.l1)][keyed[t].second] =
              static_cast<std::uint32_t>(j - i);
        i = j;
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0;
      for (int k = prm.l1; k <= prm.l0; ++k) {
        double ratio =
            static_cast<double>(counts[static_cast<std::size_t>(k - prm.l1)][i]) /
            static_cast<double>(n);
        c = std::max(c, ratio * std::pow(static_cast<double>(p),
                                         exponent * static_cast<double>(k - prm.l1)));
      }
      personal[i] = c;
    }

    RRecord rec;
    rec.r = r;
    double kept_max = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (personal[i] <= threshold) {
        ++kept;
        kept_max = std::max(kept_max, personal[i]);
      }
    }
    rec.er_size = kept;
    rec.good = kept >= keep_quota;
    if (kept == 0) {
      // Fall back to the best point so the record stays informative.
      rec.constant = *std::min_element(personal.begin(), personal.end());
    } else {
      rec.constant = kept_max;
    }
    rec.constants.resize(static_cast<std::size_t>(prm.l0 - prm.l1) + 1, 0.0);
    for (int k = prm.l1; k <= prm.l0; ++k) {
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (personal[i] > threshold) continue;
        double ratio =
            static_cast<double>(counts[static_cast<std::size_t>(k - prm.l1)][i]) /
            static_cast<double>(n);
        worst = std::max(worst, ratio * std::pow(static_cast<double>(p),
                                                 exponent * static_cast<double>(k - prm.l1)));
      }
      rec.constants[static_cast<std::size_t>(k - prm.l1)] = worst;
    }
    rep.rs.push_back(std::move(rec));
  }

  const double atom_mass = std::pow(static_cast<double>(p), -prm.r_depth);
  for (const auto& rec : rep.rs) {
    if (rec.good) {
      rep.good_mass += atom_mass;
      rep.max_good_constant = std::max(rep.max_good_constant, rec.constant);
    } else {
      rep.exceptional_mass += atom_mass;
    }
  }
  return rep;
}

Rational quad_sublevel_measure_ints(std::int64_t p, std::int64_t a,
                                    std::int64_t b, std::int64_t c, int n,
                                    int depth) {
  if (n > 0) throw std::invalid_argument("need n <= 0");
  if (depth < -n) throw std::invalid_argument("depth must be at least -n");
  const std::uint64_t pd = pow_u64(p, depth);
  auto norm_mod = [&](std::int64_t x) {
    std::int64_t r = x % static_cast<std::int64_t>(pd);
    if (r < 0) r += static_cast<std::int64_t>(pd);
    return static_cast<std::uint64_t>(r);
  };
  const std::uint64_t ua = norm_mod(a), ub = norm_mod(b), uc = norm_mod(c);
  if (val_of_residue(ua, p, depth) == 0 || val_of_residue(ub, p, depth) == 0 ||
      val_of_residue(uc, p, depth) == 0) {
    // max(|a|,|b|,|c|) = 1 as required.
  } else {
    throw std::invalid_argument("coefficients must have max norm 1");
  }
  // The sublevel set is a union of depth-|n| classes; counting residues at
  // the full depth keeps a single code path.
  std::uint64_t count = 0;
  for (std::uint64_t t = 0; t < pd; ++t) {
    u128 f = (u128(ua) * t % pd) * t % pd;
    f = (f + u128(ub) * t + uc) % pd;
    if (val_of_residue(static_cast<std::uint64_t>(f), p, depth) >= -n) ++count;
  }
  // measure <= p^2 p^{n/2}, squared to stay in integers:
  // count^2 <= p^{2 depth + 4 + n}.
  using boost::multiprecision::cpp_int;
  cpp_int lhs = cpp_int(count) * count;
  cpp_int rhs = boost::multiprecision::pow(cpp_int(p), 2 * depth + 4 + n);
  if (lhs > rhs)
    throw std::logic_error("quadratic sublevel bound violated");
  return Rational(cpp_int(count), cpp_int(pd));
}

Rational quad_sublevel_measure(const PAdic& a, const PAdic& b, const PAdic& c,
                               int n, int depth) {
  auto to_int = [&](const PAdic& x) -> std::int64_t {
    if (x.is_zero()) return 0;
    if (x.valuation_bound() < 0)
      throw std::invalid_argument("coefficients must lie in Z_p");
    return static_cast<std::int64_t>(x.residue(depth));
  };
  return quad_sublevel_measure_ints(a.prime(), to_int(a), to_int(b), to_int(c),
                                    n, depth);
}

ShearResult shear_select(const PointSet& E) {
  if (E.dim() != 3) throw std::invalid_argument("shear needs a 3d point set");
  if (E.size() == 0) throw std::invalid_argument("empty point set");
  const std::int64_t p = E.prime();
  const int m = E.depth();
  // The shear pushes norm into the (1,2) coordinate at up to four extra
  // digits, so the image grid is four levels deeper; points are exact
  // integers and the images are computed without reduction.
  const int m_out = m + 4;
  const std::uint64_t pm_out = pow_u64(p, m_out);

  using i128 = __int128;
  constexpr int kInfVal = 1 << 20;
  auto val_exact = [&](i128 x) {
    if (x == 0) return kInfVal;
    if (x < 0) x = -x;
    int v = 0;
    while (x % p == 0) {
      x /= p;
      ++v;
    }
    return v;
  };
  auto reduce = [&](i128 x) {
    i128 r = x % static_cast<i128>(pm_out);
    if (r < 0) r += static_cast<i128>(pm_out);
    return static_cast<std::uint64_t>(r);
  };

  // Shear parameters in the order of the case analysis: the target set is
  // |w12| >= p^{-4} ||w||, and one of the three candidates captures at
  // least a quarter of E.
  const std::int64_t candidates[3] = {0, p * p, 1};
  std::vector<Residues> best_pts;
  std::uint64_t best_r = 0;
  for (std::int64_t r0 : candidates) {
    std::vector<Residues> pts;
    for (const auto& w : E.points()) {
      i128 a = static_cast<i128>(w[0]) + static_cast<i128>(w[2]) * r0;
      i128 b = static_cast<i128>(w[1]) -
               2 * static_cast<i128>(w[0]) * r0 -
               static_cast<i128>(w[2]) * r0 * r0;
      i128 c = static_cast<i128>(w[2]);
      int norm_val = std::min({val_exact(a), val_exact(b), val_exact(c)});
      if (val_exact(b) <= norm_val + 4)
        pts.push_back(Residues{reduce(a), reduce(b), reduce(c)});
    }
    if (4 * pts.size() >= E.size()) {
      best_pts = std::move(pts);
      best_r = static_cast<std::uint64_t>(r0);
      break;
    }
    if (pts.size() > best_pts.size()) {
      best_pts = std::move(pts);
      best_r = static_cast<std::uint64_t>(r0);
    }
  }
  if (4 * best_pts.size() < E.size())
    throw std::logic_error("shear selection kept fewer than #E/4 points");
  return ShearResult{best_r, PointSet(p, 3, m_out, std::move(best_pts))};
}

PointSet change_base_point(const PointSet& fprime, const Residues& w0) {
  if (fprime.dim() != 3)
    throw std::invalid_argument("change_base_point needs a 3d point set");
  const std::int64_t p = fprime.prime();
  const int m = fprime.depth();
  // Work at elevated precision so the output is pinned down mod p^m.
  const int mm = std::min(max_precision(p), m + 6);
  if (mm < m + 3)
    throw std::invalid_argument("depth too large for exact displacement");

  auto lift = [&](const Residues& x) {
    return RVec(PAdic::integer(p, mm, static_cast<std::int64_t>(x[0])),
                PAdic::integer(p, mm, static_cast<std::int64_t>(x[1])),
                PAdic::integer(p, mm, static_cast<std::int64_t>(x[2])));
  };
  auto down = [&](const PAdic& x) {
    return static_cast<std::uint64_t>(x.residue(m));
  };

  RVec base = lift(w0);
  std::vector<Residues> out;
  out.reserve(fprime.size());
  for (const auto& x : fprime.points()) {
    RVec w = bch_product(lift(x), base);
    out.push_back(Residues{down(w.w11), down(w.w12), down(w.w21)});
  }
  return PointSet(p, 3, m, std::move(out));
}

}  // namespace padiclab
