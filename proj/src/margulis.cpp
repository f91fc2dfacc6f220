#include "padiclab/margulis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "padiclab/balltree.hpp"
#include "padiclab/projection.hpp"
#include "padiclab/rng.hpp"

namespace padiclab {

namespace {

constexpr long kInf = std::numeric_limits<long>::max() / 4;

long val_big(const BigInt& x, std::int64_t p) {
  if (x == 0) return kInf;
  BigInt y = boost::multiprecision::abs(x);
  long v = 0;
  while (y % p == 0) {
    y /= p;
    ++v;
  }
  return v;
}

long add_cap(long a, long b) {
  if (a >= kInf || b >= kInf) return kInf;
  return a + b;
}

// Shell contributions are always c * p^{-j} with c < p; accumulators
// either keep them exact or fold them straight into the moment.
struct ExactAccumulator {
  std::map<long, Rational>* mass;
  std::int64_t p;
  void add(long nu, long j, long c) {
    (*mass)[nu] +=
        Rational(c, boost::multiprecision::pow(BigInt(p), static_cast<int>(j)));
  }
};

struct MomentAccumulator {
  double alpha;
  double logp;
  double value = 0.0;
  void add(long nu, long j, long c) {
    if (nu >= kInf / 2) return;  // measure-zero floor never reached
    value += static_cast<double>(c) *
             std::exp(logp * (alpha * static_cast<double>(nu) -
                              static_cast<double>(j)));
  }
};

struct ClassCtx {
  std::int64_t p;
  const BigInt& w11;
  const BigInt& w12;
  const BigInt& w21;
  long vw21;
  bool double_root;  // discriminant of the quadratic coordinate vanishes
  long c3;           // valuation of the contracted coordinate
  long two_n;
  int depth_cap;
};

// Shell expansion around the single special point of the class: the norm
// valuation is min(a0 + slope_a t, b0 + slope_b t, c3) on the shell
// v(r - rho) = k + t. A constant coordinate always floors the min, so the
// expansion closes with one tail term.
template <typename Acc>
void add_branch_shells(const ClassCtx& ctx, Acc& acc, long k, long a0,
                       int slope_a, long b0, int slope_b) {
  long floor_val = ctx.c3;
  if (slope_a == 0) floor_val = std::min(floor_val, a0);
  if (slope_b == 0) floor_val = std::min(floor_val, b0);
  if (floor_val >= kInf)
    throw std::logic_error("contraction shells: unbounded branch");
  long t = 0;
  const long guard = 16 * (ctx.depth_cap + ctx.two_n) + 64;
  for (;; ++t) {
    long a = (slope_a != 0) ? add_cap(a0, slope_a * t) : a0;
    long b = (slope_b != 0) ? add_cap(b0, slope_b * t) : b0;
    bool a_done = (slope_a == 0) || a >= floor_val;
    bool b_done = (slope_b == 0) || b >= floor_val;
    if (a_done && b_done) break;
    acc.add(std::min({a, b, ctx.c3}), k + t + 1, ctx.p - 1);
    if (t > guard)
      throw std::logic_error("contraction shells: shell loop ran away");
  }
  acc.add(floor_val, k + t, 1);
}

template <typename Acc>
void descend(const ClassCtx& ctx, Acc& acc, const BigInt& r0, long k) {
  if (k > ctx.depth_cap)
    throw std::logic_error("contraction shells: refinement did not terminate");
  const std::int64_t p = ctx.p;

  BigInt l0 = ctx.w11 + ctx.w21 * r0;
  BigInt q0 = ctx.w12 - 2 * ctx.w11 * r0 - ctx.w21 * r0 * r0;
  long vl0 = val_big(l0, p);
  long vq0 = val_big(q0, p);
  long vqp0 = vl0;  // Q'(r0) = -2 L(r0) and p is odd

  bool l_branch = ctx.vw21 < kInf && vl0 >= add_cap(ctx.vw21, k);

  enum class QState { Resolved, Simple, Double, Refine };
  QState qs = QState::Resolved;
  long pert = std::min(add_cap(vqp0, k), add_cap(ctx.vw21, 2 * k));
  if (vq0 >= pert) {
    if (ctx.vw21 >= kInf) {
      // Affine coordinate with a root in the class (w11 = w21 = 0 would
      // have been resolved above since then the perturbation is infinite).
      qs = QState::Simple;
    } else if (ctx.double_root) {
      qs = QState::Double;
    } else if (vqp0 < add_cap(ctx.vw21, k)) {
      qs = QState::Simple;
    } else {
      qs = QState::Refine;
    }
  }

  if (qs == QState::Refine) {
    BigInt pk = boost::multiprecision::pow(BigInt(p), static_cast<int>(k));
    for (std::int64_t j = 0; j < p; ++j) descend(ctx, acc, r0 + j * pk, k + 1);
    return;
  }

  if (!l_branch && qs == QState::Resolved) {
    long nu = std::min({vl0, add_cap(vq0, -ctx.two_n), ctx.c3});
    acc.add(nu, k, 1);
    return;
  }

  long a0 = l_branch ? add_cap(ctx.vw21, k) : vl0;
  int slope_a = l_branch ? 1 : 0;
  long b0;
  int slope_b;
  switch (qs) {
    case QState::Resolved:
      b0 = add_cap(vq0, -ctx.two_n);
      slope_b = 0;
      break;
    case QState::Simple:
      b0 = add_cap(add_cap(vqp0, k), -ctx.two_n);
      slope_b = 1;
      break;
    default:  // Double: both roots coincide with the root of L
      b0 = add_cap(add_cap(ctx.vw21, 2 * k), -ctx.two_n);
      slope_b = 2;
      break;
  }
  add_branch_shells(ctx, acc, k, a0, slope_a, b0, slope_b);
}

}  // namespace

double ContractionShells::moment(double alpha, std::int64_t p) const {
  double total = 0.0;
  for (const auto& [nu, m] : mass) {
    if (m == 0) continue;
    total += m.convert_to<double>() *
             std::pow(static_cast<double>(p), alpha * static_cast<double>(nu));
  }
  return total;
}

namespace {

ClassCtx make_class_ctx(std::int64_t p, const BigInt& w11, const BigInt& w12,
                        const BigInt& w21, const BigInt& delta,
                        int lambda_exp) {
  if (!is_supported_prime(p)) throw std::invalid_argument("unsupported prime");
  if (lambda_exp < 1)
    throw std::invalid_argument("need |lambda| > 1 (lambda_exp >= 1)");
  if (w11 == 0 && w12 == 0 && w21 == 0)
    throw std::domain_error("contraction integral needs w != 0");
  long vw21 = val_big(w21, p);
  long vdelta = val_big(delta, p);
  long maxv = 0;
  for (long v : {val_big(w11, p), val_big(w12, p), vw21, vdelta})
    if (v < kInf) maxv = std::max(maxv, v);
  return ClassCtx{p,
                  w11,
                  w12,
                  w21,
                  vw21,
                  delta == 0,
                  add_cap(vw21, 2L * lambda_exp),
                  2L * lambda_exp,
                  static_cast<int>(2 * maxv + 32)};
}

}  // namespace

ContractionShells contraction_shells(std::int64_t p, const BigInt& w11,
                                     const BigInt& w12, const BigInt& w21,
                                     int lambda_exp) {
  ContractionShells shells;
  BigInt delta = w11 * w11 + w12 * w21;
  ClassCtx ctx = make_class_ctx(p, w11, w12, w21, delta, lambda_exp);
  ExactAccumulator acc{&shells.mass, p};
  descend(ctx, acc, BigInt(0), 0);
  return shells;
}

double contraction_integral_ints(std::int64_t p, const BigInt& w11,
                                 const BigInt& w12, const BigInt& w21,
                                 int lambda_exp, double alpha) {
  // ||.|| = p^{-nu}, so the integrand ||.||^{-alpha} is p^{alpha nu}; the
  // shells fold straight into the moment in the (deterministic) descent
  // order, which keeps the sweep paths allocation-free.
  BigInt delta = w11 * w11 + w12 * w21;
  ClassCtx ctx = make_class_ctx(p, w11, w12, w21, delta, lambda_exp);
  MomentAccumulator acc{alpha, std::log(static_cast<double>(p))};
  descend(ctx, acc, BigInt(0), 0);
  return acc.value;
}

double contraction_integral(const RVec& w, const PAdic& lambda, double alpha,
                            std::optional<double> assert_c2) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("alpha must lie in (0,1)");
  if (lambda.is_zero() || !lambda.is_regular() || lambda.valuation() >= 0)
    throw std::domain_error("need |lambda| > 1");
  auto rep = [&](const PAdic& x) -> BigInt {
    if (x.is_zero()) return BigInt(0);
    if (x.valuation() < 0)
      throw std::domain_error("contraction integral expects w over Z_p");
    return BigInt(x.unit()) *
           boost::multiprecision::pow(BigInt(x.prime()), x.valuation());
  };
  const std::int64_t p = w.prime();
  int n = -lambda.valuation();
  double value = contraction_integral_ints(p, rep(w.w11), rep(w.w12),
                                           rep(w.w21), n, alpha);
  if (assert_c2) {
    double alpha_hat = (1.0 - alpha) / 4.0;
    double pd = static_cast<double>(p);
    double bound = *assert_c2 * std::pow(pd, -alpha_hat * n) /
                   (pd - std::pow(pd, alpha)) * std::pow(w.sup_norm(), -alpha);
    if (value > bound * (1.0 + 1e-9))
      throw std::logic_error("contraction bound violated at the given C2");
  }
  return value;
}

double contraction_integral_at_depth(std::int64_t p, const BigInt& w11,
                                     const BigInt& w12, const BigInt& w21,
                                     int lambda_exp, double alpha, int depth) {
  if (depth < 0 || depth > 10)
    throw std::invalid_argument("depth out of range");
  long vw21 = val_big(w21, p);
  long c3 = add_cap(vw21, 2L * lambda_exp);
  const std::uint64_t classes = pow_u64(p, depth);
  // Group classes by norm valuation with exact masses; the moment then
  // matches the shell table bit for bit once the grid has stabilized.
  ContractionShells grouped;
  const Rational mass(1, boost::multiprecision::pow(BigInt(p), depth));
  for (std::uint64_t r = 0; r < classes; ++r) {
    BigInt r0(r);
    long vl = val_big(w11 + w21 * r0, p);
    long vq = val_big(w12 - 2 * w11 * r0 - w21 * r0 * r0, p);
    long nu = std::min({vl, add_cap(vq, -2L * lambda_exp), c3});
    grouped.mass[nu] += mass;
  }
  return grouped.moment(alpha, p);
}

namespace {

// One representative per scaling class: some coordinate is a unit and the
// leftmost unit coordinate equals 1.
bool canonical_direction(std::int64_t p, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
  const std::uint64_t up = static_cast<std::uint64_t>(p);
  for (std::uint64_t x : {a, b, c})
    if (x % up != 0) return x == 1;
  return false;
}

// Deterministic parallel sweep; fn(thread_slot, index).
template <typename Fn>
void parallel_grid(std::uint64_t count, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(0, i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (;;) {
        std::uint64_t i = next.fetch_add(256);
        if (i >= count) return;
        std::uint64_t hi = std::min(count, i + 256);
        for (std::uint64_t j = i; j < hi; ++j) fn(t, j);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

double measure_c2(std::int64_t p, double alpha, int grid_depth,
                  const std::vector<int>& lambda_exps, int threads) {
  const std::uint64_t pm = pow_u64(p, grid_depth);
  const std::uint64_t total = pm * pm * pm;
  const double denom =
      static_cast<double>(p) - std::pow(static_cast<double>(p), alpha);
  const double alpha_hat = (1.0 - alpha) / 4.0;
  const int slots = std::max(1, threads);
  std::vector<double> worst(static_cast<std::size_t>(slots), 0.0);
  parallel_grid(total, threads, [&](int slot, std::uint64_t idx) {
    std::uint64_t a = idx % pm, b = (idx / pm) % pm, c = idx / (pm * pm);
    if (!canonical_direction(p, a, b, c)) return;
    for (int n : lambda_exps) {
      double v = contraction_integral_ints(p, BigInt(a), BigInt(b), BigInt(c),
                                           n, alpha);
      // canonical representatives have ||w|| = 1
      double c2 = v * denom * std::pow(static_cast<double>(p), alpha_hat * n);
      worst[static_cast<std::size_t>(slot)] =
          std::max(worst[static_cast<std::size_t>(slot)], c2);
    }
  });
  return 2.0 * *std::max_element(worst.begin(), worst.end());
}

int compute_m_alpha(std::int64_t p, double alpha, double c2) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("alpha must lie in (0,1)");
  if (c2 <= 0.0) throw std::invalid_argument("c2 must be positive");
  const double alpha_hat = (1.0 - alpha) / 4.0;
  const double pd = static_cast<double>(p);
  const double target = c2 * pd / (pd - std::pow(pd, alpha));
  int m = static_cast<int>(
      std::ceil(std::log(target) / (alpha_hat * std::log(pd)) - 1e-12));
  return std::max(1, m);
}

double contraction_worst_ratio(std::int64_t p, double alpha, int m,
                               int grid_depth, int threads) {
  const std::uint64_t pm = pow_u64(p, grid_depth);
  const std::uint64_t total = pm * pm * pm;
  const int slots = std::max(1, threads);
  std::vector<double> worst(static_cast<std::size_t>(slots), 0.0);
  const double pd = static_cast<double>(p);
  parallel_grid(total, threads, [&](int slot, std::uint64_t idx) {
    std::uint64_t a = idx % pm, b = (idx / pm) % pm, c = idx / (pm * pm);
    if (a == 0 && b == 0 && c == 0) return;
    double v =
        contraction_integral_ints(p, BigInt(a), BigInt(b), BigInt(c), m, alpha);
    long wval = std::min({val_big(BigInt(a), p), val_big(BigInt(b), p),
                          val_big(BigInt(c), p)});
    double rhs = std::pow(pd, -1.0 + alpha * static_cast<double>(wval));
    worst[static_cast<std::size_t>(slot)] =
        std::max(worst[static_cast<std::size_t>(slot)], v / rhs);
  });
  return *std::max_element(worst.begin(), worst.end());
}

std::vector<WalkAtom> walk_convolve(const WalkMeasure& nu, int ell,
                                    std::uint64_t budget,
                                    std::optional<MonteCarloOpts> mc) {
  if (ell < 0) throw std::invalid_argument("ell must be >= 0");
  if (nu.r_depth < 0 || nu.m_step < 1)
    throw std::invalid_argument("invalid walk measure");
  const std::uint64_t per_step = pow_u64(nu.p, nu.r_depth);
  const double atoms_d = std::pow(static_cast<double>(per_step), ell);
  std::vector<WalkAtom> atoms;
  if (atoms_d <= static_cast<double>(budget)) {
    std::uint64_t count = 1;
    for (int i = 0; i < ell; ++i) count *= per_step;
    atoms.reserve(count);
    const double mass = 1.0 / static_cast<double>(count);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
      WalkAtom atom;
      atom.mass = mass;
      atom.rs.resize(static_cast<std::size_t>(ell));
      std::uint64_t x = idx;
      for (int i = 0; i < ell; ++i) {
        atom.rs[static_cast<std::size_t>(i)] = x % per_step;
        x /= per_step;
      }
      atoms.push_back(std::move(atom));
    }
    return atoms;
  }
  if (!mc)
    throw std::invalid_argument(
        "enumeration budget exceeded; opt in to Monte Carlo sampling");
  CounterRng rng(mc->seed, 1);
  atoms.reserve(mc->samples);
  const double mass = 1.0 / static_cast<double>(mc->samples);
  for (std::uint64_t s = 0; s < mc->samples; ++s) {
    WalkAtom atom;
    atom.mass = mass;
    atom.rs.resize(static_cast<std::size_t>(ell));
    for (int i = 0; i < ell; ++i)
      atom.rs[static_cast<std::size_t>(i)] = rng.next_below(per_step);
    atoms.push_back(std::move(atom));
  }
  return atoms;
}

namespace {

struct RatVec {
  Rational w11, w12, w21;
};

long val_rational(const Rational& x, std::int64_t p) {
  if (x == 0) return kInf;
  return val_big(BigInt(boost::multiprecision::numerator(x)), p) -
         val_big(BigInt(boost::multiprecision::denominator(x)), p);
}

RatVec walk_step(const RatVec& w, std::uint64_t r, int m, std::int64_t p) {
  Rational rr(r);
  Rational x11 = w.w11 + w.w21 * rr;
  Rational x12 = w.w12 - 2 * w.w11 * rr - w.w21 * rr * rr;
  // a_m = d_{p^{-m}} scales the off-diagonal pair by p^{-2m} and p^{2m}.
  Rational p2m(boost::multiprecision::pow(BigInt(p), 2 * m));
  return RatVec{x11, x12 / p2m, w.w21 * p2m};
}

}  // namespace

double margulis_value(const TransverseConfig& cfg, const WalkMeasure& nu,
                      const std::vector<std::uint64_t>& word_rs) {
  const std::int64_t p = cfg.F.prime();
  double total = 0.0;
  for (const auto& pt : cfg.F.points()) {
    RatVec w{Rational(pt[0]), Rational(pt[1]), Rational(pt[2])};
    for (std::uint64_t r : word_rs) w = walk_step(w, r, nu.m_step, p);
    long v = std::min({val_rational(w.w11, p), val_rational(w.w12, p),
                       val_rational(w.w21, p)});
    total +=
        std::pow(static_cast<double>(p), cfg.alpha * static_cast<double>(v));
  }
  return total;
}

RecursionReport margulis_recursion_check(const TransverseConfig& cfg,
                                         const WalkMeasure& nu, int ell,
                                         double c2) {
  if (cfg.F.dim() != 3) throw std::invalid_argument("F must be 3d");
  for (const auto& pt : cfg.F.points())
    if (pt[0] == 0 && pt[1] == 0 && pt[2] == 0)
      throw std::invalid_argument("F must not contain the zero vector");
  RecursionReport rep;
  rep.ell = ell;
  rep.m_required = compute_m_alpha(cfg.F.prime(), cfg.alpha, c2);
  rep.precondition_ok = nu.m_step >= rep.m_required;
  rep.f_identity = margulis_value(cfg, nu, {});
  auto atoms = walk_convolve(nu, ell);
  double lhs = 0.0;
  for (const auto& atom : atoms)
    lhs += atom.mass * margulis_value(cfg, nu, atom.rs);
  rep.lhs = lhs;
  rep.bound =
      std::pow(static_cast<double>(cfg.F.prime()), -ell) * rep.f_identity;
  rep.pass = lhs <= rep.bound * (1.0 + 1e-9);
  return rep;
}

EnergyMargulisPair energy_vs_margulis(const PointSet& F, const Residues& w0,
                                      double alpha) {
  PBallTree tree(F);
  EnergyMargulisPair pair;
  pair.energy = energy_sum(tree, alpha, w0);
  PointSet displaced = change_base_point(F, w0);
  PBallTree dtree(displaced);
  pair.f_model = energy_sum(dtree, alpha, Residues{0, 0, 0});
  return pair;
}

}  // namespace padiclab
