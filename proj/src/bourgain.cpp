#include "padiclab/bourgain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace padiclab {

namespace {

struct Candidate {
  std::vector<std::uint32_t> picked;  // indices into F
  int l1 = 0;
  double constant = 0.0;
};

// Keep at most `budget` points of the subtree at `node`, enforcing the
// per-depth population caps; heavier children are served first so the
// regular core survives.
void prune_subtree(const PBallTree& tree, std::uint32_t node_idx,
                   std::uint32_t budget, int enforce_depth,
                   const std::vector<std::uint32_t>& caps, int l1,
                   std::vector<std::uint32_t>& out) {
  const auto& nodes = tree.nodes();
  const PBallTree::Node& node = nodes[node_idx];
  if (budget == 0) return;
  if (node.depth >= enforce_depth || node.children_begin == 0) {
    // Below the contract's finest scale any subset works; take the leading
    // points in canonical order.
    std::uint32_t take = std::min(budget, node.count());
    for (std::uint32_t i = node.begin; i < node.begin + take; ++i)
      out.push_back(i);
    return;
  }
  std::vector<std::uint32_t> children;
  for (std::uint32_t ci = node.children_begin; ci < node.children_end; ++ci)
    children.push_back(ci);
  std::stable_sort(children.begin(), children.end(),
                   [&nodes](std::uint32_t a, std::uint32_t b) {
                     return nodes[a].count() > nodes[b].count();
                   });
  int j = node.depth + 1 - l1;  // relative depth of the children
  std::uint32_t cap = caps[static_cast<std::size_t>(j)];
  std::uint32_t remaining = budget;
  for (std::uint32_t ci : children) {
    if (remaining == 0) break;
    std::uint32_t before = static_cast<std::uint32_t>(out.size());
    prune_subtree(tree, ci, std::min(remaining, cap), enforce_depth, caps, l1,
                  out);
    remaining -= static_cast<std::uint32_t>(out.size()) - before;
  }
}

}  // namespace

BourgainResult bourgain_regularize(const PointSet& F, double alpha, double eps,
                                   double D) {
  if (eps <= 0 || alpha <= 0 || alpha >= 1)
    throw std::invalid_argument("need alpha in (0,1) and eps > 0");
  if (D < 1) throw std::invalid_argument("need D >= 1");
  const double n = static_cast<double>(F.size());
  const double p = static_cast<double>(F.prime());
  const double logp_n = std::log(n) / std::log(p);

  if (F.size() < static_cast<std::size_t>(F.prime()))
    throw std::domain_error("size condition violated: set too small");

  const double q = (3.0 - alpha + 5.0 * eps) / (3.0 - alpha + 20.0 * eps);
  int l_lo = std::max(1, static_cast<int>(std::ceil(eps * logp_n - 1e-12)));
  int l_hi = std::min(F.depth() - 1,
                      static_cast<int>(std::floor(q * logp_n + 1e-12)));
  if (l_lo > l_hi)
    throw std::domain_error(
        "size condition violated: admissible scale window is empty");

  const double alpha_prime = alpha - 20.0 * eps;
  const int enforce_depth =
      std::min(F.depth(), static_cast<int>(std::ceil(logp_n - 1e-12)));

  PBallTree tree(F);
  const auto& nodes = tree.nodes();

  std::optional<Candidate> best;
  for (int l1 = l_lo; l1 <= l_hi; ++l1) {
    // Heaviest depth-l1 balls are the localization candidates.
    std::vector<std::uint32_t> level;
    for (std::uint32_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].depth == l1 && nodes[i].count() >= 2) level.push_back(i);
    std::stable_sort(level.begin(), level.end(),
                     [&nodes](std::uint32_t a, std::uint32_t b) {
                       return nodes[a].count() > nodes[b].count();
                     });
    if (level.size() > 8) level.resize(8);

    for (std::uint32_t cand : level) {
      std::uint32_t n0 = nodes[cand].count();
      std::vector<std::uint32_t> caps(
          static_cast<std::size_t>(enforce_depth - l1) + 1, n0);
      for (std::size_t j = 1; j < caps.size(); ++j) {
        double cap = std::ceil(static_cast<double>(n0) *
                               std::pow(p, -alpha_prime * static_cast<double>(j)));
        caps[j] = static_cast<std::uint32_t>(std::max(1.0, cap));
      }
      std::vector<std::uint32_t> picked;
      prune_subtree(tree, cand, n0, enforce_depth, caps, l1, picked);
      if (picked.size() < 2) continue;

      std::vector<Residues> pts;
      pts.reserve(picked.size());
      for (std::uint32_t i : picked) pts.push_back(F[i]);
      PointSet sub(F.prime(), F.dim(), F.depth(), std::move(pts));
      PBallTree subtree(sub);
      auto max_counts = subtree.max_count_per_scale();
      double constant = 0.0;
      for (int k = 0; k <= enforce_depth; ++k) {
        double ratio = static_cast<double>(max_counts[static_cast<std::size_t>(k)]) /
                       static_cast<double>(sub.size());
        constant = std::max(
            constant, ratio * std::pow(p, alpha_prime * static_cast<double>(k - l1)));
      }
      bool better = !best || picked.size() > best->picked.size() ||
                    (picked.size() == best->picked.size() &&
                     constant < best->constant);
      if (better) best = Candidate{std::move(picked), l1, constant};
    }
  }

  if (!best)
    throw std::runtime_error(
        "no admissible scale found: every candidate ball degenerated");

  BourgainResult res;
  res.l1 = best->l1;
  res.target_exponent = alpha_prime;
  res.measured_constant = best->constant;
  res.scan_depth = enforce_depth;
  res.asymptotic_size_inequality =
      std::pow(n, eps / 2.0) > 4.0 * logp_n;
  std::vector<Residues> pts;
  pts.reserve(best->picked.size());
  for (std::uint32_t i : best->picked) pts.push_back(F[i]);
  res.subset.emplace(F.prime(), F.dim(), F.depth(), std::move(pts));
  res.w0 = res.subset->points().front();
  return res;
}

}  // namespace padiclab
