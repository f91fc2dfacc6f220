#pragma once

#include <cstdint>
#include <vector>

#include "padiclab/pointset.hpp"

namespace padiclab {

// Radix-p^d trie over the residue grid. A node at depth k is the ball of
// radius p^{-k} around its points; child order follows digit order, so
// traversals are deterministic. Points of one ball occupy a contiguous
// index range of the (digit-sorted) PointSet.
class PBallTree {
 public:
  struct Node {
    int depth;
    std::uint32_t begin, end;              // point range
    std::uint32_t children_begin, children_end;  // node range
    std::uint32_t digit;                   // digit tuple index at this depth
    std::uint32_t count() const { return end - begin; }
  };

  explicit PBallTree(const PointSet& set);

  const PointSet& set() const { return *set_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_[0]; }

  // Number of set points within p^{-k} of center (k <= depth).
  std::uint32_t ball_count(const Residues& center, int k) const;

  // Max ball population per scale k = 0..depth.
  std::vector<std::uint32_t> max_count_per_scale() const;

  // Population of the nested balls around a member point: counts[k] =
  // #(set, ball of radius p^{-k} at x) for k = 0..depth.
  std::vector<std::uint32_t> path_counts(const Residues& x) const;

 private:
  const PointSet* set_;
  std::vector<Node> nodes_;
};

// Per-scale non-concentration table of a point set relative to the ball
// B(w0, b1): ratios[k - l1] = max_w #(E cap B(w, p^{-k})) / #E for
// k = l1..l0, plus the minimal constant D with ratio <= D (b/b1)^alpha and
// a least-squares dimension fit.
struct NonConcProfile {
  int l1 = 0;  // b1 = p^{-l1}
  int l0 = 0;  // b0 = p^{-l0}
  std::vector<std::uint32_t> max_counts;
  std::size_t set_size = 0;

  double ratio(int k) const {
    return static_cast<double>(max_counts[static_cast<std::size_t>(k - l1)]) /
           static_cast<double>(set_size);
  }
  // Minimal D with ratio(k) <= D p^{-alpha (k - l1)} over the whole range.
  double min_constant(double alpha, std::int64_t p) const;
  // Slope of -log_p ratio against scale index (crude dimension estimate).
  double fitted_alpha(std::int64_t p) const;
};

NonConcProfile non_concentration_profile(const PBallTree& tree, int l0, int l1);

// Discrete Riesz energy sum_{w' != w} ||w' - w||^{-alpha}, accumulated by
// distance shells in increasing valuation order.
double energy_sum(const PBallTree& tree, double alpha, const Residues& w);

// Max of energy_sum over all member points (hypothesis measurements).
double max_energy(const PBallTree& tree, double alpha);

}  // namespace padiclab
