#include "padiclab/balltree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "padiclab/padic.hpp"

namespace padiclab {

PBallTree::PBallTree(const PointSet& set) : set_(&set) {
  if (set.size() == 0) throw std::invalid_argument("empty point set");
  nodes_.push_back(Node{0, 0, static_cast<std::uint32_t>(set.size()), 0, 0, 0});
  // Breadth-first split: children of a node partition its contiguous range
  // by the next digit tuple.
  for (std::size_t ni = 0; ni < nodes_.size(); ++ni) {
    Node node = nodes_[ni];
    if (node.depth == set.depth() || node.count() <= 0) continue;
    if (node.count() == 1 && node.depth > 0) {
      // Singleton chains still extend to full depth so leaf balls are
      // single points, but they need no digit scan.
    }
    std::uint32_t cb = static_cast<std::uint32_t>(nodes_.size());
    std::uint32_t i = node.begin;
    while (i < node.end) {
      std::uint32_t digit = set.digit_index(set[i], node.depth);
      std::uint32_t j = i + 1;
      while (j < node.end && set.digit_index(set[j], node.depth) == digit) ++j;
      nodes_.push_back(Node{node.depth + 1, i, j, 0, 0, digit});
      i = j;
    }
    nodes_[ni].children_begin = cb;
    nodes_[ni].children_end = static_cast<std::uint32_t>(nodes_.size());
  }
}

std::uint32_t PBallTree::ball_count(const Residues& center, int k) const {
  if (k < 0 || k > set_->depth())
    throw std::invalid_argument("scale out of range");
  const Node* node = &nodes_[0];
  for (int depth = 0; depth < k; ++depth) {
    std::uint32_t digit = set_->digit_index(center, depth);
    const Node* next = nullptr;
    for (std::uint32_t ci = node->children_begin; ci < node->children_end;
         ++ci) {
      if (nodes_[ci].digit == digit) {
        next = &nodes_[ci];
        break;
      }
    }
    if (next == nullptr) return 0;
    node = next;
  }
  return node->count();
}

std::vector<std::uint32_t> PBallTree::max_count_per_scale() const {
  std::vector<std::uint32_t> best(static_cast<std::size_t>(set_->depth()) + 1,
                                  0);
  for (const Node& n : nodes_)
    best[static_cast<std::size_t>(n.depth)] =
        std::max(best[static_cast<std::size_t>(n.depth)], n.count());
  return best;
}

std::vector<std::uint32_t> PBallTree::path_counts(const Residues& x) const {
  std::vector<std::uint32_t> counts;
  counts.reserve(static_cast<std::size_t>(set_->depth()) + 1);
  const Node* node = &nodes_[0];
  counts.push_back(node->count());
  for (int depth = 0; depth < set_->depth(); ++depth) {
    std::uint32_t digit = set_->digit_index(x, depth);
    const Node* next = nullptr;
    for (std::uint32_t ci = node->children_begin; ci < node->children_end;
         ++ci) {
      if (nodes_[ci].digit == digit) {
        next = &nodes_[ci];
        break;
      }
    }
    if (next == nullptr) {
      counts.resize(static_cast<std::size_t>(set_->depth()) + 1, 0);
      return counts;
    }
    node = next;
    counts.push_back(node->count());
  }
  return counts;
}

double NonConcProfile::min_constant(double alpha, std::int64_t p) const {
  double best = 0.0;
  for (int k = l1; k <= l0; ++k) {
    double need = ratio(k) * std::pow(static_cast<double>(p),
                                      alpha * static_cast<double>(k - l1));
    best = std::max(best, need);
  }
  return best;
}

double NonConcProfile::fitted_alpha(std::int64_t p) const {
  // Least squares of y_k = -log_p ratio(k) against x_k = k - l1.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = l1; k <= l0; ++k) {
    double r = ratio(k);
    if (r <= 0) continue;
    double x = static_cast<double>(k - l1);
    double y = -std::log(r) / std::log(static_cast<double>(p));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) return 0.0;
  return (n * sxy - sx * sy) / denom;
}

NonConcProfile non_concentration_profile(const PBallTree& tree, int l0,
                                         int l1) {
  if (l1 > l0 || l1 < 0 || l0 > tree.set().depth())
    throw std::invalid_argument("need 0 <= l1 <= l0 <= depth");
  NonConcProfile prof;
  prof.l1 = l1;
  prof.l0 = l0;
  prof.set_size = tree.set().size();
  auto all = tree.max_count_per_scale();
  prof.max_counts.assign(all.begin() + l1, all.begin() + l0 + 1);
  return prof;
}

double energy_sum(const PBallTree& tree, double alpha, const Residues& w) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("alpha must lie in (0,1)");
  auto counts = tree.path_counts(w);
  const int m = tree.set().depth();
  if (counts[static_cast<std::size_t>(m)] != 1)
    throw std::invalid_argument("energy_sum: base point must belong to the set");
  const double p = static_cast<double>(tree.set().prime());
  // Shell at valuation k holds counts[k] - counts[k+1] points at distance
  // p^{-k}; summed in increasing k for a fixed order.
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    double shell = static_cast<double>(counts[static_cast<std::size_t>(k)] -
                                       counts[static_cast<std::size_t>(k) + 1]);
    if (shell != 0.0) total += shell * std::pow(p, alpha * k);
  }
  return total;
}

double max_energy(const PBallTree& tree, double alpha) {
  double best = 0.0;
  for (const auto& w : tree.set().points())
    best = std::max(best, energy_sum(tree, alpha, w));
  return best;
}

}  // namespace padiclab
