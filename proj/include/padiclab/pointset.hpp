#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace padiclab {

using Residues = std::array<std::uint64_t, 3>;

// Finite set of distinct points in (Z_p / p^m)^d, d in {1, 3}. Coordinates
// are residues mod p^m; for d = 3 they are (w11, w12, w21). Points are kept
// sorted in digit order (least significant base-p digit first), which fixes
// the canonical iteration order for all statistics.
class PointSet {
 public:
  PointSet(std::int64_t p, int dim, int depth, std::vector<Residues> points);

  std::int64_t prime() const { return p_; }
  int dim() const { return dim_; }
  int depth() const { return depth_; }
  std::size_t size() const { return pts_.size(); }
  const std::vector<Residues>& points() const { return pts_; }
  const Residues& operator[](std::size_t i) const { return pts_[i]; }

  // Valuation of the difference x - y (min over coordinates, capped at the
  // grid depth); distance is p^{-value}.
  int distance_valuation(const Residues& x, const Residues& y) const;
  // Valuation of a single point (distance to 0).
  int point_valuation(const Residues& x) const;

  // j-th base-p digit tuple, j in [0, depth).
  std::uint32_t digit_index(const Residues& x, int j) const;

  std::string to_csv() const;
  static PointSet from_csv(const std::string& text);
  static PointSet from_csv_stream(std::istream& in);

 private:
  std::int64_t p_;
  int dim_;
  int depth_;
  std::vector<Residues> pts_;
};

}  // namespace padiclab
