#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace padiclab {

using Rational = boost::multiprecision::cpp_rational;

// The depth-m residue grid of Z_p: p^m balls a + p^m Z_p, each of Haar
// mass p^{-m}. Residue index order (0, 1, ..., p^m - 1) is the canonical
// summation order everywhere.
struct ZpGrid {
  std::int64_t p;
  int depth;

  ZpGrid(std::int64_t p_, int depth_);
  std::uint64_t size() const;

  // Lift a depth-m table to depth m+1 (children inherit the parent value).
  static std::vector<double> refine(const std::vector<double>& table,
                                    std::int64_t p);
};

// Integral over Z_p of a function locally constant at the grid depth,
// given by its table of values per residue. The sum is accumulated in
// exact rational arithmetic and rounded once, so the result is identical
// under grid refinement and any summation partitioning.
double haar_integrate(const std::vector<double>& table, const ZpGrid& grid);

// Exact rational form of the same integral.
Rational haar_integrate_exact(const std::vector<double>& table,
                              const ZpGrid& grid);

}  // namespace padiclab
