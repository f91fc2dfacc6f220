#include "padiclab/haar.hpp"

#include <stdexcept>

#include "padiclab/padic.hpp"

namespace padiclab {

ZpGrid::ZpGrid(std::int64_t p_, int depth_) : p(p_), depth(depth_) {
  if (!is_supported_prime(p)) throw std::invalid_argument("unsupported prime");
  if (depth < 0 || depth > 12 || pow_u64(p, depth) > (1u << 24))
    throw std::invalid_argument("depth out of range");
}

std::uint64_t ZpGrid::size() const { return pow_u64(p, depth); }

std::vector<double> ZpGrid::refine(const std::vector<double>& table,
                                   std::int64_t p) {
  std::vector<double> out(table.size() * static_cast<std::size_t>(p));
  // Child residue a + c*p^m keeps the parent value of a.
  for (std::size_t c = 0; c < static_cast<std::size_t>(p); ++c)
    for (std::size_t a = 0; a < table.size(); ++a)
      out[c * table.size() + a] = table[a];
  return out;
}

Rational haar_integrate_exact(const std::vector<double>& table,
                              const ZpGrid& grid) {
  if (table.empty()) throw std::invalid_argument("empty table");
  if (table.size() != grid.size())
    throw std::invalid_argument("table size does not match grid depth");
  Rational sum = 0;
  for (double v : table) sum += Rational(v);
  Rational mass(1, boost::multiprecision::cpp_int(grid.size()));
  return sum * mass;
}

double haar_integrate(const std::vector<double>& table, const ZpGrid& grid) {
  return haar_integrate_exact(table, grid).convert_to<double>();
}

}  // namespace padiclab
