#include "padiclab/pointset.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "padiclab/padic.hpp"

namespace padiclab {

namespace {

// Digit-lexicographic order: compare least significant digits first, so
// points in one depth-k ball are contiguous for every k.
struct DigitLess {
  std::int64_t p;
  int dim;
  int depth;
  bool operator()(const Residues& x, const Residues& y) const {
    std::uint64_t px = 1;
    for (int j = 0; j < depth; ++j) {
      for (int c = 0; c < dim; ++c) {
        std::uint64_t dx = (x[c] / px) % static_cast<std::uint64_t>(p);
        std::uint64_t dy = (y[c] / px) % static_cast<std::uint64_t>(p);
        if (dx != dy) return dx < dy;
      }
      px *= static_cast<std::uint64_t>(p);
    }
    return false;
  }
};

}  // namespace

PointSet::PointSet(std::int64_t p, int dim, int depth,
                   std::vector<Residues> points)
    : p_(p), dim_(dim), depth_(depth), pts_(std::move(points)) {
  if (!is_supported_prime(p)) throw std::invalid_argument("unsupported prime");
  if (dim != 1 && dim != 3) throw std::invalid_argument("dim must be 1 or 3");
  if (depth < 1 || pow_u64(p, depth) == 0)
    throw std::invalid_argument("depth out of range");
  const std::uint64_t pm = pow_u64(p, depth);
  for (auto& x : pts_) {
    for (int c = 0; c < dim_; ++c)
      if (x[c] >= pm) throw std::invalid_argument("residue out of range");
    for (int c = dim_; c < 3; ++c) x[c] = 0;
  }
  std::sort(pts_.begin(), pts_.end(), DigitLess{p_, dim_, depth_});
  if (std::adjacent_find(pts_.begin(), pts_.end()) != pts_.end())
    throw std::invalid_argument("duplicate points rejected");
}

int PointSet::distance_valuation(const Residues& x, const Residues& y) const {
  const std::uint64_t pm = pow_u64(p_, depth_);
  int best = depth_;
  for (int c = 0; c < dim_; ++c) {
    std::uint64_t diff = (x[c] + pm - y[c]) % pm;
    if (diff == 0) continue;
    int v = 0;
    while (diff % static_cast<std::uint64_t>(p_) == 0) {
      diff /= static_cast<std::uint64_t>(p_);
      ++v;
    }
    best = std::min(best, v);
  }
  return best;
}

int PointSet::point_valuation(const Residues& x) const {
  Residues zero{0, 0, 0};
  return distance_valuation(x, zero);
}

std::uint32_t PointSet::digit_index(const Residues& x, int j) const {
  std::uint64_t pj = pow_u64(p_, j);
  std::uint32_t idx = 0;
  for (int c = 0; c < dim_; ++c) {
    idx = idx * static_cast<std::uint32_t>(p_) +
          static_cast<std::uint32_t>((x[c] / pj) % static_cast<std::uint64_t>(p_));
  }
  return idx;
}

std::string PointSet::to_csv() const {
  std::ostringstream out;
  out << "# p=" << p_ << " m=" << depth_ << " d=" << dim_ << "\n";
  for (const auto& x : pts_) {
    out << x[0];
    for (int c = 1; c < dim_; ++c) out << "," << x[c];
    out << "\n";
  }
  return out.str();
}

PointSet PointSet::from_csv(const std::string& text) {
  std::istringstream in(text);
  return from_csv_stream(in);
}

PointSet PointSet::from_csv_stream(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  std::int64_t p = 0;
  int m = 0, d = 0;
  if (std::sscanf(line.c_str(), "# p=%ld m=%d d=%d", &p, &m, &d) != 3)
    throw std::invalid_argument("missing '# p=<p> m=<m> d=<d>' header");
  std::vector<Residues> pts;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    Residues x{0, 0, 0};
    std::istringstream row(line);
    std::string cell;
    int c = 0;
    while (std::getline(row, cell, ',')) {
      if (c >= d) throw std::invalid_argument("too many columns");
      x[c++] = std::stoull(cell);
    }
    if (c != d) throw std::invalid_argument("wrong column count");
    pts.push_back(x);
  }
  return PointSet(p, d, m, std::move(pts));
}

}  // namespace padiclab
