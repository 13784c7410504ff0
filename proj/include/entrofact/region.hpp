// Finite regions of Z^d: canonical point sets, boundaries, parity splits,
// L1 distances and fat (cube-union) regions.
#pragma once

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <utility>

#include "entrofact/common.hpp"

namespace entrofact {

using Point = std::vector<int>;  // one integer per coordinate, lex-ordered

// Finite subset of Z^d. Points are deduplicated and kept in lexicographic
// order; that order is the canonical vertex order used by every index scheme
// downstream.
class Region {
 public:
  Region() : dim_(0) {}
  explicit Region(int dim) : dim_(dim) {
    if (dim <= 0) throw config_error("region dimension must be positive");
  }
  Region(int dim, std::vector<Point> pts) : Region(dim) {
    for (const auto& p : pts)
      if (static_cast<int>(p.size()) != dim)
        throw config_error("point arity does not match region dimension");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    points_ = std::move(pts);
  }

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Point>& points() const { return points_; }
  const Point& point(std::size_t i) const { return points_[i]; }

  bool contains(const Point& p) const {
    return std::binary_search(points_.begin(), points_.end(), p);
  }
  // Index of p in canonical order; npos when absent.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t index_of(const Point& p) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), p);
    if (it == points_.end() || *it != p) return npos;
    return static_cast<std::size_t>(it - points_.begin());
  }

  bool operator==(const Region& o) const {
    return dim_ == o.dim_ && points_ == o.points_;
  }
  bool operator!=(const Region& o) const { return !(*this == o); }
  bool operator<(const Region& o) const {  // for ordered maps of blocks
    if (dim_ != o.dim_) return dim_ < o.dim_;
    return points_ < o.points_;
  }

  // Axis-aligned box of the given point counts, corner at `corner`
  // (defaults to the origin): sides[i] points along coordinate i.
  static Region box(const std::vector<int>& sides, const Point& corner = {}) {
    int d = static_cast<int>(sides.size());
    Point at = corner.empty() ? Point(d, 0) : corner;
    if (static_cast<int>(at.size()) != d)
      throw config_error("box corner arity mismatch");
    for (int s : sides)
      if (s <= 0) throw config_error("box sides must be positive");
    std::vector<Point> pts;
    Point p = at;
    std::size_t total = 1;
    for (int s : sides) total *= static_cast<std::size_t>(s);
    pts.reserve(total);
    std::vector<int> c(d, 0);
    while (true) {
      for (int i = 0; i < d; ++i) p[i] = at[i] + c[i];
      pts.push_back(p);
      int i = 0;
      for (; i < d; ++i) {
        if (++c[i] < sides[i]) break;
        c[i] = 0;
      }
      if (i == d) break;
    }
    return Region(d, std::move(pts));
  }

  static Region chain(int n) { return box({n}); }

 private:
  int dim_;
  std::vector<Point> points_;
};

inline Region region_union(const Region& a, const Region& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.dim() != b.dim()) throw config_error("union of mixed dimensions");
  std::vector<Point> pts;
  std::set_union(a.points().begin(), a.points().end(), b.points().begin(),
                 b.points().end(), std::back_inserter(pts));
  return Region(a.dim(), std::move(pts));
}

inline Region region_intersection(const Region& a, const Region& b) {
  if (a.empty() || b.empty()) return Region();
  if (a.dim() != b.dim()) throw config_error("intersection of mixed dimensions");
  std::vector<Point> pts;
  std::set_intersection(a.points().begin(), a.points().end(),
                        b.points().begin(), b.points().end(),
                        std::back_inserter(pts));
  return Region(a.dim(), std::move(pts));
}

inline Region region_difference(const Region& a, const Region& b) {
  if (a.empty() || b.empty()) return a;
  if (a.dim() != b.dim()) throw config_error("difference of mixed dimensions");
  std::vector<Point> pts;
  std::set_difference(a.points().begin(), a.points().end(), b.points().begin(),
                      b.points().end(), std::back_inserter(pts));
  return Region(a.dim(), std::move(pts));
}

inline bool is_subset(const Region& a, const Region& b) {
  if (a.empty()) return true;
  if (a.dim() != b.dim()) return false;
  return std::includes(b.points().begin(), b.points().end(),
                       a.points().begin(), a.points().end());
}

inline std::vector<Point> lattice_neighbors(const Point& p) {
  std::vector<Point> out;
  out.reserve(2 * p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    Point q = p;
    q[i] += 1;
    out.push_back(q);
    q[i] -= 2;
    out.push_back(std::move(q));
  }
  return out;
}

inline bool are_adjacent(const Point& a, const Point& b) {
  int s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s == 1;
}

// Exterior boundary: points at graph distance one from the region.
inline Region boundary(const Region& r) {
  if (r.empty()) return Region();
  std::vector<Point> pts;
  for (const auto& p : r.points())
    for (auto& n : lattice_neighbors(p))
      if (!r.contains(n)) pts.push_back(std::move(n));
  return Region(r.dim(), std::move(pts));
}

inline bool is_even_point(const Point& p) {
  long s = std::accumulate(p.begin(), p.end(), 0L);
  return ((s % 2) + 2) % 2 == 0;
}

// Split by coordinate-sum parity. Neither half contains an adjacent pair, so
// the conditional measure on each half is a product measure.
inline std::pair<Region, Region> even_odd_split(const Region& r) {
  if (r.empty()) return {Region(), Region()};
  std::vector<Point> even, odd;
  for (const auto& p : r.points())
    (is_even_point(p) ? even : odd).push_back(p);
  return {Region(r.dim(), std::move(even)), Region(r.dim(), std::move(odd))};
}

inline long l1_distance(const Point& a, const Point& b) {
  long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::labs(static_cast<long>(a[i]) - b[i]);
  return s;
}

// min over pairs of the L1 distance; both regions must be nonempty.
inline long graph_distance(const Region& x, const Region& y) {
  if (x.empty() || y.empty())
    throw config_error("graph_distance undefined for empty region");
  long best = std::numeric_limits<long>::max();
  for (const auto& p : x.points())
    for (const auto& q : y.points()) best = std::min(best, l1_distance(p, q));
  return best;
}

// Union of side-L cubes Q_L(y) = L*y + [0,L-1]^d over y in `base`.
inline Region fat_region(int L, const Region& base) {
  if (L < 1) throw config_error("fat_region needs L >= 1");
  if (base.empty()) return Region();
  int d = base.dim();
  std::vector<int> sides(d, L);
  std::vector<Point> pts;
  for (const auto& y : base.points()) {
    Point corner(d);
    for (int i = 0; i < d; ++i) corner[i] = L * y[i];
    auto cube = Region::box(sides, corner);
    pts.insert(pts.end(), cube.points().begin(), cube.points().end());
  }
  return Region(d, std::move(pts));
}

inline int floor_div(int a, int b) {
  int q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

// Membership test for the cube-union family: true iff the region is exactly
// a union of side-L cubes. The candidate base is forced (each point lies in
// exactly one cube of the tiling).
inline bool is_fat_region(int L, const Region& r) {
  if (L < 1) throw config_error("is_fat_region needs L >= 1");
  if (r.empty()) return true;
  std::vector<Point> base;
  for (const auto& p : r.points()) {
    Point y(r.dim());
    for (int i = 0; i < r.dim(); ++i) y[i] = floor_div(p[i], L);
    base.push_back(std::move(y));
  }
  return fat_region(L, Region(r.dim(), std::move(base))) == r;
}

inline std::uint64_t region_hash(const Region& r) {
  fnv1a h;
  h.feed_i64(r.dim());
  for (const auto& p : r.points())
    for (int c : p) h.feed_i64(c);
  return h.digest();
}

}  // namespace entrofact
