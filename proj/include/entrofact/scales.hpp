// Exponential scale classes: side lengths ell_k = (3/2)^(k/d) and the class
// of regions that fit, up to translation and coordinate permutation, inside
// [0, ell_{k+1}] x ... x [0, ell_{k+d}].
#pragma once

#include <algorithm>

#include "entrofact/region.hpp"

namespace entrofact {

inline double scale_length(int k, int d) {
  if (d <= 0) throw config_error("scale_length needs d >= 1");
  return std::pow(1.5, static_cast<double>(k) / d);
}

struct ScaleClass {
  int k = 0;
  int d = 1;
  std::vector<double> lengths;  // ell_{k+1}, ..., ell_{k+d}, strictly increasing

  static ScaleClass make(int k, int d) {
    if (k < 0) throw config_error("scale class k must be >= 0");
    ScaleClass s;
    s.k = k;
    s.d = d;
    s.lengths.resize(d);
    for (int i = 0; i < d; ++i) s.lengths[i] = scale_length(k + 1 + i, d);
    return s;
  }
};

// Bounding-box extents (max - min per coordinate) sorted ascending.
inline std::vector<long> sorted_extents(const Region& v) {
  std::vector<long> ext(v.dim(), 0);
  for (int i = 0; i < v.dim(); ++i) {
    int lo = v.point(0)[i], hi = v.point(0)[i];
    for (const auto& p : v.points()) {
      lo = std::min(lo, p[i]);
      hi = std::max(hi, p[i]);
    }
    ext[i] = static_cast<long>(hi) - lo;
  }
  std::sort(ext.begin(), ext.end());
  return ext;
}

// True iff some coordinate permutation of the translated bounding box fits
// the scale-k rectangle. A point x lies inside [0, ell] iff 0 <= x <= ell as
// reals, so the test is extent_i <= ell_{k+1+i} after sorting both sides
// ascending (sorted comparison is equivalent to trying every permutation).
inline bool in_scale_class(const Region& v, int k) {
  if (k < 0) throw config_error("in_scale_class needs k >= 0");
  if (v.empty()) return true;
  auto ext = sorted_extents(v);
  auto sc = ScaleClass::make(k, v.dim());
  for (int i = 0; i < v.dim(); ++i)
    if (static_cast<double>(ext[i]) > sc.lengths[i]) return false;
  return true;
}

// Smallest k with the region in the class (monotone in k).
inline int scale_class_of(const Region& v, int k_max = 200) {
  for (int k = 0; k <= k_max; ++k)
    if (in_scale_class(v, k)) return k;
  throw config_error("region does not fit any scale class up to k_max");
}

}  // namespace entrofact
