// Overlapping two-block decompositions of a scale-k region: a top slab B and
// a family of parity-interleaved lower blocks A_1..A_{r+1} whose interfaces
// Gamma_i separate consecutive blocks. Used by the recursive even/odd
// factorization analysis.
#pragma once

#include <deque>
#include <sstream>

#include "entrofact/scales.hpp"

namespace entrofact {

struct SlabDecomposition {
  Region V;
  int k = 0;
  int r = 0;  // floor(ell_{k+d}/6)
  Region B;
  // blocks run i = 1..r+1 and interfaces i = 2..r+1; index 0 is empty
  // padding so both families share the same indexing.
  std::vector<Region> a;
  // gammas[i] = A_i \ A_{i-1} for i = 2..r+1; entries 0 and 1 are padding.
  std::vector<Region> gammas;
};

namespace detail {

// Region points with last coordinate inside [lo, hi] and the first d-1
// coordinates unconstrained (the caller guarantees 0 <= x_j <= ell_{k+j}).
inline Region last_coord_band(const Region& v, double lo, double hi) {
  std::vector<Point> pts;
  for (const auto& p : v.points()) {
    double xd = static_cast<double>(p[v.dim() - 1]);
    if (xd >= lo && xd <= hi) pts.push_back(p);
  }
  return Region(v.dim(), std::move(pts));
}

}  // namespace detail

// Builds the decomposition for V inside [0,ell_{k+1}] x ... x [0,ell_{k+d}]
// (caller-normalized: minimal corner at the origin, sides permuted so the
// longest direction is last). Requires V outside the (k-1)-class so the
// slabs are strict.
inline SlabDecomposition slab_decomposition(const Region& v, int k) {
  if (v.empty()) throw config_error("slab_decomposition: empty region");
  int d = v.dim();
  auto sc = ScaleClass::make(k, d);
  for (const auto& p : v.points())
    for (int j = 0; j < d; ++j)
      if (p[j] < 0 || static_cast<double>(p[j]) > sc.lengths[j]) {
        std::ostringstream msg;
        msg << "slab_decomposition: coordinate " << j << " of a point is "
            << p[j] << ", outside [0, " << sc.lengths[j] << "] at scale k=" << k;
        throw config_error(msg.str());
      }
  if (k > 0 && in_scale_class(v, k - 1))
    throw config_error(
        "slab_decomposition: region already fits scale class k-1=" +
        std::to_string(k - 1));

  double ell_kd = sc.lengths[d - 1];
  SlabDecomposition out;
  out.V = v;
  out.k = k;
  out.r = static_cast<int>(std::floor(ell_kd / 6.0));

  auto [even, odd] = even_odd_split(v);
  out.B = detail::last_coord_band(v, ell_kd / 3.0, ell_kd);

  // R_i keeps last coordinate in [0, ell_{k+d}/2 + i].
  auto r_band = [&](int i) {
    return detail::last_coord_band(v, 0.0, ell_kd / 2.0 + i);
  };
  out.a.resize(out.r + 2);
  for (int i = 1; i <= out.r + 1; ++i) {
    Region ri = r_band(i);
    Region rim1 = r_band(i - 1);
    out.a[i] = (i % 2 == 0)
                   ? region_union(region_intersection(ri, even),
                                  region_intersection(rim1, odd))
                   : region_union(region_intersection(ri, odd),
                                  region_intersection(rim1, even));
  }
  out.gammas.resize(out.r + 2);
  for (int i = 2; i <= out.r + 1; ++i)
    out.gammas[i] = region_difference(out.a[i], out.a[i - 1]);
  return out;
}

struct SlabReport {
  bool cover_ok = true;      // V = A_i u B with both complements nonempty
  bool distance_ok = true;   // d(V\B, V\A_i) >= ell_k/4
  bool class_ok = true;      // B and every A_i fit scale class k-1
  bool interface_ok = true;  // Gamma parity + path separation
  std::vector<std::string> failures;

  bool all_ok() const {
    return cover_ok && distance_ok && class_ok && interface_ok;
  }
};

// BFS over the nearest-neighbor graph induced on `v` minus `blocked`,
// started from `sources`; returns the set of reached vertex flags.
inline std::vector<char> reachable_in_region(const Region& v,
                                             const Region& sources,
                                             const Region& blocked) {
  std::vector<char> seen(v.size(), 0);
  std::deque<std::size_t> queue;
  for (const auto& p : sources.points()) {
    auto idx = v.index_of(p);
    if (idx == Region::npos || blocked.contains(p)) continue;
    if (!seen[idx]) {
      seen[idx] = 1;
      queue.push_back(idx);
    }
  }
  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop_front();
    for (const auto& n : lattice_neighbors(v.point(i))) {
      auto j = v.index_of(n);
      if (j == Region::npos || seen[j] || blocked.contains(n)) continue;
      seen[j] = 1;
      queue.push_back(j);
    }
  }
  return seen;
}

inline SlabReport verify_slab_decomposition(const SlabDecomposition& dec) {
  SlabReport rep;
  const Region& v = dec.V;
  int d = v.dim();
  double ell_k = scale_length(dec.k, d);
  auto [even, odd] = even_odd_split(v);
  auto fail = [&](bool& flag, const std::string& what) {
    flag = false;
    rep.failures.push_back(what);
  };

  Region v_minus_b = region_difference(v, dec.B);
  for (int i = 1; i <= dec.r; ++i) {
    const Region& ai = dec.a[i];
    Region v_minus_ai = region_difference(v, ai);
    if (region_union(ai, dec.B) != v)
      fail(rep.cover_ok, "A_" + std::to_string(i) + " u B != V");
    if (v_minus_b.empty()) fail(rep.cover_ok, "V \\ B empty");
    if (v_minus_ai.empty())
      fail(rep.cover_ok, "V \\ A_" + std::to_string(i) + " empty");

    if (!v_minus_b.empty() && !v_minus_ai.empty() &&
        static_cast<double>(graph_distance(v_minus_b, v_minus_ai)) <
            ell_k / 4.0)
      fail(rep.distance_ok,
           "d(V\\B, V\\A_" + std::to_string(i) + ") < ell_k/4");

    if (dec.k > 0 && !in_scale_class(ai, dec.k - 1))
      fail(rep.class_ok, "A_" + std::to_string(i) + " not in class k-1");
  }
  if (dec.k > 0 && !in_scale_class(dec.B, dec.k - 1))
    fail(rep.class_ok, "B not in class k-1");

  for (int i = 1; i <= dec.r; ++i) {
    const Region& gamma = dec.gammas[i + 1];
    const Region& parity_set = (i % 2 == 1) ? even : odd;
    if (!is_subset(gamma, parity_set))
      fail(rep.interface_ok,
           "Gamma_" + std::to_string(i + 1) + " breaks parity");

    // Conditional-independence separation, checked graph-theoretically:
    // no path inside V joins A_i and V \ A_{i+1} without meeting Gamma_{i+1}.
    Region targets = region_difference(v, dec.a[i + 1]);
    auto seen = reachable_in_region(v, dec.a[i], gamma);
    for (const auto& t : targets.points()) {
      auto idx = v.index_of(t);
      if (idx != Region::npos && seen[idx]) {
        fail(rep.interface_ok, "Gamma_" + std::to_string(i + 1) +
                                   " does not separate A_" + std::to_string(i) +
                                   " from V\\A_" + std::to_string(i + 1));
        break;
      }
    }
  }
  return rep;
}

}  // namespace entrofact
