// Strong-spatial-mixing measurements: sup-norm deviation of marginal density
// ratios under a single boundary-spin flip, exponential decay fits for the
// (K, a) parameters, and exhaustive/sampled sweeps of the decay condition.
#pragma once

#include "entrofact/functionals.hpp"
#include "entrofact/rng.hpp"
#include "entrofact/stats.hpp"

namespace entrofact {

// psi' positive where psi vanishes: the flipped marginal is not absolutely
// continuous (possible under hard constraints).
struct absolute_continuity_error : error {
  using error::error;
};

// Marginal tables for all q values of the boundary spin at one site.
struct PsiFlipFamily {
  std::vector<GibbsTable> tables;  // one per spin value at x
};

inline PsiFlipFamily psi_flip_family(const SpinModel& model,
                                     const Region& lambda, const Point& x,
                                     const BoundaryCondition& tau_base,
                                     std::size_t cap = kDefaultStateCap) {
  if (!boundary(lambda).contains(x))
    throw config_error("flip site must lie on the exterior boundary");
  PsiFlipFamily fam;
  for (int v = 0; v < model.q(); ++v) {
    auto assign = tau_base.assignment();
    assign[x] = v;
    fam.tables.emplace_back(model, lambda, BoundaryCondition(std::move(assign)),
                            cap);
  }
  return fam;
}

// Exact max over sigma_Delta with psi(sigma) > 0 and over ordered value
// pairs at x of |psi'/psi - 1|. Shared-null entries are excluded; a
// positive-over-zero entry is the absolute-continuity failure.
inline double psi_deviation_from_family(const PsiFlipFamily& fam,
                                        const Region& delta) {
  std::vector<std::vector<double>> psis;
  for (const auto& t : fam.tables) psis.push_back(psi_marginal(t, delta));
  double dev = 0.0;
  std::size_t m = psis[0].size();
  for (std::size_t v = 0; v < psis.size(); ++v)
    for (std::size_t w = 0; w < psis.size(); ++w) {
      if (v == w) continue;
      for (std::size_t s = 0; s < m; ++s) {
        if (psis[v][s] > 0.0)
          dev = std::max(dev, std::abs(psis[w][s] / psis[v][s] - 1.0));
        else if (psis[w][s] > 0.0)
          throw absolute_continuity_error(
              "flipped marginal puts mass where the base marginal vanishes");
      }
    }
  return dev;
}

inline double psi_deviation(const SpinModel& model, const Region& lambda,
                            const Region& delta, const Point& x,
                            const BoundaryCondition& tau_base,
                            std::size_t cap = kDefaultStateCap) {
  if (!is_subset(delta, lambda))
    throw config_error("delta must be inside lambda");
  return psi_deviation_from_family(psi_flip_family(model, lambda, x, tau_base, cap),
                                   delta);
}

struct SsmSample {
  long distance = 0;
  double deviation = 0.0;
};

struct SSMEstimate {
  std::vector<SsmSample> samples;
  double k_hat = 0.0;
  double a_hat = 0.0;
  double residual = 0.0;
  bool too_fast_to_fit = false;  // everything below the floor
  std::size_t below_floor = 0;
};

// Least-squares fit of log(deviation) against distance. Distances below 2
// are boundary-layer contaminated and excluded; deviations below the floor
// are counted but not fitted.
inline SSMEstimate fit_ssm(std::vector<SsmSample> samples,
                           double floor = 1e-13) {
  SSMEstimate est;
  est.samples = std::move(samples);
  std::vector<double> xs, ys;
  std::vector<long> seen;
  for (const auto& s : est.samples) {
    if (s.distance < 2) continue;
    if (s.deviation <= floor) {
      ++est.below_floor;
      continue;
    }
    xs.push_back(static_cast<double>(s.distance));
    ys.push_back(std::log(s.deviation));
    seen.push_back(s.distance);
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  if (seen.empty()) {
    est.too_fast_to_fit = true;
    return est;
  }
  if (seen.size() < 4)
    throw config_error("fit_ssm needs >= 4 distinct distances above floor");
  auto fit = linear_fit(xs, ys);
  est.a_hat = -fit.slope;
  est.k_hat = std::exp(fit.intercept);
  est.residual = fit.rms_residual;
  return est;
}

// Deviations along growing 1D chains: Lambda = {0..n-1}, Delta = {0}, flip
// at the right boundary site {n}, so the flip distance equals n.
inline std::vector<SsmSample> ssm_chain_sweep(const SpinModel& model,
                                              int n_min, int n_max,
                                              int base_symbol = 0) {
  if (n_min < 1 || n_max < n_min) throw config_error("bad chain sweep range");
  std::vector<SsmSample> out;
  for (int n = n_min; n <= n_max; ++n) {
    Region lam = Region::chain(n);
    Region delta(1, {{0}});
    Point x{n};
    BoundaryCondition tau =
        BoundaryCondition::constant(boundary(lam), base_symbol);
    out.push_back({n, psi_deviation(model, lam, delta, x, tau)});
  }
  return out;
}

struct SweepBudget {
  std::size_t exhaustive_subset_cap = 12;  // sites; beyond it sample subsets
  std::size_t sampled_subsets = 256;
  int base_boundaries = 1;  // constant-0 base plus random extras
  std::uint64_t seed = 1;
  int fat_l = 0;  // >0: hard-constraint relaxation, skip d(x,Delta) < L/2
};

struct ConditionReport {
  bool pass = true;
  bool exhaustive = true;
  std::size_t pairs_checked = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  Region worst_delta;
  Point worst_x;
  long worst_distance = 0;
  double worst_deviation = 0.0;
};

// Checks deviation <= K exp(-a d(x, Delta)) over every (Delta, x) pair, all
// Delta below the cap or a recorded random sample above it.
inline ConditionReport check_condition(const SpinModel& model,
                                       const Region& lambda, double k_const,
                                       double a_const,
                                       const SweepBudget& budget = {}) {
  if (lambda.empty()) throw config_error("check_condition needs a region");
  ConditionReport rep;
  Region shell = boundary(lambda);
  std::size_t n = lambda.size();

  std::vector<std::vector<std::size_t>> subsets;
  if (n <= budget.exhaustive_subset_cap) {
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::size_t{1} << i)) idx.push_back(i);
      subsets.push_back(std::move(idx));
    }
  } else {
    rep.exhaustive = false;
    CounterRng rng(budget.seed, 0x55e7);
    for (std::size_t r = 0; r < budget.sampled_subsets; ++r) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if (rng.uniform() < 0.5) idx.push_back(i);
      if (idx.empty()) idx.push_back(rng.below(n));
      subsets.push_back(std::move(idx));
    }
  }

  for (std::size_t xi = 0; xi < shell.size(); ++xi) {
    const Point& x = shell.point(xi);
    Region xr(lambda.dim(), {x});
    for (int b = 0; b < budget.base_boundaries; ++b) {
      BoundaryCondition base;
      if (b == 0) {
        base = BoundaryCondition::constant(shell, 0);
      } else {
        CounterRng rng(budget.seed, 0xba5e + 977 * b + xi);
        std::map<Point, int> a;
        for (const auto& p : shell.points())
          a[p] = static_cast<int>(rng.below(model.q()));
        base = BoundaryCondition(std::move(a));
      }
      PsiFlipFamily fam = psi_flip_family(model, lambda, x, base);
      for (const auto& idx : subsets) {
        std::vector<Point> pts;
        for (auto i : idx) pts.push_back(lambda.point(i));
        Region delta(lambda.dim(), std::move(pts));
        long dist = graph_distance(xr, delta);
        if (budget.fat_l > 0 && dist < budget.fat_l / 2.0) continue;
        double dev = psi_deviation_from_family(fam, delta);
        double bound = k_const * std::exp(-a_const * dist);
        double margin = dev - bound;
        ++rep.pairs_checked;
        if (margin > rep.worst_margin) {
          rep.worst_margin = margin;
          rep.worst_delta = delta;
          rep.worst_x = x;
          rep.worst_distance = dist;
          rep.worst_deviation = dev;
        }
        if (margin > 0.0) rep.pass = false;
      }
    }
  }
  return rep;
}

}  // namespace entrofact
