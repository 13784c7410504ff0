// Entropy, variance and covariance functionals of exact Gibbs tables, and
// the structural identities they satisfy (DLR, entropy telescoping, the
// entropy variational principle).
#pragma once

#include "entrofact/gibbs.hpp"

namespace entrofact {

// Ent f = mu[f log(f / mu f)], with 0 log 0 = 0 and mu-null states skipped.
inline double entropy(const GibbsTable& t, const ConfigFunction& f) {
  t.check_domain(f);
  double mean = 0.0, flogf = 0.0;
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    double p = t.prob(s);
    if (p == 0.0) continue;
    if (f[s] < 0.0)
      throw config_error("entropy needs f >= 0 on the support of mu");
    mean += p * f[s];
    flogf += p * xlogx(f[s]);
  }
  if (mean <= 0.0) return 0.0;
  return flogf - mean * std::log(mean);
}

inline double variance(const GibbsTable& t, const ConfigFunction& f) {
  t.check_domain(f);
  double mean = mu_f(t, f), s2 = 0.0;
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    double d = f[s] - mean;
    s2 += t.prob(s) * d * d;
  }
  return s2;
}

// mu[Ent_A f] accumulated fiberwise; the partition must come from the same
// table. Fixed fiber order keeps the reduction deterministic.
inline double mu_ent_block(const GibbsTable& t, const FiberPartition& fp,
                           const ConfigFunction& f) {
  t.check_domain(f);
  std::vector<double> num(fp.num_fibers, 0.0), flogf(fp.num_fibers, 0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    double p = t.prob(s);
    if (p == 0.0) continue;
    if (f[s] < 0.0)
      throw config_error("entropy needs f >= 0 on the support of mu");
    auto j = fp.fiber_of[s];
    num[j] += p * f[s];
    flogf[j] += p * xlogx(f[s]);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < fp.num_fibers; ++j) {
    if (num[j] <= 0.0 || fp.fiber_mass[j] <= 0.0) continue;
    total += flogf[j] - num[j] * std::log(num[j] / fp.fiber_mass[j]);
  }
  return total;
}

inline double mu_ent_block(const GibbsTable& t, const Region& block,
                           const ConfigFunction& f) {
  if (block.empty()) return 0.0;  // Ent_empty f = 0
  return mu_ent_block(t, t.fibers(block), f);
}

// Ent_A f as a function of the conditioning configuration (constant along
// the block coordinates).
inline ConfigFunction ent_block(const GibbsTable& t, const FiberPartition& fp,
                                const ConfigFunction& f) {
  t.check_domain(f);
  std::vector<double> num(fp.num_fibers, 0.0), flogf(fp.num_fibers, 0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    double p = t.prob(s);
    if (p == 0.0) continue;
    auto j = fp.fiber_of[s];
    num[j] += p * f[s];
    flogf[j] += p * xlogx(f[s]);
  }
  std::vector<double> ent(fp.num_fibers, 0.0);
  for (std::size_t j = 0; j < fp.num_fibers; ++j) {
    double w = fp.fiber_mass[j];
    if (w <= 0.0 || num[j] <= 0.0) continue;
    double avg = num[j] / w;
    ent[j] = flogf[j] / w - avg * std::log(avg);
  }
  ConfigFunction out = t.constant_function(0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    out[s] = ent[fp.fiber_of[s]];
  return out;
}

inline ConfigFunction ent_block(const GibbsTable& t, const Region& block,
                                const ConfigFunction& f) {
  return ent_block(t, t.fibers(block), f);
}

// cov_A(f,g) = mu_A[fg] - mu_A[f] mu_A[g], as a function of the fiber.
inline ConfigFunction covariance_block(const GibbsTable& t,
                                       const FiberPartition& fp,
                                       const ConfigFunction& f,
                                       const ConfigFunction& g) {
  t.check_domain(f);
  t.check_domain(g);
  std::vector<double> sf(fp.num_fibers, 0.0), sg(fp.num_fibers, 0.0),
      sfg(fp.num_fibers, 0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    double p = t.prob(s);
    auto j = fp.fiber_of[s];
    sf[j] += p * f[s];
    sg[j] += p * g[s];
    sfg[j] += p * f[s] * g[s];
  }
  std::vector<double> cov(fp.num_fibers, 0.0);
  for (std::size_t j = 0; j < fp.num_fibers; ++j) {
    double w = fp.fiber_mass[j];
    if (w <= 0.0) continue;
    cov[j] = sfg[j] / w - (sf[j] / w) * (sg[j] / w);
  }
  ConfigFunction out = t.constant_function(0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    out[s] = cov[fp.fiber_of[s]];
  return out;
}

inline ConfigFunction covariance_block(const GibbsTable& t, const Region& block,
                                       const ConfigFunction& f,
                                       const ConfigFunction& g) {
  return covariance_block(t, t.fibers(block), f, g);
}

// mu[cov_A(f,g)] without materializing the function.
inline double mu_cov_block(const GibbsTable& t, const FiberPartition& fp,
                           const ConfigFunction& f, const ConfigFunction& g) {
  t.check_domain(f);
  t.check_domain(g);
  std::vector<double> sf(fp.num_fibers, 0.0), sg(fp.num_fibers, 0.0),
      sfg(fp.num_fibers, 0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    double p = t.prob(s);
    auto j = fp.fiber_of[s];
    sf[j] += p * f[s];
    sg[j] += p * g[s];
    sfg[j] += p * f[s] * g[s];
  }
  double total = 0.0;
  for (std::size_t j = 0; j < fp.num_fibers; ++j) {
    double w = fp.fiber_mass[j];
    if (w <= 0.0) continue;
    total += sfg[j] - sf[j] * sg[j] / w;
  }
  return total;
}

// |mu(mu_Lambda f) - mu f|; an identity of the Gibbs family, so the residual
// is pure floating-point noise.
inline double dlr_check(const GibbsTable& t, const Region& lambda,
                        const ConfigFunction& f) {
  if (!is_subset(lambda, t.region()))
    throw config_error("dlr_check: lambda not inside the region");
  ConfigFunction mf = conditional_expectation(t, lambda, f);
  return std::abs(mu_f(t, mf) - mu_f(t, f));
}

struct TelescopeReport {
  double decomposition_residual = 0.0;  // Ent f = mu[Ent_L f] + Ent mu_L f
  double telescope_residual = 0.0;      // sum_i mu[Ent_{L_i} mu_{L_{i-1}} f]
};

// Residuals of the two telescoping identities along a nested chain
// L_0 c L_1 c ... c L_k of sub-regions.
inline TelescopeReport telescope_check(const GibbsTable& t,
                                       const std::vector<Region>& chain,
                                       const ConfigFunction& f) {
  if (chain.empty()) throw config_error("telescope_check: empty chain");
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    if (!is_subset(chain[i], chain[i + 1]))
      throw config_error("telescope_check: chain is not nested");
  if (!is_subset(chain.back(), t.region()))
    throw config_error("telescope_check: chain exceeds the region");

  TelescopeReport rep;
  double ent_f = entropy(t, f);
  for (const auto& lam : chain) {
    ConfigFunction mf = conditional_expectation(t, lam, f);
    double lhs = ent_f;
    double rhs = mu_ent_block(t, lam, f) + entropy(t, mf);
    rep.decomposition_residual =
        std::max(rep.decomposition_residual, std::abs(lhs - rhs));
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    ConfigFunction g = conditional_expectation(t, chain[i - 1], f);
    sum += mu_ent_block(t, chain[i], g);
  }
  double direct = mu_ent_block(t, chain.back(),
                               conditional_expectation(t, chain.front(), f));
  rep.telescope_residual = std::abs(sum - direct);
  return rep;
}

enum class VariationalOutcome { holds, rejected_infeasible, violated };

// Duality check: for g >= 0 and h with mu_U e^h <= 1 on every fiber,
// mu_U(g h) <= Ent_U(g). Infeasible h is rejected, not counted.
inline VariationalOutcome variational_check(const GibbsTable& t,
                                            const Region& u,
                                            const ConfigFunction& g,
                                            const ConfigFunction& h,
                                            double tol = kIdentityTol) {
  t.check_domain(g);
  t.check_domain(h);
  FiberPartition fp = t.fibers(u);
  ConfigFunction exph = t.constant_function(0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    exph[s] = std::exp(h[s]);
  ConfigFunction mexp = conditional_expectation(t, fp, exph);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    if (t.prob(s) > 0.0 && mexp[s] > 1.0 + 1e-12)
      return VariationalOutcome::rejected_infeasible;

  ConfigFunction gh = t.constant_function(0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s) gh[s] = g[s] * h[s];
  ConfigFunction lhs = conditional_expectation(t, fp, gh);
  ConfigFunction rhs = ent_block(t, fp, g);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    if (t.prob(s) > 0.0 && lhs[s] > rhs[s] + tol)
      return VariationalOutcome::violated;
  return VariationalOutcome::holds;
}

}  // namespace entrofact
