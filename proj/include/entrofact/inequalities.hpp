// Entropy factorization inequalities: weighted block factorization, Shearer
// subadditivity for product measures, the even/odd reduction, two-block
// bounds with the exactly computed kernel defect, the row/column
// row/column tensorization and the Jensen covariance bound.
#pragma once

#include "entrofact/functionals.hpp"
#include "entrofact/weights.hpp"

namespace entrofact {

struct FactorizationReport {
  double lhs = 0.0;    // gamma(alpha) * Ent f
  double rhs = 0.0;    // sum_A alpha_A mu[Ent_A f]
  double ratio = 0.0;  // lhs / rhs, +inf when rhs = 0 < lhs
  bool degenerate = false;  // lhs = rhs = 0
  std::vector<Point> gamma_argmin;
};

// Both sides of the weighted block factorization; the inequality with
// constant C holds iff ratio <= C.
inline FactorizationReport check_btc(const GibbsTable& t,
                                     const BlockWeights& w,
                                     const ConfigFunction& f) {
  FactorizationReport rep;
  double g = w.gamma(&rep.gamma_argmin);
  rep.lhs = g * entropy(t, f);
  rep.rhs = 0.0;
  for (const auto& wb : w.blocks())
    if (wb.alpha > 0.0) rep.rhs += wb.alpha * mu_ent_block(t, wb.block, f);
  if (rep.rhs > 0.0)
    rep.ratio = rep.lhs / rep.rhs;
  else if (rep.lhs > 0.0)
    rep.ratio = std::numeric_limits<double>::infinity();
  else
    rep.degenerate = true;
  return rep;
}

// Max deviation of mu from the product of its single-site marginals.
inline double product_defect(const GibbsTable& t) {
  std::size_t n = t.region().size();
  std::vector<std::vector<double>> marg(n,
                                        std::vector<double>(t.q(), 0.0));
  for (std::size_t s = 0; s < t.num_states(); ++s)
    for (std::size_t i = 0; i < n; ++i)
      marg[i][t.digit(s, i)] += t.prob(s);
  double worst = 0.0;
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= marg[i][t.digit(s, i)];
    worst = std::max(worst, std::abs(t.prob(s) - prod));
  }
  return worst;
}

// Weighted Shearer inequality for a product measure:
// gamma(alpha) Ent f <= sum alpha_A mu[Ent_A f]. A violation beyond the
// tolerance means a build defect, never a model property.
inline FactorizationReport check_shearer_product(const GibbsTable& t,
                                                 const BlockWeights& w,
                                                 const ConfigFunction& f,
                                                 double product_tol = 1e-10) {
  if (product_defect(t) > product_tol)
    throw config_error("check_shearer_product: measure is not a product");
  return check_btc(t, w, f);
}

struct ReductionReport {
  double c_eo = 0.0;           // even/odd constant used
  bool precondition_ok = false;  // Ent f <= c_eo * mu[Ent_E f + Ent_O f]
  double lhs = 0.0;            // gamma(alpha) Ent f
  double rhs = 0.0;            // 2 c_eo sum alpha_A mu[Ent_A f]
  bool pass = false;
};

// Even/odd reduction: a per-function two-block hypothesis with constant C
// yields the general weighted bound with constant 2C.
inline ReductionReport reduction_even_odd(const GibbsTable& t,
                                          const BlockWeights& w,
                                          const ConfigFunction& f,
                                          double c_eo,
                                          double tol = kIdentityTol) {
  ReductionReport rep;
  rep.c_eo = c_eo;
  auto [e, o] = even_odd_split(t.region());
  double eo = mu_ent_block(t, e, f) + mu_ent_block(t, o, f);
  double ent = entropy(t, f);
  rep.precondition_ok = ent <= c_eo * eo + tol;
  if (!rep.precondition_ok) return rep;
  rep.lhs = w.gamma() * ent;
  rep.rhs = 0.0;
  for (const auto& wb : w.blocks())
    if (wb.alpha > 0.0) rep.rhs += wb.alpha * mu_ent_block(t, wb.block, f);
  rep.rhs *= 2.0 * c_eo;
  rep.pass = rep.lhs <= rep.rhs + tol;
  return rep;
}

// Smallest eps with ||mu_B mu_A g - mu g||_inf <= eps mu(|g|) for all g.
// The map is linear, so eps is the max over eta (mu-a.e.) and sigma in the
// support of |K(eta,sigma)/mu(sigma) - 1| with K the composed kernel.
inline double two_block_epsilon(const GibbsTable& t, const Region& a,
                                const Region& b,
                                std::size_t cap = std::size_t{1} << 13) {
  if (region_union(a, b) != t.region())
    throw config_error("two_block_epsilon: A u B must equal V");
  if (t.num_states() > cap)
    throw size_error("two_block_epsilon: state space exceeds dense cap");
  FiberPartition fa = t.fibers(a);
  FiberPartition fb = t.fibers(b);
  double eps = 0.0;
  for (std::size_t sig = 0; sig < t.num_states(); ++sig) {
    double mu_sig = t.prob(sig);
    if (mu_sig == 0.0) continue;
    ConfigFunction ind = t.constant_function(0.0);
    ind[sig] = 1.0;
    ConfigFunction col =
        conditional_expectation(t, fb, conditional_expectation(t, fa, ind));
    for (std::size_t eta = 0; eta < t.num_states(); ++eta) {
      if (t.prob(eta) == 0.0) continue;
      eps = std::max(eps, std::abs(col[eta] / mu_sig - 1.0));
    }
  }
  return eps;
}

// Two-block penalty theta(eps) = 84 eps (1-eps)^-2, defined on [0,1).
inline double two_block_penalty(double eps) {
  if (eps < 0.0 || eps >= 1.0)
    throw config_error("two_block_penalty needs eps in [0,1)");
  return 84.0 * eps / ((1.0 - eps) * (1.0 - eps));
}

struct TwoBlockReport {
  double epsilon = 0.0;
  double penalty = 0.0;  // theta(eps)
  bool applicable = false;  // eps < 1
  double ent_f = 0.0;
  // Ent f <= mu[Ent_A f + Ent_B f] + theta Ent f
  double direct_rhs = 0.0;
  bool direct_ok = false;
  // Ent f <= mu[Ent_A f + Ent_B mu_A f] + theta Ent mu_A f
  double smoothed_rhs = 0.0;
  bool smoothed_ok = false;
  double smoothed_gap = 0.0;  // rhs - lhs, zero for product measures
  // mu[f log(mu_B mu_A f / mu f)] <= theta Ent f
  double penalty_lhs = 0.0;
  bool penalty_ok = false;
};

inline TwoBlockReport check_two_block(const GibbsTable& t, const Region& a,
                                      const Region& b, const ConfigFunction& f,
                                      double tol = kIdentityTol) {
  TwoBlockReport rep;
  rep.epsilon = two_block_epsilon(t, a, b);
  if (rep.epsilon >= 1.0) return rep;  // bound inapplicable
  rep.applicable = true;
  rep.penalty = two_block_penalty(rep.epsilon);
  rep.ent_f = entropy(t, f);

  FiberPartition fa = t.fibers(a);
  FiberPartition fb = t.fibers(b);
  double ea = mu_ent_block(t, fa, f);
  double eb = mu_ent_block(t, fb, f);
  rep.direct_rhs = ea + eb + rep.penalty * rep.ent_f;
  rep.direct_ok = rep.ent_f <= rep.direct_rhs + tol;

  ConfigFunction maf = conditional_expectation(t, fa, f);
  double eb_smoothed = mu_ent_block(t, fb, maf);
  rep.smoothed_rhs = ea + eb_smoothed + rep.penalty * entropy(t, maf);
  rep.smoothed_ok = rep.ent_f <= rep.smoothed_rhs + tol;
  rep.smoothed_gap = rep.smoothed_rhs - rep.ent_f;

  ConfigFunction kf = conditional_expectation(t, fb, maf);
  double muf = mu_f(t, f);
  double lhs = 0.0;
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    double p = t.prob(s);
    if (p == 0.0 || f[s] == 0.0) continue;
    if (kf[s] <= 0.0 || muf <= 0.0) {
      lhs = -std::numeric_limits<double>::infinity();
      break;
    }
    lhs += p * f[s] * std::log(kf[s] / muf);
  }
  rep.penalty_lhs = lhs;
  rep.penalty_ok = lhs <= rep.penalty * rep.ent_f + tol;
  return rep;
}

struct TensorizationReport {
  double product_defect = 0.0;
  bool product_ok = false;
  std::vector<double> row_constants;  // realized s_k on the smoothed functions
  double s = 0.0;                     // max_k s_k
  bool rows_ok = false;  // every row ratio was well defined
  double conclusion_margin = 0.0;  // min over fibers of rhs - lhs
  bool conclusion_ok = false;
};

// Row/column tensorization. Rows must make the conditional measure on their
// union a product; the realized row constants are measured on exactly the
// smoothed functions mu_{R_1 u ... u R_{k-1}} f that the conclusion needs.
inline TensorizationReport check_tensorization(
    const GibbsTable& t, const std::vector<Region>& rows,
    const std::vector<std::vector<Region>>& blocks, const ConfigFunction& f,
    double tol = kIdentityTol) {
  if (rows.empty() || blocks.size() != rows.size())
    throw config_error("check_tensorization: need one block list per row");
  std::size_t m = blocks[0].size();
  for (const auto& row_blocks : blocks)
    if (row_blocks.size() != m)
      throw config_error("check_tensorization: ragged block matrix");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Region u;
    for (const auto& a : blocks[i]) u = region_union(u, a);
    if (u != rows[i])
      throw config_error("check_tensorization: blocks do not cover their row");
  }
  Region lam;
  for (const auto& r : rows) lam = region_union(lam, r);

  TensorizationReport rep;

  // product check: within every Lambda-fiber the conditional law must equal
  // the product of its row marginals
  {
    FiberPartition fl = t.fibers(lam);
    std::size_t nr = rows.size();
    std::vector<std::vector<std::size_t>> row_pos(nr);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t v = 0; v < t.region().size(); ++v)
        if (rows[i].contains(t.region().point(v))) row_pos[i].push_back(v);
    std::vector<std::size_t> row_states(nr, 1);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t k = 0; k < row_pos[i].size(); ++k)
        row_states[i] *= t.q();
    auto row_code = [&](std::size_t i, std::size_t s) {
      std::size_t code = 0, mult = 1;
      for (std::size_t v : row_pos[i]) {
        code += static_cast<std::size_t>(t.digit(s, v)) * mult;
        mult *= t.q();
      }
      return code;
    };
    std::vector<std::vector<double>> marg(nr);
    for (std::size_t i = 0; i < nr; ++i)
      marg[i].assign(fl.num_fibers * row_states[i], 0.0);
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      double p = t.prob(s);
      if (p == 0.0) continue;
      auto j = fl.fiber_of[s];
      for (std::size_t i = 0; i < nr; ++i)
        marg[i][j * row_states[i] + row_code(i, s)] += p;
    }
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      auto j = fl.fiber_of[s];
      double w = fl.fiber_mass[j];
      if (w <= 0.0) continue;
      double prod = 1.0;
      for (std::size_t i = 0; i < nr; ++i)
        prod *= marg[i][j * row_states[i] + row_code(i, s)] / w;
      rep.product_defect =
          std::max(rep.product_defect, std::abs(t.prob(s) / w - prod));
    }
    rep.product_ok = rep.product_defect <= 1e-10;
    if (!rep.product_ok)
      throw config_error(
          "check_tensorization: conditional measure is not a row product");
  }

  // realized row constants on the smoothed functions
  rep.rows_ok = true;
  Region prefix;  // R_1 u ... u R_{k-1}
  ConfigFunction g = f;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0) {
      prefix = region_union(prefix, rows[k - 1]);
      g = conditional_expectation(t, prefix, f);
    }
    ConfigFunction lhs = ent_block(t, rows[k], g);
    ConfigFunction rhs = t.constant_function(0.0);
    for (const auto& a : blocks[k]) {
      ConfigFunction ea =
          conditional_expectation(t, rows[k], ent_block(t, a, g));
      for (std::size_t s = 0; s < t.num_states(); ++s) rhs[s] += ea[s];
    }
    double sk = 0.0;
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      if (t.prob(s) == 0.0) continue;
      if (rhs[s] > 1e-14)
        sk = std::max(sk, lhs[s] / rhs[s]);
      else if (lhs[s] > 1e-10)
        rep.rows_ok = false;  // hypothesis cannot hold for this row
    }
    rep.row_constants.push_back(sk);
    rep.s = std::max(rep.s, sk);
  }

  // conclusion: Ent_Lambda f <= s * sum_j mu_Lambda[Ent_{C_j} f], fiberwise
  ConfigFunction lhs = ent_block(t, lam, f);
  ConfigFunction rhs = t.constant_function(0.0);
  for (std::size_t j = 0; j < m; ++j) {
    Region cj;
    for (std::size_t i = 0; i < rows.size(); ++i)
      cj = region_union(cj, blocks[i][j]);
    ConfigFunction ec = conditional_expectation(t, lam, ent_block(t, cj, f));
    for (std::size_t s = 0; s < t.num_states(); ++s) rhs[s] += ec[s];
  }
  rep.conclusion_ok = rep.rows_ok;
  rep.conclusion_margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    if (t.prob(s) == 0.0) continue;
    double margin = rep.s * rhs[s] - lhs[s];
    rep.conclusion_margin = std::min(rep.conclusion_margin, margin);
    if (margin < -tol) rep.conclusion_ok = false;
  }
  return rep;
}

struct JensenReport {
  double worst_margin = 0.0;  // max over support of Ent_A f - cov_A(f, log f)
  bool pass = false;
};

// Ent_A f <= cov_A(f, log f), fiberwise. f is clamped to a positive floor so
// log f stays finite; the floor changes both sides by O(floor log floor).
inline JensenReport jensen_check(const GibbsTable& t, const Region& a,
                                 const ConfigFunction& f,
                                 double tol = kIdentityTol,
                                 double floor = 1e-12) {
  t.check_domain(f);
  ConfigFunction fc = f;
  ConfigFunction logf = t.constant_function(0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    fc[s] = std::max(fc[s], floor);
    logf[s] = std::log(fc[s]);
  }
  FiberPartition fp = t.fibers(a);
  ConfigFunction lhs = ent_block(t, fp, fc);
  ConfigFunction rhs = covariance_block(t, fp, fc, logf);
  JensenReport rep;
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    if (t.prob(s) == 0.0) continue;
    rep.worst_margin = std::max(rep.worst_margin, lhs[s] - rhs[s]);
  }
  rep.pass = rep.worst_margin <= tol;
  return rep;
}

// Finite-state bound Ent f <= c(mu_*) Var(sqrt f), with the two-point sharp
// constant c(p) = log(1/p - 1)/(1 - 2p) for p < 1/2 and c = 2 at p = 1/2.
inline double rough_entropy_constant(double mu_star) {
  if (mu_star <= 0.0 || mu_star > 0.5)
    throw config_error("rough_entropy_constant needs mu_* in (0, 1/2]");
  if (mu_star > 0.5 - 1e-12) return 2.0;
  return std::log(1.0 / mu_star - 1.0) / (1.0 - 2.0 * mu_star);
}

inline double min_support_prob(const GibbsTable& t) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < t.num_states(); ++s)
    if (t.prob(s) > 0.0) m = std::min(m, t.prob(s));
  return m;
}

}  // namespace entrofact
