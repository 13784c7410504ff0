// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
// Tolerances are pinned in code next to each check.

#include <chrono>
#include <cstdio>

#include "entrofact/dynamics.hpp"
#include "entrofact/simulate.hpp"
#include "entrofact/slab_decomposition.hpp"
#include "entrofact/ssm.hpp"
#include "oracles.hpp"

using namespace entrofact;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str());
  if (!pass) ++g_failures;
}

BoundaryCondition zero_boundary(const Region& r) {
  return BoundaryCondition::constant(boundary(r), 0);
}

ConfigFunction random_density(const GibbsTable& t, std::uint64_t seed,
                              std::uint64_t stream) {
  CounterRng rng(seed, stream);
  ConfigFunction f = t.constant_function(0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s) f[s] = rng.exponential();
  return f;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

SpinModel random_model(CounterRng& rng) {
  switch (rng.below(4)) {
    case 0:
      return make_ising(0.5 * rng.uniform(), 0.4 * rng.uniform() - 0.2);
    case 1:
      return make_potts(3, 0.4 * rng.uniform(),
                        {0.1 * rng.uniform(), 0.0, -0.1 * rng.uniform()});
    case 2:
      return make_hardcore(0.5 + 1.5 * rng.uniform());
    default:
      return make_ising(0.3 * rng.uniform(), 0.0);
  }
}

Region random_region(CounterRng& rng, bool big) {
  if (big) return Region::chain(16);  // 2^16 states at q = 2
  switch (rng.below(3)) {
    case 0:
      return Region::chain(2 + static_cast<int>(rng.below(8)));
    case 1:
      return Region::box({2, 2 + static_cast<int>(rng.below(2))});
    default: {
      // random subset of a 3x4 box, at least 2 sites
      std::vector<Point> pts;
      for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 4; ++y)
          if (rng.uniform() < 0.45) pts.push_back({x, y});
      if (pts.size() < 2) pts = {{0, 0}, {1, 0}};
      return Region(2, pts);
    }
  }
}

Region random_subset(const Region& v, CounterRng& rng) {
  std::vector<Point> pts;
  for (const auto& p : v.points())
    if (rng.uniform() < 0.5) pts.push_back(p);
  return Region(v.dim(), pts);
}

// ---------------------------------------------------------------------------

void criterion_1_structural_identities() {
  auto t0 = std::chrono::steady_clock::now();
  const double tol = 1e-10;
  double worst = 0.0;
  int instances = 0;
  for (int i = 0; i < 500; ++i) {
    CounterRng rng(0xC1, i);
    bool big = (i % 125 == 37);  // a few instances at 2^16 states
    SpinModel m = big ? make_ising(0.2, 0.05) : random_model(rng);
    Region v = random_region(rng, big);
    GibbsTable t(m, v, zero_boundary(v));
    ConfigFunction f = random_density(t, 0xC1F, i);

    worst = std::max(worst, dlr_check(t, random_subset(v, rng), f));

    Region l1 = random_subset(v, rng);
    Region l2 = region_union(l1, random_subset(v, rng));
    auto tele = telescope_check(t, {Region(), l1, l2, v}, f);
    worst = std::max(worst, tele.decomposition_residual);
    worst = std::max(worst, tele.telescope_residual);

    BlockWeights w =
        rng.below(2) ? singleton_weights(v) : even_odd_weights(v);
    BlockDynamics dyn(t, w);
    ConfigFunction g = random_density(t, 0xC1F2, i);
    // mean-one normalization so the absolute tolerance is meaningful
    double mf = mu_f(t, f), mg = mu_f(t, g);
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      f[s] /= mf;
      g[s] /= mg;
    }
    ConfigFunction lf = dyn.apply_generator(f);
    ConfigFunction lg = dyn.apply_generator(g);
    double ip_lf_g = 0.0, ip_f_lg = 0.0, ip_f_lf = 0.0;
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      ip_lf_g += t.prob(s) * lf[s] * g[s];
      ip_f_lg += t.prob(s) * f[s] * lg[s];
      ip_f_lf += t.prob(s) * f[s] * lf[s];
    }
    worst = std::max(worst, std::abs(dirichlet_form(dyn, f, f) + ip_f_lf));
    worst = std::max(worst, std::abs(ip_lf_g - ip_f_lg));
    ++instances;
  }
  double secs = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "structural identities: %d instances, max residual %.3g "
                "(tol 1e-10), %.1fs (limit 300s)",
                instances, worst, secs);
  report(1, worst <= tol && secs < 300.0, buf);
}

void criterion_2_product_ground_truth() {
  // (a) weighted Shearer on <= 3 sites, 1000 random (cover, f)
  double worst_ratio = 0.0;
  for (int i = 0; i < 1000; ++i) {
    CounterRng rng(0xC2, i);
    SpinModel m = rng.below(2) ? make_ising(0.0, 0.0)
                               : make_potts(3, 0.0, {0.0, 0.0, 0.0});
    Region v = rng.below(2) ? Region::chain(3)
                            : Region(2, {{0, 0}, {1, 0}, {0, 1}});
    if (rng.below(4) == 0) v = Region::chain(2);
    GibbsTable t(m, v, zero_boundary(v));
    std::vector<WeightedBlock> blocks;
    std::size_t n = v.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      if (rng.uniform() < 0.35) continue;
      std::vector<Point> pts;
      for (std::size_t b = 0; b < n; ++b)
        if (mask & (std::size_t{1} << b)) pts.push_back(v.point(b));
      blocks.push_back({Region(v.dim(), pts), rng.uniform()});
    }
    if (blocks.empty()) blocks.push_back({v, 1.0});
    BlockWeights w(v, std::move(blocks));
    ConfigFunction f = random_density(t, 0xC2F, i);
    auto rep = check_shearer_product(t, w, f);
    if (!rep.degenerate && std::isfinite(rep.ratio))
      worst_ratio = std::max(worst_ratio, rep.ratio);
  }
  bool pass_a = worst_ratio <= 1.0 + 1e-8;

  // (b) two-block defect vanishes and the smoothed bound is an identity
  auto m0 = make_ising(0.0, 0.0);
  Region sq = Region::box({2, 2});
  GibbsTable t0(m0, sq, zero_boundary(sq));
  Region a(2, {{0, 0}, {1, 0}, {0, 1}});
  Region b(2, {{0, 1}, {1, 0}, {1, 1}});
  double eps = two_block_epsilon(t0, a, b);
  double worst_gap = 0.0;
  bool all_hold = true;
  for (int i = 0; i < 100; ++i) {
    ConfigFunction f = random_density(t0, 0xC2B, i);
    auto rep = check_two_block(t0, a, b, f);
    all_hold = all_hold && rep.applicable && rep.direct_ok && rep.smoothed_ok;
    worst_gap = std::max(worst_gap, std::abs(rep.smoothed_gap));
  }
  bool pass_b = eps <= 1e-12 && worst_gap <= 1e-10 && all_hold;

  // (c) even/odd constant equals one
  OptimizerConfig cfg;
  cfg.seed = 7;
  GibbsTable tc(m0, sq, zero_boundary(sq));
  auto delta = even_odd_delta(tc, cfg);
  bool pass_c = std::abs(delta.delta_hat - 1.0) <= 1e-4;

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "product ground truth: shearer max ratio %.10f (<= 1+1e-8), "
                "eps %.2g (= 0), cesi2 gap %.2g (<= 1e-10), delta %.6f "
                "(= 1 +- 1e-4)",
                worst_ratio, eps, worst_gap, delta.delta_hat);
  report(2, pass_a && pass_b && pass_c, buf);
}

void criterion_3_two_block_bounds() {
  int violations = 0;
  double eps_01 = 0.0, eps_03 = 0.0;
  for (double beta : {0.1, 0.3}) {
    auto m = make_ising(beta, 0.0);
    Region v = Region::chain(5);
    GibbsTable t(m, v, zero_boundary(v));
    Region a(1, {{0}, {1}, {2}});
    Region b(1, {{2}, {3}, {4}});
    double eps = two_block_epsilon(t, a, b);
    (beta == 0.1 ? eps_01 : eps_03) = eps;
    for (int i = 0; i < 500; ++i) {
      ConfigFunction f = random_density(t, 0xC3, i);
      auto rep = check_two_block(t, a, b, f);
      if (!(rep.applicable && rep.direct_ok && rep.smoothed_ok &&
            rep.penalty_ok))
        ++violations;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "two-block bounds on n=5 halves: eps(0.1)=%.4f eps(0.3)=%.4f, "
                "theta=84e/(1-e)^2, violations %d/1000",
                eps_01, eps_03, violations);
  report(3, violations == 0, buf);
}

void criterion_4_tensorization() {
  auto m = make_ising(0.3, 0.0);
  Region v(1, {{0}, {1}, {3}, {4}});
  GibbsTable t(m, v, zero_boundary(v));
  Region r1(1, {{0}, {1}});
  Region r2(1, {{3}, {4}});
  auto [e1, o1] = even_odd_split(r1);
  auto [e2, o2] = even_odd_split(r2);
  Region a11(1, {{0}, {1}}), a12(1, {{1}});
  Region a21(1, {{3}}), a22(1, {{3}, {4}});
  int violations = 0;
  for (int i = 0; i < 200; ++i) {
    ConfigFunction f = random_density(t, 0xC4, i);
    auto disjoint = check_tensorization(t, {r1, r2}, {{e1, o1}, {e2, o2}}, f);
    auto overlap =
        check_tensorization(t, {r1, r2}, {{a11, a12}, {a21, a22}}, f);
    if (!disjoint.conclusion_ok || !overlap.conclusion_ok) ++violations;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "tensorization on two-row products (disjoint and overlapping "
                "columns): violations %d/200",
                violations);
  report(4, violations == 0, buf);
}

void criterion_5_reduction() {
  OptimizerConfig cfg;
  cfg.seed = 11;
  std::map<int, double> delta_by_n;
  int violations = 0, skipped = 0;
  for (int i = 0; i < 200; ++i) {
    CounterRng rng(0xC5, i);
    int n = 3 + static_cast<int>(rng.below(4));  // chains up to n = 6
    auto m = make_ising(0.3, 0.0);
    Region v = Region::chain(n);
    GibbsTable t(m, v, zero_boundary(v));
    if (!delta_by_n.count(n))
      delta_by_n[n] = even_odd_delta(t, cfg).delta_hat;
    // random weights: a few random blocks with random rates
    std::vector<WeightedBlock> blocks;
    for (int bidx = 0; bidx < 4; ++bidx) {
      Region blk = random_subset(v, rng);
      if (blk.empty()) continue;
      blocks.push_back({blk, 0.2 + rng.uniform()});
    }
    if (blocks.empty()) blocks.push_back({v, 1.0});
    BlockWeights w(v, std::move(blocks));
    ConfigFunction f = random_density(t, 0xC5F, i);
    auto [e, o] = even_odd_split(v);
    double eo = mu_ent_block(t, e, f) + mu_ent_block(t, o, f);
    double ent = entropy(t, f);
    // measured even/odd constant, with the per-f realized fallback so the
    // proposition's hypothesis genuinely holds for this sample
    double c_eo = 1.0 / delta_by_n[n];
    if (eo > 0.0) c_eo = std::max(c_eo, ent / eo);
    auto rep = reduction_even_odd(t, w, f, c_eo);
    if (!rep.precondition_ok)
      ++skipped;
    else if (!rep.pass)
      ++violations;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "even/odd reduction with measured C on n<=6 chains: "
                "violations %d/200, skipped %d",
                violations, skipped);
  report(5, violations == 0 && skipped == 0, buf);
}

void criterion_6_mlsi_jensen() {
  int violations = 0;
  for (int i = 0; i < 500; ++i) {
    CounterRng rng(0xC6, i);
    SpinModel m = random_model(rng);
    Region v = random_region(rng, false);
    GibbsTable t(m, v, zero_boundary(v));
    ConfigFunction f = random_density(t, 0xC6F, i);
    Region blk = random_subset(v, rng);
    if (blk.empty()) blk = Region(v.dim(), {v.point(0)});
    auto rep = jensen_check(t, blk, f);
    if (!rep.pass) ++violations;
  }
  auto m = make_ising(0.3, 0.1);
  Region v = Region::chain(3);
  GibbsTable t(m, v, zero_boundary(v));
  BlockDynamics dyn(t, full_block_weights(v));
  OptimizerConfig cfg;
  cfg.seed = 13;
  auto est = mlsi_constant(dyn, cfg);
  bool pass = violations == 0 && est.rho_hat >= 1.0 - 1e-8;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "jensen fiberwise violations %d/500; full-block MLSI ratio "
                "%.9f (>= 1 - 1e-8)",
                violations, est.rho_hat);
  report(6, pass, buf);
}

void criterion_7_dynamics_oracles() {
  // (a) full-block gap = 1 +- 1e-10
  auto m = make_ising(0.3, 0.1);
  Region v = Region::chain(3);
  GibbsTable t(m, v, zero_boundary(v));
  BlockDynamics dyn(t, full_block_weights(v));
  double gap = spectral_gap(dyn).value;
  bool pass_gap = std::abs(gap - 1.0) <= 1e-10;

  // (b) t_mix(1/4) = log 4 exactly when TV(0) = 1 (hard constraint)
  auto hc = make_hardcore(1.0);
  Region pair = Region::chain(2);
  GibbsTable thc(hc, pair, zero_boundary(pair));
  BlockDynamics dhc(thc, full_block_weights(pair));
  auto curve = tv_mixing_curve(dhc, {0.5, 1.0, 1.5, 2.0}, 0.25,
                               std::size_t{1} << 16, 1e-9);
  bool pass_tmix = std::abs(curve.t_mix_quarter - std::log(4.0)) <= 1e-6;

  // (c) infinite-temperature product chain matches the closed form
  auto m0 = make_ising(0.0, 0.0);
  int n = 5;
  Region chain = Region::chain(n);
  GibbsTable t0(m0, chain, zero_boundary(chain));
  BlockDynamics d0(t0, singleton_weights(chain));
  double worst = 0.0;
  for (double time : {0.1, 0.4, 0.9, 1.6, 2.5, 4.0})
    worst = std::max(worst,
                     std::abs(tv_from_worst_start(d0, time) -
                              oracles::product_chain_tv(n, 2, time)));
  bool pass_tv = worst <= 1e-8;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "dynamics oracles: gap %.12f (1 +- 1e-10), t_mix %.8f "
                "(log4 +- 1e-6), product TV defect %.2g (<= 1e-8)",
                gap, curve.t_mix_quarter, worst);
  report(7, pass_gap && pass_tmix && pass_tv, buf);
}

void criterion_8_monte_carlo() {
  // (a) magnetization on the 16-chain vs the transfer matrix
  double beta = 0.3;
  auto m = make_ising(beta, 0.0);
  int n = 16;
  Region v = Region::chain(n);
  SimulationConfig cfg;
  cfg.horizon = 100000.0;  // unit-rate sites: one sweep per unit time
  cfg.sample_dt = 1.0;
  cfg.seed = 20240817;
  auto series = mc_simulate(m, v, zero_boundary(v), singleton_weights(v), cfg,
                            {observable_mean_spin(v)});
  std::size_t burn = series.columns[0].size() / 10;
  std::vector<double> tail(series.columns[0].begin() + burn,
                           series.columns[0].end());
  double tau = integrated_autocorrelation_time(tail);
  std::size_t batch = static_cast<std::size_t>(std::ceil(25.0 * tau));
  auto bm = batch_means(tail, batch);
  oracles::TransferMatrix1D tm(m, n, 0, 0);
  double drift = std::abs(bm.mean - tm.mean_spin());
  bool pass_mag = drift <= 3.0 * bm.std_error;

  // (b) infinite-temperature block resamples are exactly uniform
  auto m0 = make_ising(0.0, 0.0);
  Region sq = Region::box({2, 2});
  SimulationConfig ucfg;
  ucfg.sample_dt = 12.0;
  ucfg.horizon = 12.0 * 100000;
  ucfg.seed = 99;
  std::vector<Observable> obs;
  obs.push_back({"code", [](std::span<const int> c) {
                   double code = 0.0, mult = 1.0;
                   for (int s : c) {
                     code += mult * s;
                     mult *= 2.0;
                   }
                   return code;
                 }});
  auto useries =
      mc_simulate(m0, sq, zero_boundary(sq), full_block_weights(sq), ucfg, obs);
  std::vector<double> counts(16, 0.0);
  for (std::size_t i = 1; i < useries.columns[0].size(); ++i)
    counts[static_cast<int>(useries.columns[0][i])] += 1.0;
  double total = 0.0;
  for (double c : counts) total += c;
  double expected = total / 16.0, stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  double pval = chi_square_p_value(stat, 15);
  bool pass_chi = pval > 0.001;

  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "monte carlo: |m_hat - m_exact| = %.5f vs 3se = %.5f "
                "(10^5 sweeps); uniformity p = %.4f (> 0.001)",
                drift, 3.0 * bm.std_error, pval);
  report(8, pass_mag && pass_chi, buf);
}

void criterion_9_ssm() {
  auto t0 = std::chrono::steady_clock::now();
  double beta = 0.3;
  auto m = make_ising(beta, 0.0);
  auto est = fit_ssm(ssm_chain_sweep(m, 2, 10));
  double target = -std::log(std::tanh(beta));
  double rel = std::abs(est.a_hat - target) / target;
  double secs = seconds_since(t0);
  char buf[180];
  std::snprintf(buf, sizeof(buf),
                "ssm fit on distances 2..10: a_hat %.5f vs -log tanh(0.3) "
                "%.5f (rel err %.3f <= 0.10), %.1fs (limit 120s)",
                est.a_hat, target, rel, secs);
  report(9, rel <= 0.10 && secs < 120.0, buf);
}

void criterion_10_delta_band() {
  auto m = make_ising(0.2, 0.0);
  OptimizerConfig cfg;
  cfg.seed = 17;
  std::vector<double> deltas;
  bool in_band = true;
  for (int n = 2; n <= 8; ++n) {
    Region v = Region::chain(n);
    GibbsTable t(m, v, zero_boundary(v));
    auto est = even_odd_delta(t, cfg);
    deltas.push_back(est.delta_hat);
    if (!(est.delta_hat > 0.0 && est.delta_hat <= 1.0)) in_band = false;
  }
  bool no_collapse = true;
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    int n = static_cast<int>(i) + 2;
    double drop = (deltas[i - 1] - deltas[i]) / deltas[i - 1];
    if (n >= 5 && drop > 0.20) no_collapse = false;
  }
  // diagnostic-only recursion report (never asserted: k0 non-constructive)
  std::printf("       delta(n): ");
  for (double d : deltas) std::printf("%.4f ", d);
  std::printf("\n");
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    auto rep = recursion_consistency(static_cast<int>(i) + 2, 1,
                                     deltas[i - 1], deltas[i]);
    std::printf(
        "       recursion k=%d: delta(k)=%.4f vs rhs=%.4f -> %s%s\n", rep.k,
        rep.delta_k, rep.rhs, rep.holds ? "holds" : "fails (diagnostic only)",
        rep.informative ? "" : " [uninformative rhs <= 0]");
  }
  double dmin = *std::min_element(deltas.begin(), deltas.end());
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "delta band on n=2..8 at beta=0.2: min %.4f > 0, max drop "
                "below 20%% for n>=5: %s",
                dmin, no_collapse ? "yes" : "no");
  report(10, in_band && no_collapse && dmin > 0.0, buf);
}

void criterion_11_geometry() {
  int checked = 0, failures = 0;
  // smallest two k with at least one layer and a nonempty class of
  // integer rectangles
  std::vector<int> ks;
  for (int k = 0; static_cast<int>(ks.size()) < 2 && k < 60; ++k) {
    if (static_cast<int>(std::floor(scale_length(k + 2, 2) / 6.0)) >= 1)
      ks.push_back(k);
  }
  for (int k : ks) {
    auto sc = ScaleClass::make(k, 2);
    int wmax = static_cast<int>(std::floor(sc.lengths[0])) + 1;
    int hmax = static_cast<int>(std::floor(sc.lengths[1])) + 1;
    for (int w = 1; w <= wmax; ++w)
      for (int h = w; h <= hmax; ++h) {  // normalized: long side last
        Region v = Region::box({w, h});
        if (!in_scale_class(v, k) || (k > 0 && in_scale_class(v, k - 1)))
          continue;
        auto dec = slab_decomposition(v, k);
        auto rep = verify_slab_decomposition(dec);
        ++checked;
        if (!rep.all_ok()) ++failures;
      }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "slab decomposition on all d=2 rectangles at k=%d,%d: "
                "%d instances, %d property failures",
                ks[0], ks[1], checked, failures);
  report(11, checked > 0 && failures == 0, buf);
}

}  // namespace

int main() {
  std::printf("entrofact acceptance suite\n");
  criterion_1_structural_identities();
  criterion_2_product_ground_truth();
  criterion_3_two_block_bounds();
  criterion_4_tensorization();
  criterion_5_reduction();
  criterion_6_mlsi_jensen();
  criterion_7_dynamics_oracles();
  criterion_8_monte_carlo();
  criterion_9_ssm();
  criterion_10_delta_band();
  criterion_11_geometry();
  if (g_failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
