#include <catch_amalgamated.hpp>

#include "entrofact/functionals.hpp"
#include "entrofact/rng.hpp"
#include "oracles.hpp"

using namespace entrofact;

namespace {

BoundaryCondition zero_boundary(const Region& r) {
  return BoundaryCondition::constant(boundary(r), 0);
}

ConfigFunction random_density(const GibbsTable& t, CounterRng& rng) {
  ConfigFunction f = t.constant_function(0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    f[s] = rng.exponential();
  return f;
}

}  // namespace

TEST_CASE("model construction rules") {
  CHECK_THROWS_AS(make_potts(1, 0.5, {0.0}), config_error);
  CHECK_THROWS_AS(make_hardcore(0.0), config_error);
  CHECK_THROWS_AS(make_hardcore(-2.0), config_error);
  // asymmetric pair potential rejected
  std::vector<PairPotential> pair(4);
  pair[0 * 2 + 1].value = 1.0;
  CHECK_THROWS_AS(SpinModel(2, pair, {0.0, 0.0}), config_error);
  // all-forbidden rejected
  std::vector<PairPotential> forb(4);
  for (auto& p : forb) p.forbidden = true;
  CHECK_THROWS_AS(SpinModel(2, forb, {0.0, 0.0}), config_error);
}

TEST_CASE("hamiltonian evaluation") {
  SECTION("infinite temperature vanishes identically") {
    auto m = make_ising(0.0, 0.0);
    Region r = Region::chain(3);
    auto tau = zero_boundary(r);
    std::vector<int> cfg{0, 1, 0};
    auto h = hamiltonian(m, r, tau, cfg);
    REQUIRE(h);
    CHECK(*h == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("single site with plus boundary") {
    double beta = 0.37, field = 0.21;
    auto m = make_ising(beta, field);
    Region r = Region::chain(1);
    auto tau = zero_boundary(r);  // symbol 0 = +1
    std::vector<int> cfg{0};
    auto h = hamiltonian(m, r, tau, cfg);
    REQUIRE(h);
    CHECK(*h == Catch::Approx(-2.0 * beta - beta * field).epsilon(1e-13));
  }
  SECTION("hard constraint gives infinite energy") {
    auto m = make_hardcore(1.5);
    Region r = Region::chain(2);
    auto tau = zero_boundary(r);
    std::vector<int> both_occupied{1, 1};
    CHECK_FALSE(hamiltonian(m, r, tau, both_occupied));
    std::vector<int> one{1, 0};
    CHECK(hamiltonian(m, r, tau, one));
  }
  SECTION("incomplete configuration rejected") {
    auto m = make_ising(0.1, 0.0);
    Region r = Region::chain(2);
    auto tau = zero_boundary(r);
    std::vector<int> one_site{0};
    CHECK_THROWS_AS(hamiltonian(m, r, tau, one_site), config_error);
    BoundaryCondition missing;
    std::vector<int> cfg{0, 0};
    CHECK_THROWS_AS(hamiltonian(m, r, missing, cfg), config_error);
  }
}

TEST_CASE("potts with q=2 and symmetric field reproduces ising") {
  double beta = 0.42, field = 0.15;
  auto potts = make_potts(2, beta, {field, -field});
  auto ising = make_ising(beta / 2.0, 2.0 * field);
  for (int n = 1; n <= 4; ++n) {
    Region r = Region::chain(n);
    for (int sym : {0, 1}) {
      auto tau = BoundaryCondition::constant(boundary(r), sym);
      GibbsTable tp(potts, r, tau);
      GibbsTable ti(ising, r, tau);
      for (std::size_t s = 0; s < tp.num_states(); ++s)
        CHECK(tp.prob(s) == Catch::Approx(ti.prob(s)).margin(1e-12));
    }
  }
}

TEST_CASE("hard-core and coloring weights") {
  SECTION("activity one, single free site") {
    auto m = make_hardcore(1.0);
    Region r = Region::chain(1);
    GibbsTable t(m, r, zero_boundary(r));
    CHECK(t.prob(1) == Catch::Approx(0.5).margin(1e-14));
  }
  SECTION("activity lambda, single site") {
    double lambda = 2.75;
    auto m = make_hardcore(lambda);
    Region r = Region::chain(1);
    GibbsTable t(m, r, zero_boundary(r));
    CHECK(t.prob(1) ==
          Catch::Approx(lambda / (1.0 + lambda)).epsilon(1e-13));
  }
  SECTION("colorings uniform over proper colorings") {
    auto m = make_colorings(3);
    Region r = Region::chain(2);
    GibbsTable t(m, r, zero_boundary(r));
    // proper: both differ from boundary color 0 and from each other
    int proper = 0;
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      auto cfg = t.decode(s);
      bool ok = cfg[0] != 0 && cfg[1] != 0 && cfg[0] != cfg[1];
      if (ok) {
        ++proper;
        CHECK(t.prob(s) > 0.0);
      } else {
        CHECK(t.prob(s) == 0.0);
      }
    }
    for (std::size_t s = 0; s < t.num_states(); ++s)
      if (t.prob(s) > 0.0)
        CHECK(t.prob(s) == Catch::Approx(1.0 / proper).epsilon(1e-13));
  }
}

TEST_CASE("permissivity checks") {
  Region site1(2, {{0, 0}});
  CHECK(check_permissive(make_ising(0.7, 0.1), site1));
  CHECK(check_permissive(make_hardcore(3.0), Region::box({2, 2})));
  // two colors cannot color a site whose four neighbors use both colors
  CHECK_FALSE(check_permissive(make_colorings(2), site1));
  CHECK(check_permissive(make_colorings(5), site1));
}

TEST_CASE("irreducibility of the single-site chain") {
  Region chain2 = Region::chain(2);
  CHECK(check_irreducible(make_ising(0.4, 0.0), chain2,
                          zero_boundary(chain2)));
  CHECK(check_irreducible(make_hardcore(1.2), chain2,
                          zero_boundary(chain2)));
  // frozen 3-coloring instance: two admissible states, no single-site move
  auto m = make_colorings(3);
  BoundaryCondition tau(std::map<Point, int>{{{-1}, 0}, {{2}, 0}});
  CHECK_FALSE(check_irreducible(m, chain2, tau));
}

TEST_CASE("gibbs table basics") {
  SECTION("infinite temperature is uniform") {
    auto m = make_potts(3, 0.0, {0.0, 0.0, 0.0});
    Region r = Region::box({2, 2});
    GibbsTable t(m, r, zero_boundary(r));
    for (std::size_t s = 0; s < t.num_states(); ++s)
      CHECK(t.prob(s) == Catch::Approx(1.0 / 81.0).epsilon(1e-12));
  }
  SECTION("row sum and support invariants") {
    auto m = make_hardcore(2.0);
    Region r = Region::chain(3);
    GibbsTable t(m, r, zero_boundary(r));
    double sum = 0.0;
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      sum += t.prob(s);
      auto cfg = t.decode(s);
      bool forbidden = false;
      for (int i = 0; i + 1 < 3; ++i)
        if (cfg[i] == 1 && cfg[i + 1] == 1) forbidden = true;
      if (forbidden) CHECK(t.prob(s) == 0.0);
      CHECK(t.prob(s) >= 0.0);
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("non-permissive instance raises") {
    auto m = make_colorings(2);
    Region r = Region::chain(1);
    BoundaryCondition tau(std::map<Point, int>{{{-1}, 0}, {{1}, 1}});
    CHECK_THROWS_AS(GibbsTable(m, r, tau), non_permissive_error);
  }
  SECTION("state cap enforced") {
    auto m = make_ising(0.1, 0.0);
    Region r = Region::chain(8);
    CHECK_THROWS_AS(GibbsTable(m, r, zero_boundary(r), 100), size_error);
  }
  SECTION("matches transfer matrix on a 1d chain with plus boundary") {
    auto m = make_ising(0.4, 0.1);
    Region r = Region::chain(3);
    GibbsTable t(m, r, zero_boundary(r));
    oracles::TransferMatrix1D tm(m, 3, 0, 0);
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      auto cfg = t.decode(s);
      CHECK(t.prob(s) ==
            Catch::Approx(tm.config_probability(cfg, m, 0, 0)).margin(1e-12));
    }
  }
}

TEST_CASE("conditional expectation") {
  auto m = make_ising(0.3, 0.0);
  Region r = Region::chain(4);
  GibbsTable t(m, r, zero_boundary(r));
  CounterRng rng(11, 0);
  ConfigFunction f = random_density(t, rng);

  SECTION("empty block is the identity") {
    ConfigFunction g = conditional_expectation(t, Region(), f);
    for (std::size_t s = 0; s < t.num_states(); ++s) CHECK(g[s] == f[s]);
  }
  SECTION("full block gives the constant mean") {
    ConfigFunction g = conditional_expectation(t, r, f);
    double mean = mu_f(t, f);
    for (std::size_t s = 0; s < t.num_states(); ++s)
      CHECK(g[s] == Catch::Approx(mean).margin(1e-13));
  }
  SECTION("projection is idempotent") {
    Region a(1, {{1}, {2}});
    ConfigFunction g = conditional_expectation(t, a, f);
    ConfigFunction gg = conditional_expectation(t, a, g);
    for (std::size_t s = 0; s < t.num_states(); ++s)
      CHECK(gg[s] == Catch::Approx(g[s]).margin(1e-12));
  }
  SECTION("result is constant along block coordinates") {
    Region a(1, {{0}});
    ConfigFunction g = conditional_expectation(t, a, f);
    for (std::size_t s = 0; s < t.num_states(); ++s) {
      std::size_t flipped = s ^ 1u;  // first vertex is the low bit
      CHECK(g[s] == Catch::Approx(g[flipped]).margin(1e-14));
    }
  }
  SECTION("zero-mass fibers yield zero and are flagged") {
    // colorings with a matching boundary color freeze sites next to it;
    // conditioning on the middle site leaves whole fibers without mass
    auto mc = make_colorings(3);
    Region v = Region::chain(3);
    BoundaryCondition tau(std::map<Point, int>{{{-1}, 0}, {{3}, 0}});
    GibbsTable tc(mc, v, tau);
    ConfigFunction h = tc.constant_function(1.0);
    std::size_t zero_fibers = 0;
    ConfigFunction g =
        conditional_expectation(tc, Region(1, {{1}}), h, &zero_fibers);
    CHECK(zero_fibers > 0);
    for (std::size_t s = 0; s < tc.num_states(); ++s)
      if (tc.prob(s) > 0.0) CHECK(g[s] == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("dlr property") {
  CounterRng rng(12, 0);
  SECTION("1d ising chains") {
    auto m = make_ising(0.25, 0.05);
    for (int n = 2; n <= 6; ++n) {
      Region r = Region::chain(n);
      GibbsTable t(m, r, zero_boundary(r));
      ConfigFunction f = random_density(t, rng);
      // random sub-chain
      int a = static_cast<int>(rng.below(n));
      int b = static_cast<int>(rng.below(n));
      if (a > b) std::swap(a, b);
      std::vector<Point> pts;
      for (int i = a; i <= b; ++i) pts.push_back({i});
      CHECK(dlr_check(t, Region(1, pts), f) <= 1e-10);
      CHECK(dlr_check(t, r, f) <= 1e-14);
    }
  }
  SECTION("100 random sub-regions on 2x3 potts q=3") {
    auto m = make_potts(3, 0.2, {0.1, 0.0, -0.1});
    Region r = Region::box({2, 3});
    GibbsTable t(m, r, zero_boundary(r));
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      ConfigFunction f = random_density(t, rng);
      std::vector<Point> pts;
      for (const auto& p : r.points())
        if (rng.uniform() < 0.5) pts.push_back(p);
      Region lam(2, pts);
      worst = std::max(worst, dlr_check(t, lam, f));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("entropy and covariance functionals") {
  auto m = make_ising(0.3, 0.1);
  Region r = Region::chain(3);
  GibbsTable t(m, r, zero_boundary(r));
  CounterRng rng(13, 0);

  SECTION("constants have zero entropy and variance") {
    ConfigFunction c = t.constant_function(3.7);
    CHECK(entropy(t, c) == Catch::Approx(0.0).margin(1e-14));
    CHECK(variance(t, c) == Catch::Approx(0.0).margin(1e-14));
  }
  SECTION("uniform two-point, f = (2, 0)") {
    auto m0 = make_ising(0.0, 0.0);
    Region one = Region::chain(1);
    GibbsTable tu(m0, one, zero_boundary(one));
    ConfigFunction f = tu.make_function({2.0, 0.0});
    CHECK(entropy(tu, f) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SECTION("entropy is positively homogeneous") {
    ConfigFunction f = random_density(t, rng);
    double e1 = entropy(t, f);
    ConfigFunction g = f;
    for (auto& x : g.values) x *= 7.5;
    CHECK(entropy(t, g) == Catch::Approx(7.5 * e1).epsilon(1e-12));
  }
  SECTION("negative f rejected") {
    ConfigFunction f = t.constant_function(1.0);
    f[0] = -0.5;
    CHECK_THROWS_AS(entropy(t, f), config_error);
  }
  SECTION("covariance vanishes for functions measurable off the block") {
    Region a(1, {{0}});
    FiberPartition fp = t.fibers(a);
    // f depends only on sites 1,2 (constant on each fiber)
    ConfigFunction f = t.constant_function(0.0);
    for (std::size_t s = 0; s < t.num_states(); ++s)
      f[s] = 1.0 + t.digit(s, 1) + 3.0 * t.digit(s, 2);
    ConfigFunction g = random_density(t, rng);
    ConfigFunction cov = covariance_block(t, fp, f, g);
    for (std::size_t s = 0; s < t.num_states(); ++s)
      CHECK(cov[s] == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("cov_A(f,f) is a nonnegative function") {
    Region a(1, {{0}, {2}});
    ConfigFunction f = random_density(t, rng);
    ConfigFunction var = covariance_block(t, a, f, f);
    for (std::size_t s = 0; s < t.num_states(); ++s)
      CHECK(var[s] >= -1e-13);
  }
  SECTION("block entropy monotone in the block") {
    for (int rep = 0; rep < 25; ++rep) {
      ConfigFunction f = random_density(t, rng);
      Region small(1, {{1}});
      Region big(1, {{0}, {1}});
      CHECK(mu_ent_block(t, small, f) <=
            mu_ent_block(t, big, f) + 1e-12);
      CHECK(mu_ent_block(t, big, f) <= entropy(t, f) + 1e-12);
    }
  }
}

TEST_CASE("marginal density psi") {
  SECTION("delta = lambda returns the table itself") {
    auto m = make_ising(0.2, 0.0);
    Region r = Region::chain(3);
    GibbsTable t(m, r, zero_boundary(r));
    auto psi = psi_marginal(t, r);
    REQUIRE(psi.size() == t.num_states());
    for (std::size_t s = 0; s < psi.size(); ++s)
      CHECK(psi[s] == Catch::Approx(t.prob(s)).margin(1e-14));
  }
  SECTION("infinite temperature is uniform") {
    auto m = make_potts(3, 0.0, {0.0, 0.0, 0.0});
    Region r = Region::box({2, 2});
    GibbsTable t(m, r, zero_boundary(r));
    Region delta(2, {{0, 0}, {1, 1}});
    auto psi = psi_marginal(t, delta);
    for (double v : psi) CHECK(v == Catch::Approx(1.0 / 9.0).epsilon(1e-12));
  }
  SECTION("normalization") {
    auto m = make_hardcore(1.7);
    Region r = Region::box({2, 2});
    GibbsTable t(m, r, zero_boundary(r));
    Region delta(2, {{0, 0}, {0, 1}});
    auto psi = psi_marginal(t, delta);
    double sum = 0.0;
    for (double v : psi) sum += v;
    CHECK(sum == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("matches the transfer-matrix site marginal") {
    auto m = make_ising(0.35, 0.0);
    Region r = Region::chain(5);
    GibbsTable t(m, r, zero_boundary(r));
    Region delta(1, {{0}});
    auto psi = psi_marginal(t, delta);
    oracles::TransferMatrix1D tm(m, 5, 0, 0);
    for (int s = 0; s < 2; ++s)
      CHECK(psi[s] == Catch::Approx(tm.site_marginal(0, s)).margin(1e-12));
    std::vector<int> sig{1};
    CHECK(marginal_density_psi(m, r, delta, zero_boundary(r), sig) ==
          Catch::Approx(tm.site_marginal(0, 1)).margin(1e-12));
  }
}

TEST_CASE("telescoping identities") {
  CounterRng rng(14, 0);
  SECTION("single level reduces to the basic decomposition") {
    auto m = make_ising(0.3, 0.0);
    Region r = Region::chain(4);
    GibbsTable t(m, r, zero_boundary(r));
    ConfigFunction f = random_density(t, rng);
    Region lam(1, {{1}, {2}});
    auto rep = telescope_check(t, {Region(), lam, r}, f);
    CHECK(rep.decomposition_residual <= 1e-10);
    CHECK(rep.telescope_residual <= 1e-10);
  }
  SECTION("constants give zero everywhere") {
    auto m = make_ising(0.3, 0.0);
    Region r = Region::chain(3);
    GibbsTable t(m, r, zero_boundary(r));
    ConfigFunction f = t.constant_function(2.0);
    Region lam(1, {{0}});
    auto rep = telescope_check(t, {lam, r}, f);
    CHECK(rep.decomposition_residual <= 1e-13);
    CHECK(rep.telescope_residual <= 1e-13);
  }
  SECTION("three-level chain on a 2x2 block") {
    auto m = make_ising(0.25, 0.05);
    Region r = Region::box({2, 2});
    GibbsTable t(m, r, zero_boundary(r));
    Region l0(2, {{0, 0}});
    Region l1(2, {{0, 0}, {1, 0}});
    Region l2(2, {{0, 0}, {1, 0}, {0, 1}});
    for (int rep_i = 0; rep_i < 20; ++rep_i) {
      ConfigFunction f = random_density(t, rng);
      auto rep = telescope_check(t, {l0, l1, l2, r}, f);
      CHECK(rep.decomposition_residual <= 1e-10);
      CHECK(rep.telescope_residual <= 1e-10);
    }
  }
  SECTION("non-nested chain rejected") {
    auto m = make_ising(0.1, 0.0);
    Region r = Region::chain(3);
    GibbsTable t(m, r, zero_boundary(r));
    ConfigFunction f = t.constant_function(1.0);
    Region a(1, {{0}});
    Region b(1, {{1}});
    CHECK_THROWS_AS(telescope_check(t, {a, b}, f), config_error);
  }
}

TEST_CASE("variational principle") {
  auto m = make_ising(0.3, 0.1);
  Region r = Region::chain(3);
  GibbsTable t(m, r, zero_boundary(r));
  Region u(1, {{0}, {1}});
  CounterRng rng(15, 0);
  FiberPartition fp = t.fibers(u);

  SECTION("the optimizer h = log(g / mu g) attains equality") {
    ConfigFunction g = random_density(t, rng);
    ConfigFunction mg = conditional_expectation(t, fp, g);
    ConfigFunction h = t.constant_function(0.0);
    for (std::size_t s = 0; s < t.num_states(); ++s)
      h[s] = std::log(g[s] / mg[s]);
    CHECK(variational_check(t, u, g, h) == VariationalOutcome::holds);
    // equality: mu_U(g h) == Ent_U(g) within 1e-10
    ConfigFunction gh = t.constant_function(0.0);
    for (std::size_t s = 0; s < t.num_states(); ++s) gh[s] = g[s] * h[s];
    ConfigFunction lhs = conditional_expectation(t, fp, gh);
    ConfigFunction rhs = ent_block(t, fp, g);
    for (std::size_t s = 0; s < t.num_states(); ++s)
      CHECK(lhs[s] == Catch::Approx(rhs[s]).margin(1e-10));
  }
  SECTION("h = 0 is feasible and trivial") {
    ConfigFunction g = random_density(t, rng);
    ConfigFunction h = t.constant_function(0.0);
    CHECK(variational_check(t, u, g, h) == VariationalOutcome::holds);
  }
  SECTION("200 random feasible h") {
    int held = 0;
    for (int rep = 0; rep < 200; ++rep) {
      ConfigFunction g = random_density(t, rng);
      // random h shifted fiberwise so that mu_U e^h = 1 exactly
      ConfigFunction h = t.constant_function(0.0);
      for (std::size_t s = 0; s < t.num_states(); ++s)
        h[s] = 2.0 * rng.uniform() - 1.0;
      ConfigFunction eh = t.constant_function(0.0);
      for (std::size_t s = 0; s < t.num_states(); ++s)
        eh[s] = std::exp(h[s]);
      ConfigFunction meh = conditional_expectation(t, fp, eh);
      for (std::size_t s = 0; s < t.num_states(); ++s)
        h[s] -= std::log(meh[s]);
      auto outcome = variational_check(t, u, g, h);
      REQUIRE(outcome != VariationalOutcome::violated);
      if (outcome == VariationalOutcome::holds) ++held;
    }
    CHECK(held == 200);
  }
  SECTION("infeasible h rejected") {
    ConfigFunction g = t.constant_function(1.0);
    ConfigFunction h = t.constant_function(1.0);  // mu e^h = e > 1
    CHECK(variational_check(t, u, g, h) ==
          VariationalOutcome::rejected_infeasible);
  }
}

TEST_CASE("product structure at infinite temperature") {
  // mu_B mu_A f = mu f when mu is a product (two-block smoothing is exact)
  auto m = make_ising(0.0, 0.0);
  Region r = Region::chain(4);
  GibbsTable t(m, r, zero_boundary(r));
  Region a(1, {{0}, {1}});
  Region b(1, {{2}, {3}});
  CounterRng rng(16, 0);
  ConfigFunction f = random_density(t, rng);
  ConfigFunction g =
      conditional_expectation(t, b, conditional_expectation(t, a, f));
  double mean = mu_f(t, f);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    CHECK(g[s] == Catch::Approx(mean).margin(1e-12));
}
