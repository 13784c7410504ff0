// Exact finite-volume Gibbs tables over mixed-radix configuration indices,
// fiber partitions for conditioning on sub-regions, conditional expectations
// and marginal densities.
//
// Index convention (shared by every module): vertex order = canonical region
// order, least-significant digit = first vertex, digit base = q.
#pragma once

#include <memory>

#include "entrofact/model.hpp"

namespace entrofact {

class GibbsTable;

// Nonnegative function on the configuration space of a (region, boundary)
// instance. `domain` ties it to the table it was built against.
struct ConfigFunction {
  std::vector<double> values;
  std::uint64_t domain = 0;

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// Grouping of configuration indices by their restriction outside a block A:
// states in the same fiber agree on V \ A. Precompute once per (table, A)
// when used in hot loops.
struct FiberPartition {
  std::vector<std::uint32_t> fiber_of;  // state -> fiber id
  std::size_t num_fibers = 0;
  std::size_t block_states = 0;  // q^{|A|}
  std::vector<double> fiber_mass;  // mu-mass per fiber
  Region block;
};

class GibbsTable {
 public:
  GibbsTable(SpinModel model, Region region, BoundaryCondition tau,
             std::size_t cap = kDefaultStateCap)
      : model_(std::move(model)),
        region_(std::move(region)),
        tau_(std::move(tau)) {
    q_ = static_cast<std::size_t>(model_.q());
    n_ = region_.size();
    nstates_ = checked_pow_states(q_, n_, cap);
    auto ch = compile_hamiltonian(model_, region_, tau_);
    std::vector<double> logw(nstates_,
                             -std::numeric_limits<double>::infinity());
    std::vector<int> cfg(n_, 0);
    for (std::size_t s = 0; s < nstates_; ++s) {
      if (auto lw = ch.log_weight(cfg)) logw[s] = *lw;
      if (n_ > 0) detail::next_config(cfg, model_.q());
    }
    log_z_ = logsumexp(logw);
    if (!std::isfinite(log_z_))
      throw non_permissive_error(
          "zero partition function: no admissible configuration");
    probs_.resize(nstates_);
    double total = 0.0;
    for (std::size_t s = 0; s < nstates_; ++s) {
      probs_[s] = std::isfinite(logw[s]) ? std::exp(logw[s] - log_z_) : 0.0;
      total += probs_[s];
    }
    // exact renormalization so identities hold at 1e-12 scale
    for (double& p : probs_) p /= total;
    stride_.assign(n_ ? n_ : 1, 1);
    for (std::size_t i = 1; i < n_; ++i) stride_[i] = stride_[i - 1] * q_;
    fnv1a h;
    h.feed_u64(model_.hash());
    h.feed_u64(region_hash(region_));
    h.feed_u64(tau_.hash());
    domain_hash_ = h.digest();
  }

  const SpinModel& model() const { return model_; }
  const Region& region() const { return region_; }
  const BoundaryCondition& tau() const { return tau_; }
  std::size_t num_states() const { return nstates_; }
  std::size_t q() const { return q_; }
  double log_z() const { return log_z_; }
  double prob(std::size_t s) const { return probs_[s]; }
  const std::vector<double>& probs() const { return probs_; }
  std::uint64_t domain_hash() const { return domain_hash_; }

  int digit(std::size_t state, std::size_t vertex) const {
    return static_cast<int>((state / stride_[vertex]) % q_);
  }
  std::size_t stride(std::size_t vertex) const { return stride_[vertex]; }

  std::size_t encode(std::span<const int> config) const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < n_; ++i)
      s += static_cast<std::size_t>(config[i]) * stride_[i];
    return s;
  }
  std::vector<int> decode(std::size_t state) const {
    std::vector<int> cfg(n_);
    for (std::size_t i = 0; i < n_; ++i) cfg[i] = digit(state, i);
    return cfg;
  }

  ConfigFunction make_function(std::vector<double> values) const {
    if (values.size() != nstates_)
      throw config_error("function length does not match state space");
    return ConfigFunction{std::move(values), domain_hash_};
  }
  ConfigFunction constant_function(double c) const {
    return ConfigFunction{std::vector<double>(nstates_, c), domain_hash_};
  }
  void check_domain(const ConfigFunction& f) const {
    if (f.values.size() != nstates_ ||
        (f.domain != 0 && f.domain != domain_hash_))
      throw config_error("function defined on a different domain");
  }

  FiberPartition fibers(const Region& block) const {
    if (!is_subset(block, region_))
      throw config_error("block is not a subset of the table region");
    FiberPartition fp;
    fp.block = block;
    std::vector<std::size_t> rest_positions;
    for (std::size_t i = 0; i < n_; ++i)
      if (!block.contains(region_.point(i))) rest_positions.push_back(i);
    fp.num_fibers = 1;
    for (std::size_t i = 0; i < rest_positions.size(); ++i) fp.num_fibers *= q_;
    fp.block_states = nstates_ / fp.num_fibers;
    fp.fiber_of.resize(nstates_);
    for (std::size_t s = 0; s < nstates_; ++s) {
      std::size_t id = 0, mult = 1;
      for (std::size_t pos : rest_positions) {
        id += static_cast<std::size_t>(digit(s, pos)) * mult;
        mult *= q_;
      }
      fp.fiber_of[s] = static_cast<std::uint32_t>(id);
    }
    fp.fiber_mass.assign(fp.num_fibers, 0.0);
    for (std::size_t s = 0; s < nstates_; ++s)
      fp.fiber_mass[fp.fiber_of[s]] += probs_[s];
    return fp;
  }

 private:
  SpinModel model_;
  Region region_;
  BoundaryCondition tau_;
  std::size_t q_ = 0, n_ = 0, nstates_ = 0;
  std::vector<double> probs_;
  std::vector<std::size_t> stride_;
  double log_z_ = 0.0;
  std::uint64_t domain_hash_ = 0;
};

inline GibbsTable gibbs_table(const SpinModel& model, const Region& region,
                              const BoundaryCondition& tau,
                              std::size_t cap = kDefaultStateCap) {
  return GibbsTable(model, region, tau, cap);
}

inline double mu_f(const GibbsTable& t, const ConfigFunction& f) {
  t.check_domain(f);
  double s = 0.0;
  for (std::size_t i = 0; i < t.num_states(); ++i) s += t.prob(i) * f[i];
  return s;
}

// mu_A f computed with a prebuilt partition: renormalize mu over each fiber.
// Zero-mass fibers yield 0 (they are mu-null; count reported if requested).
inline ConfigFunction conditional_expectation(const GibbsTable& t,
                                              const FiberPartition& fp,
                                              const ConfigFunction& f,
                                              std::size_t* zero_fibers = nullptr) {
  t.check_domain(f);
  std::vector<double> num(fp.num_fibers, 0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    num[fp.fiber_of[s]] += t.prob(s) * f[s];
  std::size_t zeros = 0;
  std::vector<double> avg(fp.num_fibers, 0.0);
  for (std::size_t j = 0; j < fp.num_fibers; ++j) {
    if (fp.fiber_mass[j] > 0.0)
      avg[j] = num[j] / fp.fiber_mass[j];
    else
      ++zeros;
  }
  if (zero_fibers) *zero_fibers = zeros;
  ConfigFunction out = t.constant_function(0.0);
  for (std::size_t s = 0; s < t.num_states(); ++s)
    out[s] = avg[fp.fiber_of[s]];
  return out;
}

inline ConfigFunction conditional_expectation(const GibbsTable& t,
                                              const Region& block,
                                              const ConfigFunction& f,
                                              std::size_t* zero_fibers = nullptr) {
  if (block.empty()) return f;  // mu_empty f = f
  return conditional_expectation(t, t.fibers(block), f, zero_fibers);
}

// Marginal density of the Gibbs measure on sub-region `delta` relative to
// the counting measure: one value per mixed-radix index over delta in its
// canonical order. Sums to 1.
inline std::vector<double> psi_marginal(const GibbsTable& t,
                                        const Region& delta) {
  if (!is_subset(delta, t.region()))
    throw config_error("psi_marginal: delta not inside the region");
  Region rest = region_difference(t.region(), delta);
  // fibers over block = rest group states by their delta-restriction
  FiberPartition fp = t.fibers(rest);
  return fp.fiber_mass;
}

inline double marginal_density_psi(const SpinModel& model, const Region& lambda,
                                   const Region& delta,
                                   const BoundaryCondition& tau,
                                   std::span<const int> sigma_delta,
                                   std::size_t cap = kDefaultStateCap) {
  GibbsTable t(model, lambda, tau, cap);
  auto psi = psi_marginal(t, delta);
  if (sigma_delta.size() != delta.size())
    throw config_error("sigma_delta arity mismatch");
  std::size_t idx = 0, mult = 1;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    idx += static_cast<std::size_t>(sigma_delta[i]) * mult;
    mult *= static_cast<std::size_t>(model.q());
  }
  return psi[idx];
}

}  // namespace entrofact
