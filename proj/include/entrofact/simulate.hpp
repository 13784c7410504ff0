// Event-driven continuous-time simulator for the weighted heat-bath block
// dynamics: one global exponential clock at rate sum(alpha), categorical
// block choice by alias table, exact conditional resampling of the chosen
// block with an LRU cache over repeated boundary restrictions.
#pragma once

#include <functional>
#include <list>
#include <unordered_map>

#include "entrofact/dynamics.hpp"
#include "entrofact/stats.hpp"

namespace entrofact {

struct Observable {
  std::string name;
  std::function<double(std::span<const int>)> fn;
};

inline Observable observable_mean_spin(const Region& v) {
  std::size_t n = v.size();
  return {"magnetization", [n](std::span<const int> cfg) {
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i) m += ising_spin(cfg[i]);
            return m / static_cast<double>(n);
          }};
}

inline Observable observable_symbol_fraction(const Region& v, int symbol,
                                             std::string name) {
  std::size_t n = v.size();
  return {std::move(name), [n, symbol](std::span<const int> cfg) {
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i) m += cfg[i] == symbol;
            return m / static_cast<double>(n);
          }};
}

// Overlap of a block with a reference configuration: fraction of agreeing
// sites inside the block.
inline Observable observable_block_overlap(const Region& v, const Region& block,
                                           std::vector<int> reference,
                                           std::string name) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (block.contains(v.point(i))) pos.push_back(i);
  return {std::move(name),
          [pos, reference](std::span<const int> cfg) {
            if (pos.empty()) return 0.0;
            double m = 0.0;
            for (std::size_t i = 0; i < pos.size(); ++i)
              m += cfg[pos[i]] == reference[pos[i]];
            return m / static_cast<double>(pos.size());
          }};
}

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // one per observable
};

struct SimulationConfig {
  double horizon = 100.0;
  double sample_dt = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  // replica stream id
  std::size_t block_state_cap = std::size_t{1} << 20;
  std::size_t cache_capacity = 4096;
  std::vector<int> initial;  // empty = all zeros
};

namespace detail {

// Conditional Gibbs tables for one block, keyed by the in-region boundary
// restriction. The exterior part of the boundary is frozen by tau.
class BlockResampler {
 public:
  BlockResampler(const SpinModel& model, const Region& v,
                 const BoundaryCondition& tau, const Region& block,
                 std::size_t block_state_cap, std::size_t cache_capacity)
      : model_(&model), region_(&v), tau_(&tau), block_(block),
        cache_cap_(cache_capacity) {
    checked_pow_states(model.q(), block.size(), block_state_cap);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (block.contains(v.point(i))) member_pos_.push_back(i);
    Region shell = boundary(block);
    for (const auto& p : shell.points()) {
      auto idx = v.index_of(p);
      if (idx != Region::npos && !block.contains(p))
        inner_shell_.push_back(idx);
      else if (idx == Region::npos) {
        if (!tau.at(p))
          throw config_error("tau does not cover the block boundary");
        outer_shell_.push_back(p);
      }
    }
  }

  // Draw a fresh block configuration given the current state and write it
  // back into `state` (indices follow the enclosing region order).
  void resample(std::vector<int>& state, CounterRng& rng) {
    key_.clear();
    for (auto idx : inner_shell_) key_.push_back(static_cast<char>(state[idx]));
    const auto& cum = table_for(key_, state);
    double u = rng.uniform();
    std::size_t lo = 0, hi = cum.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cum[mid] >= u)
        hi = mid;
      else
        lo = mid + 1;
    }
    std::size_t code = lo;
    int q = model_->q();
    for (std::size_t i = 0; i < member_pos_.size(); ++i) {
      state[member_pos_[i]] = static_cast<int>(code % q);
      code /= q;
    }
  }

 private:
  const std::vector<double>& table_for(const std::string& key,
                                       const std::vector<int>& state) {
    auto it = index_.find(key);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    std::map<Point, int> bc;
    for (auto idx : inner_shell_) bc[region_->point(idx)] = state[idx];
    for (const auto& p : outer_shell_) bc[p] = *tau_->at(p);
    GibbsTable tab(*model_, block_, BoundaryCondition(std::move(bc)));
    std::vector<double> cum(tab.num_states());
    double run = 0.0;
    for (std::size_t s = 0; s < tab.num_states(); ++s) {
      run += tab.prob(s);
      cum[s] = run;
    }
    cum.back() = 1.0;
    lru_.emplace_front(key, std::move(cum));
    index_[key] = lru_.begin();
    if (lru_.size() > cache_cap_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    return lru_.front().second;
  }

  const SpinModel* model_;
  const Region* region_;
  const BoundaryCondition* tau_;
  Region block_;
  std::vector<std::size_t> member_pos_;
  std::vector<std::size_t> inner_shell_;  // boundary sites inside the region
  std::vector<Point> outer_shell_;        // boundary sites frozen by tau
  std::size_t cache_cap_;
  std::string key_;
  std::list<std::pair<std::string, std::vector<double>>> lru_;
  std::unordered_map<std::string,
                     decltype(lru_)::iterator>
      index_;
};

}  // namespace detail

// One line per heat-bath event, for the optional JSON-lines event log.
using EventHook = std::function<void(double time, std::size_t block_index)>;

inline TimeSeries mc_simulate(const SpinModel& model, const Region& v,
                              const BoundaryCondition& tau,
                              const BlockWeights& weights,
                              const SimulationConfig& cfg,
                              const std::vector<Observable>& observables,
                              std::vector<int>* final_state = nullptr,
                              const EventHook& on_event = {}) {
  if (weights.domain() != v)
    throw config_error("weights domain must match the simulated region");
  std::vector<double> alphas;
  std::vector<detail::BlockResampler> resamplers;
  for (const auto& wb : weights.blocks())
    if (wb.alpha > 0.0) {
      alphas.push_back(wb.alpha);
      resamplers.emplace_back(model, v, tau, wb.block, cfg.block_state_cap,
                              cfg.cache_capacity);
    }
  if (alphas.empty()) throw config_error("no block has positive rate");
  if (weights.gamma() <= 0.0)
    std::fprintf(stderr,
                 "warning: gamma(alpha)=0, the chain need not be ergodic\n");
  double total_rate = 0.0;
  for (double a : alphas) total_rate += a;
  AliasTable alias(alphas);
  CounterRng rng(cfg.seed, cfg.stream);

  std::vector<int> state = cfg.initial.empty()
                               ? std::vector<int>(v.size(), 0)
                               : cfg.initial;
  if (state.size() != v.size())
    throw config_error("initial state arity mismatch");
  for (int s : state)
    if (s < 0 || s >= model.q())
      throw config_error("initial state symbol out of alphabet range");

  TimeSeries out;
  for (const auto& ob : observables) {
    out.names.push_back(ob.name);
    out.columns.emplace_back();
  }
  double t = 0.0, next_sample = 0.0;
  auto record = [&](double at) {
    out.times.push_back(at);
    for (std::size_t i = 0; i < observables.size(); ++i)
      out.columns[i].push_back(observables[i].fn(state));
  };
  while (true) {
    double dt = rng.exponential() / total_rate;
    double event_time = t + dt;
    while (next_sample <= std::min(event_time, cfg.horizon) + 1e-15) {
      record(next_sample);
      next_sample += cfg.sample_dt;
    }
    if (event_time > cfg.horizon) break;
    t = event_time;
    std::size_t b = alias.draw(rng);
    resamplers[b].resample(state, rng);
    if (on_event) on_event(t, b);
  }
  if (final_state) *final_state = state;
  return out;
}

// --- mixing-time scaling ---------------------------------------------------

struct ScalingRow {
  std::size_t volume = 0;
  double gamma = 0.0;
  double value = 0.0;  // exact t_mix or autocorrelation proxy
  bool exact = true;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  LinearFit fit;  // value against log |V|
};

struct ScalingInstance {
  SpinModel model;
  Region region;
  BoundaryCondition tau;
  BlockWeights weights;
};

// Exact t_mix per size below the cap, integrated autocorrelation time of the
// slowest tracked observable above it (clearly labeled in the row).
inline ScalingTable mixing_time_scaling(
    const std::function<ScalingInstance(std::size_t)>& instance_at,
    const std::vector<std::size_t>& sizes, std::uint64_t seed,
    std::size_t exact_state_cap = std::size_t{1} << 12,
    double mc_horizon = 20000.0, int replicas = 1) {
  ScalingTable table;
  std::vector<double> xs, ys;
  for (std::size_t size : sizes) {
    ScalingInstance inst = instance_at(size);
    ScalingRow row;
    row.volume = inst.region.size();
    row.gamma = inst.weights.gamma();
    double nstates = std::pow(static_cast<double>(inst.model.q()),
                              static_cast<double>(inst.region.size()));
    if (nstates <= static_cast<double>(exact_state_cap)) {
      GibbsTable tab(inst.model, inst.region, inst.tau);
      BlockDynamics dyn(tab, inst.weights);
      row.exact = true;
      row.value = mixing_time(dyn, 0.25, 1e-6, exact_state_cap);
    } else {
      // proxy: integrated autocorrelation time of the slowest tracked
      // observable, averaged over independent replicas
      double tau_sum = 0.0;
      for (int rep = 0; rep < replicas; ++rep) {
        SimulationConfig cfg;
        cfg.horizon = mc_horizon;
        cfg.sample_dt = 1.0;
        cfg.seed = seed;
        cfg.stream = size * 1000 + rep;
        auto series = mc_simulate(inst.model, inst.region, inst.tau,
                                  inst.weights, cfg,
                                  {observable_mean_spin(inst.region)});
        std::size_t burn = series.columns[0].size() / 5;
        std::vector<double> tail(series.columns[0].begin() + burn,
                                 series.columns[0].end());
        tau_sum += integrated_autocorrelation_time(tail) * cfg.sample_dt;
      }
      row.exact = false;
      row.value = tau_sum / replicas;
    }
    table.rows.push_back(row);
    xs.push_back(std::log(static_cast<double>(row.volume)));
    ys.push_back(row.value);
  }
  table.fit = linear_fit(xs, ys);
  return table;
}

}  // namespace entrofact
