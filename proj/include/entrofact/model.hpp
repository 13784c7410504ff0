// Finite-alphabet spin models: pair/site potentials with hard constraints,
// boundary conditions, Hamiltonian evaluation and the standard model zoo
// (Ising, Potts, hard-core, proper colorings).
#pragma once

#include <cstdio>
#include <deque>
#include <map>
#include <optional>

#include "entrofact/region.hpp"

namespace entrofact {

// Pair potentials may be "forbidden" (the -inf hard constraint). A dedicated
// flag keeps exp/log paths free of sentinel NaNs.
struct PairPotential {
  double value = 0.0;
  bool forbidden = false;
};

class SpinModel {
 public:
  SpinModel(int q, std::vector<PairPotential> pair, std::vector<double> site)
      : q_(q), pair_(std::move(pair)), site_(std::move(site)) {
    if (q < 2) throw config_error("alphabet size must be >= 2");
    if (pair_.size() != static_cast<std::size_t>(q) * q)
      throw config_error("pair potential must be q x q");
    if (site_.size() != static_cast<std::size_t>(q))
      throw config_error("site potential must have length q");
    bool any_allowed = false;
    for (int s = 0; s < q; ++s) {
      if (!std::isfinite(site_[s]))
        throw config_error("site potential entries must be finite");
      for (int t = 0; t < q; ++t) {
        const auto &a = pair_[s * q + t], &b = pair_[t * q + s];
        if (a.forbidden != b.forbidden ||
            (!a.forbidden && a.value != b.value))
          throw config_error("pair potential must be symmetric");
        if (!a.forbidden) {
          any_allowed = true;
          if (!std::isfinite(a.value))
            throw config_error("finite pair entries must be finite reals");
        }
      }
    }
    if (!any_allowed)
      throw config_error("degenerate model: every pair is forbidden");
  }

  int q() const { return q_; }
  const PairPotential& pair(int s, int t) const { return pair_[s * q_ + t]; }
  double site(int s) const { return site_[s]; }
  bool has_hard_constraints() const {
    for (const auto& p : pair_)
      if (p.forbidden) return true;
    return false;
  }

  std::uint64_t hash() const {
    fnv1a h;
    h.feed_i64(q_);
    for (const auto& p : pair_) {
      h.feed_f64(p.forbidden ? 0.0 : p.value);
      h.feed_u64(p.forbidden ? 1 : 0);
    }
    for (double w : site_) h.feed_f64(w);
    return h.digest();
  }

 private:
  int q_;
  std::vector<PairPotential> pair_;  // row-major q x q
  std::vector<double> site_;
};

// Spin assignment on a declared exterior shell. One instance can serve
// nested regions; vertices beyond the boundary actually touched are ignored.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;
  explicit BoundaryCondition(std::map<Point, int> assignment)
      : assignment_(std::move(assignment)) {}

  static BoundaryCondition constant(const Region& shell, int symbol) {
    std::map<Point, int> a;
    for (const auto& p : shell.points()) a[p] = symbol;
    return BoundaryCondition(std::move(a));
  }

  std::optional<int> at(const Point& p) const {
    auto it = assignment_.find(p);
    if (it == assignment_.end()) return std::nullopt;
    return it->second;
  }
  bool covers(const Region& shell) const {
    for (const auto& p : shell.points())
      if (!assignment_.count(p)) return false;
    return true;
  }
  const std::map<Point, int>& assignment() const { return assignment_; }

  std::uint64_t hash() const {
    fnv1a h;
    for (const auto& [p, s] : assignment_) {
      for (int c : p) h.feed_i64(c);
      h.feed_i64(s);
    }
    return h.digest();
  }

 private:
  std::map<Point, int> assignment_;
};

// Hamiltonian of a (model, region, boundary) instance reduced to index form:
// interior edges as vertex-index pairs and a per-vertex single-spin table
// that folds the site potential together with the frozen boundary pairs.
struct CompiledHamiltonian {
  int q = 0;
  std::size_t n = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<double> vertex_value;   // n*q, -inf-free
  std::vector<char> vertex_forbidden;  // n*q
  const SpinModel* model = nullptr;

  // log Gibbs weight = -H = sum U + sum W, or nullopt when forbidden.
  std::optional<double> log_weight(std::span<const int> config) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t idx = i * q + config[i];
      if (vertex_forbidden[idx]) return std::nullopt;
      s += vertex_value[idx];
    }
    for (auto [i, j] : edges) {
      const auto& u = model->pair(config[i], config[j]);
      if (u.forbidden) return std::nullopt;
      s += u.value;
    }
    return s;
  }
};

inline CompiledHamiltonian compile_hamiltonian(const SpinModel& model,
                                               const Region& region,
                                               const BoundaryCondition& tau) {
  CompiledHamiltonian ch;
  ch.q = model.q();
  ch.n = region.size();
  ch.model = &model;
  ch.vertex_value.assign(ch.n * ch.q, 0.0);
  ch.vertex_forbidden.assign(ch.n * ch.q, 0);
  for (std::size_t i = 0; i < ch.n; ++i) {
    const Point& p = region.point(i);
    for (int s = 0; s < ch.q; ++s)
      ch.vertex_value[i * ch.q + s] = model.site(s);
    for (const auto& nb : lattice_neighbors(p)) {
      auto j = region.index_of(nb);
      if (j != Region::npos) {
        if (j > i) ch.edges.emplace_back(i, j);
        continue;
      }
      auto sym = tau.at(nb);
      if (!sym)
        throw config_error("boundary condition does not cover a boundary site");
      if (*sym < 0 || *sym >= ch.q)
        throw config_error("boundary symbol out of alphabet range");
      for (int s = 0; s < ch.q; ++s) {
        const auto& u = model.pair(s, *sym);
        if (u.forbidden)
          ch.vertex_forbidden[i * ch.q + s] = 1;
        else
          ch.vertex_value[i * ch.q + s] += u.value;
      }
    }
  }
  return ch;
}

// H_region^tau(sigma): minus the total pair and site potential, +inf
// (nullopt) when a hard constraint is violated.
inline std::optional<double> hamiltonian(const SpinModel& model,
                                         const Region& region,
                                         const BoundaryCondition& tau,
                                         std::span<const int> config) {
  if (config.size() != region.size())
    throw config_error("configuration does not assign every region site");
  for (int s : config)
    if (s < 0 || s >= model.q())
      throw config_error("configuration symbol out of alphabet range");
  auto ch = compile_hamiltonian(model, region, tau);
  auto lw = ch.log_weight(config);
  if (!lw) return std::nullopt;  // H = +inf
  return -*lw;
}

// --- standard examples ------------------------------------------------

// Potts: U(s,s') = beta * 1{s=s'}, W(s) = beta * h_s.
inline SpinModel make_potts(int q, double beta, const std::vector<double>& h) {
  if (static_cast<int>(h.size()) != q)
    throw config_error("potts field must have length q");
  std::vector<PairPotential> pair(static_cast<std::size_t>(q) * q);
  for (int s = 0; s < q; ++s) pair[s * q + s].value = beta;
  std::vector<double> site(q);
  for (int s = 0; s < q; ++s) site[s] = beta * h[s];
  return SpinModel(q, std::move(pair), std::move(site));
}

// Ising in +-1 spin language on symbols {0 -> +1, 1 -> -1}:
// U(s,s') = beta * spin(s) * spin(s'), W(s) = beta * h * spin(s).
inline double ising_spin(int s) { return s == 0 ? 1.0 : -1.0; }

inline SpinModel make_ising(double beta, double h) {
  std::vector<PairPotential> pair(4);
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t)
      pair[s * 2 + t].value = beta * ising_spin(s) * ising_spin(t);
  return SpinModel(2, std::move(pair), {beta * h, -beta * h});
}

// Hard-core with activity lambda: symbol 1 = occupied, adjacent occupancy
// forbidden, W(s) = s * log(lambda).
inline SpinModel make_hardcore(double lambda) {
  if (lambda <= 0.0) throw config_error("hard-core activity must be positive");
  std::vector<PairPotential> pair(4);
  pair[1 * 2 + 1].forbidden = true;
  return SpinModel(2, std::move(pair), {0.0, std::log(lambda)});
}

// Uniform proper q-colorings: equal neighbor colors forbidden. Permissivity
// on Z^d is only guaranteed for q >= 2d+1; pass dim_hint to get the warning.
inline SpinModel make_colorings(int q, int dim_hint = 0) {
  if (dim_hint > 0 && q < 2 * dim_hint + 1)
    std::fprintf(stderr,
                 "warning: colorings with q=%d < 2d+1=%d may not be permissive "
                 "in dimension %d\n",
                 q, 2 * dim_hint + 1, dim_hint);
  std::vector<PairPotential> pair(static_cast<std::size_t>(q) * q);
  for (int s = 0; s < q; ++s) pair[s * q + s].forbidden = true;
  return SpinModel(q, std::move(pair), std::vector<double>(q, 0.0));
}

// --- exhaustive desk-scale checks ---------------------------------------

namespace detail {
inline bool next_config(std::vector<int>& c, int q) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (++c[i] < q) return true;
    c[i] = 0;
  }
  return false;
}
}  // namespace detail

// True iff every boundary assignment on the exterior boundary of `region`
// admits a configuration of finite energy. Exhaustive over both spaces.
inline bool check_permissive(const SpinModel& model, const Region& region,
                             std::size_t cap = std::size_t{1} << 22) {
  Region shell = boundary(region);
  // quick exit: no hard constraints means every configuration has finite H
  if (!model.has_hard_constraints()) return true;
  std::size_t nb =
      checked_pow_states(model.q(), shell.size(), cap);
  checked_pow_states(model.q(), region.size(), cap);
  std::vector<int> bsym(shell.size(), 0);
  for (std::size_t b = 0; b < nb; ++b) {
    std::map<Point, int> a;
    for (std::size_t i = 0; i < shell.size(); ++i) a[shell.point(i)] = bsym[i];
    auto ch = compile_hamiltonian(model, region, BoundaryCondition(std::move(a)));
    std::vector<int> cfg(region.size(), 0);
    bool found = false;
    do {
      if (ch.log_weight(cfg)) {
        found = true;
        break;
      }
    } while (detail::next_config(cfg, model.q()));
    if (!found) return false;
    detail::next_config(bsym, model.q());
  }
  return true;
}

// Exhaustive irreducibility of the single-site heat-bath chain on the
// positive-mass configurations of (region, tau).
inline bool check_irreducible(const SpinModel& model, const Region& region,
                              const BoundaryCondition& tau,
                              std::size_t cap = std::size_t{1} << 22) {
  std::size_t nstates = checked_pow_states(model.q(), region.size(), cap);
  auto ch = compile_hamiltonian(model, region, tau);
  std::vector<char> alive(nstates, 0);
  std::vector<int> cfg(region.size(), 0);
  std::size_t first_alive = nstates;
  for (std::size_t s = 0; s < nstates; ++s) {
    if (ch.log_weight(cfg)) {
      alive[s] = 1;
      if (first_alive == nstates) first_alive = s;
    }
    detail::next_config(cfg, model.q());
  }
  if (first_alive == nstates)
    throw non_permissive_error("no configuration has positive mass");

  // strides for single-site moves in the mixed-radix index
  std::vector<std::size_t> stride(region.size(), 1);
  for (std::size_t i = 1; i < region.size(); ++i)
    stride[i] = stride[i - 1] * model.q();
  std::vector<char> seen(nstates, 0);
  std::deque<std::size_t> queue{first_alive};
  seen[first_alive] = 1;
  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i < region.size(); ++i) {
      int cur = static_cast<int>((s / stride[i]) % model.q());
      for (int v = 0; v < model.q(); ++v) {
        if (v == cur) continue;
        std::size_t t = s + (v - cur) * static_cast<long long>(stride[i]);
        if (alive[t] && !seen[t]) {
          seen[t] = 1;
          queue.push_back(t);
        }
      }
    }
  }
  for (std::size_t s = 0; s < nstates; ++s)
    if (alive[s] && !seen[s]) return false;
  return true;
}

}  // namespace entrofact
