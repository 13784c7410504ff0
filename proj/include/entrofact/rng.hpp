// Counter-based pseudo-random generator with cheap independent streams:
// output i of stream s is mix(key(seed, s) + i * golden). Reproducible and
// coordination-free across replicas and threads.
#pragma once

#include <cstdint>

#include "entrofact/common.hpp"

namespace entrofact {

class CounterRng {
 public:
  using result_type = std::uint64_t;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  CounterRng() : CounterRng(0, 0) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed) ^ (0x6a09e667f3bcc909ull + stream))) {}

  std::uint64_t operator()() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  double uniform() {  // [0, 1)
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }
  double exponential() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -std::log(u);
  }
  double normal() {
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
  std::uint64_t below(std::uint64_t n) {  // [0, n), n > 0
    return (*this)() % n;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Walker alias table for O(1) categorical draws; rebuilt when weights change.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights) {
    std::size_t n = weights.size();
    if (n == 0) throw config_error("alias table needs at least one weight");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw config_error("alias weights must be >= 0");
      total += w;
    }
    if (total <= 0.0) throw config_error("alias weights must not all vanish");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * n / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      std::size_t s = small.back(), l = large.back();
      small.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0;
    for (std::size_t i : small) prob_[i] = 1.0;
  }

  std::size_t draw(CounterRng& rng) const {
    std::size_t i = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace entrofact
