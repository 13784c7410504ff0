// Nonnegative block weights alpha over sub-regions of V and the covering
// depth gamma(alpha) = min_x sum_{A owning x} alpha_A.
#pragma once

#include "entrofact/region.hpp"

namespace entrofact {

struct WeightedBlock {
  Region block;
  double alpha = 0.0;
};

class BlockWeights {
 public:
  BlockWeights() = default;
  BlockWeights(Region domain, std::vector<WeightedBlock> blocks)
      : domain_(std::move(domain)), blocks_(std::move(blocks)) {
    for (const auto& wb : blocks_) {
      if (wb.alpha < 0.0) throw config_error("block weight must be >= 0");
      if (!is_subset(wb.block, domain_))
        throw config_error("weighted block is not a subset of the domain");
    }
    std::sort(blocks_.begin(), blocks_.end(),
              [](const WeightedBlock& a, const WeightedBlock& b) {
                return a.block < b.block;
              });
  }

  const Region& domain() const { return domain_; }
  const std::vector<WeightedBlock>& blocks() const { return blocks_; }
  double total_rate() const {
    double s = 0.0;
    for (const auto& wb : blocks_) s += wb.alpha;
    return s;
  }

  // gamma(alpha), plus the vertices attaining the minimum (handy when
  // debugging covers).
  double gamma(std::vector<Point>* argmin = nullptr) const {
    if (domain_.empty()) throw config_error("gamma needs a nonempty domain");
    double best = std::numeric_limits<double>::infinity();
    std::vector<Point> best_pts;
    for (const auto& x : domain_.points()) {
      double cover = 0.0;
      for (const auto& wb : blocks_)
        if (wb.block.contains(x)) cover += wb.alpha;
      if (cover < best - 1e-15) {
        best = cover;
        best_pts.assign(1, x);
      } else if (std::abs(cover - best) <= 1e-15) {
        best_pts.push_back(x);
      }
    }
    if (argmin) *argmin = std::move(best_pts);
    return best;
  }

  BlockWeights scaled(double c) const {
    if (c < 0.0) throw config_error("weight scale must be >= 0");
    auto blocks = blocks_;
    for (auto& wb : blocks) wb.alpha *= c;
    return BlockWeights(domain_, std::move(blocks));
  }

  std::uint64_t hash() const {
    fnv1a h;
    h.feed_u64(region_hash(domain_));
    for (const auto& wb : blocks_) {
      h.feed_u64(region_hash(wb.block));
      h.feed_f64(wb.alpha);
    }
    return h.digest();
  }

 private:
  Region domain_;
  std::vector<WeightedBlock> blocks_;
};

inline double gamma(const BlockWeights& w) { return w.gamma(); }

// --- presets -------------------------------------------------------------

inline BlockWeights singleton_weights(const Region& v, double alpha = 1.0) {
  std::vector<WeightedBlock> blocks;
  for (const auto& p : v.points())
    blocks.push_back({Region(v.dim(), {p}), alpha});
  return BlockWeights(v, std::move(blocks));
}

inline BlockWeights even_odd_weights(const Region& v, double alpha = 1.0) {
  auto [e, o] = even_odd_split(v);
  std::vector<WeightedBlock> blocks;
  if (!e.empty()) blocks.push_back({e, alpha});
  if (!o.empty()) blocks.push_back({o, alpha});
  return BlockWeights(v, std::move(blocks));
}

inline BlockWeights full_block_weights(const Region& v, double alpha = 1.0) {
  return BlockWeights(v, {{v, alpha}});
}

// Every nonempty subset of at most m sites, weight alpha each. Desk scale
// only: the count grows like n^m.
inline BlockWeights all_blocks_up_to(const Region& v, std::size_t m,
                                     double alpha = 1.0) {
  if (v.empty()) throw config_error("weights need a nonempty domain");
  std::vector<WeightedBlock> blocks;
  const auto& pts = v.points();
  std::size_t n = pts.size();
  if (n > 24) throw size_error("all_blocks_up_to limited to 24 sites");
  std::vector<std::size_t> idx;
  std::vector<Point> buf;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (!idx.empty()) {
      buf.clear();
      for (auto i : idx) buf.push_back(pts[i]);
      blocks.push_back({Region(v.dim(), buf), alpha});
    }
    if (idx.size() == m) return;
    for (std::size_t i = start; i < n; ++i) {
      idx.push_back(i);
      self(self, i + 1);
      idx.pop_back();
    }
  };
  rec(rec, 0);
  return BlockWeights(v, std::move(blocks));
}

}  // namespace entrofact
