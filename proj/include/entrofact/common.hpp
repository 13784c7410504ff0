// Shared numeric helpers, error types and hashing.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace entrofact {

// Default absolute tolerance for exact identities (DLR, telescoping,
// reversibility). Everything is computed in log-space with <= 2^24 summands,
// so 1e-10 absolute is comfortably above double rounding noise.
inline constexpr double kIdentityTol = 1e-10;

// Default cap on exact state spaces q^|V|.
inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 24;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resource cap exceeded (state space too large, sweep too big).
struct size_error : error {
  using error::error;
};

// Gibbs instance with zero partition function.
struct non_permissive_error : error {
  using error::error;
};

// Invalid input or violated precondition.
struct config_error : error {
  using error::error;
};

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (x > m) m = x;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// FNV-1a, used for config/model/domain hashes embedded in result files.
struct fnv1a {
  std::uint64_t state = 0xcbf29ce484222325ull;
  void feed(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 0x100000001b3ull;
    }
  }
  void feed_u64(std::uint64_t x) { feed(&x, sizeof(x)); }
  void feed_i64(std::int64_t x) { feed(&x, sizeof(x)); }
  void feed_f64(double x) { feed(&x, sizeof(x)); }
  void feed_str(const std::string& s) { feed(s.data(), s.size()); }
  std::uint64_t digest() const { return state; }
};

inline std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// q^n with overflow guard; throws size_error if the result exceeds cap.
inline std::size_t checked_pow_states(std::size_t q, std::size_t n,
                                      std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (out > cap / q)
      throw size_error("state space q^" + std::to_string(n) +
                       " exceeds cap " + std::to_string(cap));
    out *= q;
  }
  if (out > cap)
    throw size_error("state space " + std::to_string(out) + " exceeds cap " +
                     std::to_string(cap));
  return out;
}

}  // namespace entrofact
