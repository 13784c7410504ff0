// Small statistics utilities: least-squares line fits, integrated
// autocorrelation time, batch means and the chi-square tail probability.
#pragma once

#include "entrofact/common.hpp"

namespace entrofact {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

inline LinearFit linear_fit(std::span<const double> x,
                            std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw config_error("linear_fit needs >= 2 matched points");
  std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-30) throw config_error("linear_fit: degenerate x");
  LinearFit fit;
  fit.points = n;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

// Integrated autocorrelation time with the self-consistent window
// W = min{w : w >= c * tau(w)}; returned in units of the sample spacing.
inline double integrated_autocorrelation_time(std::span<const double> series,
                                              double window_factor = 6.0) {
  std::size_t n = series.size();
  if (n < 8) throw config_error("autocorrelation needs >= 8 samples");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - mean;
  double var = 0.0;
  for (double v : centered) var += v * v;
  var /= static_cast<double>(n);
  if (var <= 0.0) return 1.0;
  double tau = 1.0;
  for (std::size_t w = 1; w < n / 2; ++w) {
    double g = 0.0;
    for (std::size_t i = 0; i + w < n; ++i) g += centered[i] * centered[i + w];
    g /= static_cast<double>(n - w);
    tau += 2.0 * g / var;
    if (static_cast<double>(w) >= window_factor * tau) break;
  }
  return std::max(tau, 1.0);
}

// Mean and Monte Carlo standard error by batch means; the batch length
// should exceed the autocorrelation time.
struct BatchMeans {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t batches = 0;
};

inline BatchMeans batch_means(std::span<const double> series,
                              std::size_t batch_len) {
  if (batch_len == 0 || series.size() < 2 * batch_len)
    throw config_error("batch_means needs >= 2 full batches");
  std::size_t nb = series.size() / batch_len;
  std::vector<double> avg(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < batch_len; ++i)
      avg[b] += series[b * batch_len + i];
    avg[b] /= static_cast<double>(batch_len);
  }
  BatchMeans out;
  out.batches = nb;
  for (double a : avg) out.mean += a;
  out.mean /= static_cast<double>(nb);
  double ss = 0.0;
  for (double a : avg) ss += (a - out.mean) * (a - out.mean);
  out.std_error = std::sqrt(ss / (nb * (nb - 1.0)));
  return out;
}

// Regularized lower incomplete gamma P(a, x); series for x < a+1 and
// continued fraction otherwise.
inline double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw config_error("gamma_p domain error");
  if (x == 0.0) return 0.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// Upper tail of chi-square with k degrees of freedom at the statistic value.
inline double chi_square_p_value(double statistic, double dof) {
  if (dof <= 0.0) throw config_error("chi-square needs dof > 0");
  if (statistic <= 0.0) return 1.0;
  return 1.0 - regularized_gamma_p(dof / 2.0, statistic / 2.0);
}

}  // namespace entrofact
