#include "dataagent/stats.hpp"

#include <algorithm>
#include <cmath>

namespace dataagent::stats {

// Neumaier-compensated summation.
double sum(std::span<const double> xs) {
  double s = 0.0;
  double c = 0.0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

double mean(std::span<const double> xs) { return sum(xs) / static_cast<double>(xs.size()); }

double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, 0.5);
}

Bivariate centered_moments(std::span<const double> xs, std::span<const double> ys) {
  Bivariate b;
  b.n = xs.size();
  b.mean_x = mean(xs);
  b.mean_y = mean(ys);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - b.mean_x;
    const double dy = ys[i] - b.mean_y;
    b.sxx += dx * dx;
    b.syy += dy * dy;
    b.sxy += dx * dy;
  }
  return b;
}

}  // namespace dataagent::stats
