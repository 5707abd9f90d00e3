#pragma once

#include <span>
#include <vector>

namespace dataagent::stats {

double sum(std::span<const double> xs);
double mean(std::span<const double> xs);
/// Sample variance (n - 1 denominator); requires xs.size() >= 2.
double sample_variance(std::span<const double> xs);
/// Linear-interpolation quantile over an ascending-sorted sample, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);
double median(std::vector<double> xs);

struct Bivariate {
  double mean_x = 0, mean_y = 0;
  double sxx = 0, syy = 0, sxy = 0;  // centered sums of squares and cross-products
  std::size_t n = 0;
};
Bivariate centered_moments(std::span<const double> xs, std::span<const double> ys);

}  // namespace dataagent::stats
