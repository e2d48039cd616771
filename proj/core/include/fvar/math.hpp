#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fvar {

inline double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.398942280401432677939946;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

// Inverse standard normal CDF. The raw rational approximation (Acklam) is
// accurate to ~1.2e-9 relative; normal_quantile adds one Halley step through
// erfc and is good to a few ulp. Samplers use the raw version: the residual
// error is orders of magnitude below Monte Carlo noise and it avoids an exp
// and an erfc per draw.
double normal_quantile_fast(double p);
double normal_quantile(double p);

// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
  explicit GaussLegendre(std::size_t n);
};

// Composite Gauss-Legendre integral of f over [a, b] split into `panels`.
template <class F>
double integrate(F&& f, double a, double b, const GaussLegendre& rule, std::size_t panels = 1) {
  double total = 0.0;
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double mid = lo + 0.5 * h;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i)
      acc += rule.w[i] * f(mid + 0.5 * h * rule.x[i]);
    total += 0.5 * h * acc;
  }
  return total;
}

}  // namespace fvar
