#pragma once

// Shared oracles and small utilities for the test suites. Everything here is
// computed independently of the library's own code paths wherever the point
// of a test is to cross-check a library result: prices come from density
// quadrature, Johnson moments from the exponential-moment expansion, normal
// tail values from high-precision constants.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "fvar/models.hpp"
#include "fvar/simulation.hpp"

namespace testutil {

// z_{0.01} and z_{0.975} to full double precision (independent anchors for
// the normal inverse CDF).
inline constexpr double kZ01 = -2.3263478740408408;
inline constexpr double kZ975 = 1.9599639845400545;

// Absolute-tolerance comparison; doctest's Approx is relative-only.
inline bool near(double a, double b, double margin) { return std::abs(a - b) <= margin; }

struct Stats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
  double se = 0.0;  // standard error of the mean
};

inline Stats stats(const std::vector<double>& xs) {
  Stats s;
  const double n = static_cast<double>(xs.size());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.se = s.sd / std::sqrt(n);
  return s;
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Call price by direct quadrature of the discounted payoff against the
// lognormal terminal density, using the trapezoid rule in log-space. Slow and
// dumb on purpose: no shared code with the closed form under test.
inline double call_price_by_quadrature(double spot, double strike, double rate_dom,
                                       double rate_fgn, double sigma, double tau,
                                       std::size_t n = 200000) {
  if (tau <= 0.0) return std::max(spot - strike, 0.0);
  const double m = std::log(spot) + (rate_dom - rate_fgn - 0.5 * sigma * sigma) * tau;
  const double s = sigma * std::sqrt(tau);
  const double lo = m - 10.0 * s;
  const double hi = m + 10.0 * s;
  const double h = (hi - lo) / static_cast<double>(n);
  const double inv = 1.0 / (s * std::sqrt(2.0 * M_PI));
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double y = lo + h * static_cast<double>(i);
    const double payoff = std::max(std::exp(y) - strike, 0.0);
    const double dens = inv * std::exp(-0.5 * (y - m) * (y - m) / (s * s));
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * payoff * dens;
  }
  return std::exp(-rate_dom * tau) * acc * h;
}

// Exact raw moments of a Johnson SU variate X = xi + lambda * sinh((Z - g)/d)
// via sinh^k expanded into exponentials and E[exp(aZ + b)] = exp(b + a^2/2).
// Returns E[X^k] for k = 1..4 (and 5 when asked).
inline std::vector<double> su_raw_moments(double g, double d, double xi, double lambda,
                                          int kmax = 4) {
  // E[sinh((Z - g)/d)^k] = 2^-k sum_j C(k,j) (-1)^(k-j) E[e^{(2j-k)(Z-g)/d}]
  auto sinh_moment = [&](int k) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      const double a = static_cast<double>(2 * j - k) / d;
      const double sign = ((k - j) % 2) ? -1.0 : 1.0;
      acc += binom * sign * std::exp(-a * g + 0.5 * a * a);
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
    return acc / std::pow(2.0, k);
  };
  std::vector<double> sm(static_cast<std::size_t>(kmax) + 1, 1.0);
  for (int k = 1; k <= kmax; ++k) sm[static_cast<std::size_t>(k)] = sinh_moment(k);
  std::vector<double> raw(static_cast<std::size_t>(kmax));
  for (int k = 1; k <= kmax; ++k) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      acc += binom * std::pow(xi, k - j) * std::pow(lambda, j) * sm[static_cast<std::size_t>(j)];
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
    raw[static_cast<std::size_t>(k - 1)] = acc;
  }
  return raw;
}

// Quantile maps written out directly from the defining transforms.
inline double su_quantile_exact(double g, double d, double xi, double lambda, double z) {
  return xi + lambda * std::sinh((z - g) / d);
}
inline double sb_quantile_exact(double g, double d, double xi, double lambda, double z) {
  return xi + lambda / (1.0 + std::exp(-(z - g) / d));
}

// High-accuracy normal inverse CDF independent of the library: bisection on
// erfc, upper tail by symmetry (cdf saturates near 1 and would cost ~1e-11
// there). Good to ~1e-14 absolute over (1e-12, 1 - 1e-12).
inline double normal_quantile_oracle(double p) {
  if (p > 0.5) return -normal_quantile_oracle(1.0 - p);
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Hand-built OuterPathSet over two grid points {0, delta}: value moves by
// dv[i], state x[i] at both points, deflators 1, no cashflows. delta_v on it
// returns exactly (x, dv), which lets estimator tests control the joint
// distribution without a market model.
inline fvar::OuterPathSet synthetic_outer(std::vector<double> x, std::vector<double> dv,
                                          double delta = 0.05) {
  fvar::OuterPathSet outer;
  outer.model = fvar::GbmParams{1.0, 0.0, 0.0, 0.0};
  outer.inst = fvar::EuropeanCall{1.0, delta};
  outer.seed = 0;
  outer.times = {0.0, delta};
  outer.n_paths = x.size();
  outer.states.resize(2 * x.size());
  outer.values.resize(2 * x.size());
  outer.deflators.assign(2 * x.size(), 1.0);
  outer.cashflow_events.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    outer.states[2 * i] = x[i];
    outer.states[2 * i + 1] = x[i];
    outer.values[2 * i] = 0.0;
    outer.values[2 * i + 1] = dv[i];
  }
  return outer;
}

// Deterministic mt19937-based draws for synthetic data (tests only; the
// library's own RNG is exercised separately).
class Gen {
 public:
  explicit Gen(std::uint32_t seed) : eng_(seed) {}
  double normal() { return normal_(eng_); }
  double normal(double mu, double sd) { return mu + sd * normal_(eng_); }
  double uniform() { return uniform_(eng_); }
  double uniform(double a, double b) { return a + (b - a) * uniform_(eng_); }

 private:
  std::mt19937 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace testutil
