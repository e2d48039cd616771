#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fvar/johnson.hpp"
#include "fvar/math.hpp"
#include "helpers.hpp"

using namespace fvar;

namespace {

// Exact raw moments of exp(Z/d + m) with Z standard normal (SL with gamma
// folded into m): E X^k = exp(k m + k^2 / (2 d^2)).
double sl_raw_moment(double m, double d, int k) { return std::exp(k * m + k * k / (2 * d * d)); }

}  // namespace

TEST_SUITE("johnson") {

TEST_CASE("central_from_raw reproduces exponential moments") {
  // Exp(1): r_k = k!, cm2 = 1, cm3 = 2, cm4 = 9, beta1 = 4, beta2 = 9.
  auto m = central_from_raw(1.0, 2.0, 6.0, 24.0);
  CHECK(m.cm2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.cm3 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.cm4 == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(m.beta1 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(m.beta2 == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(m.skew_sign == 1);
}

TEST_CASE("central moments are translation invariant") {
  // Shift Exp(1) by c: raw moments change, central moments do not.
  const double c = 3.7;
  const double r1 = 1.0 + c;
  const double r2 = 2.0 + 2 * c + c * c;
  const double r3 = 6.0 + 3 * c * 2.0 + 3 * c * c + c * c * c;
  const double r4 = 24.0 + 4 * c * 6.0 + 6 * c * c * 2.0 + 4 * c * c * c + c * c * c * c;
  auto m = central_from_raw(r1, r2, r3, r4);
  CHECK(m.cm2 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(m.cm3 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(m.cm4 == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("central_from_raw rejects degenerate variance") {
  CHECK_THROWS_AS((void)central_from_raw(1.0, 1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("fifth cumulant input for a normal is zero") {
  // N(mu, sd): r5 etc. via standard formulas; fifth standardized central
  // moment of a symmetric law is 0.
  const double mu = 0.4, sd = 1.7;
  const double s2 = sd * sd;
  const double r1 = mu;
  const double r2 = mu * mu + s2;
  const double r3 = mu * mu * mu + 3 * mu * s2;
  const double r4 = std::pow(mu, 4) + 6 * mu * mu * s2 + 3 * s2 * s2;
  const double r5 = std::pow(mu, 5) + 10 * std::pow(mu, 3) * s2 + 15 * mu * s2 * s2;
  CHECK(testutil::near(fifth_central_from_raw(r1, r2, r3, r4, r5), 0.0, 1e-9));
}

TEST_CASE("beta feasibility boundary") {
  CHECK(validate_beta(0.0, 3.0) == BetaValidity::Valid);
  CHECK(validate_beta(4.0, 9.0) == BetaValidity::Valid);
  CHECK(validate_beta(0.0, 1.0) == BetaValidity::Valid);   // Bernoulli(1/2)
  CHECK(validate_beta(1.0, 1.5) == BetaValidity::Invalid);
  CHECK(validate_beta(2.0, 2.0) == BetaValidity::Invalid);
}

TEST_CASE("project_beta lands on the boundary and fixes infeasible pairs") {
  auto [b1, b2] = project_beta(1.0, 1.5);
  CHECK(b2 == doctest::Approx(b1 + 1.0).epsilon(1e-12));
  CHECK(validate_beta(b1, b2) == BetaValidity::Valid);
  // Projection is orthogonal onto beta2 = beta1 + 1: midpoint algebra.
  CHECK(b1 == doctest::Approx((1.0 + 0.5) / 2).epsilon(1e-12));

  // Far-left infeasible pair clamps at beta1 = 0.
  auto [c1, c2] = project_beta(0.2, -5.0);
  CHECK(testutil::near(c1, 0.0, 1e-15));
  CHECK(c2 == doctest::Approx(1.0).epsilon(1e-12));

  // Valid pairs are returned unchanged.
  auto [d1, d2] = project_beta(4.0, 9.0);
  CHECK(d1 == doctest::Approx(4.0));
  CHECK(d2 == doctest::Approx(9.0));
}

TEST_CASE("lognormal line matches the omega polynomial") {
  // omega = exp(1/d^2); beta1 = (omega-1)(omega+2)^2, beta2 = omega^4 +
  // 2 omega^3 + 3 omega^2 - 3. Spot-check a few omegas.
  for (double omega : {1.01, 1.2, 2.0}) {
    const double b1 = (omega - 1) * (omega + 2) * (omega + 2);
    const double b2 = std::pow(omega, 4) + 2 * std::pow(omega, 3) + 3 * omega * omega - 3;
    CHECK(lognormal_line(b1) == doctest::Approx(b2).epsilon(1e-8));
  }
  CHECK(lognormal_line(0.0) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("fit_moments recovers an SU law from its analytic moments") {
  JohnsonParams truth;
  truth.family = JohnsonFamily::SU;
  truth.gamma = -1.2;
  truth.delta = 2.5;
  truth.xi = 0.3;
  truth.lambda = 1.8;

  auto raw = testutil::su_raw_moments(truth.gamma, truth.delta, truth.xi, truth.lambda, 4);
  auto m = central_from_raw(raw[0], raw[1], raw[2], raw[3]);
  auto fit = fit_moments(m);
  REQUIRE(fit.family == JohnsonFamily::SU);
  for (double a : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
    const double want = testutil::su_quantile_exact(truth.gamma, truth.delta, truth.xi,
                                                    truth.lambda, normal_quantile(a));
    CHECK(testutil::near(johnson_quantile(fit, a), want, 1e-4));
  }
}

TEST_CASE("fit_moments recovers an SL law") {
  // SL: X = exp((Z - gamma)/delta) + xi. Raw moments from the lognormal mgf.
  const double gamma = -0.5, delta = 1.6, xi = 2.0;
  const double m_log = -gamma / delta;  // X - xi = exp(Z/delta + m_log)
  double r[5];
  for (int k = 1; k <= 4; ++k) {
    // Binomial expansion of (Y + xi)^k with Y lognormal.
    double acc = 0.0, choose = 1.0;
    for (int j = 0; j <= k; ++j) {
      const double y_mom = j == 0 ? 1.0 : sl_raw_moment(m_log, delta, j);
      acc += choose * y_mom * std::pow(xi, k - j);
      choose = choose * (k - j) / (j + 1.0);
    }
    r[k] = acc;
  }
  auto fit = fit_moments(central_from_raw(r[1], r[2], r[3], r[4]));
  REQUIRE(fit.family == JohnsonFamily::SL);
  for (double a : {0.01, 0.5, 0.99}) {
    const double want = xi + std::exp((normal_quantile(a) - gamma) / delta);
    CHECK(johnson_quantile(fit, a) == doctest::Approx(want).epsilon(2e-4));
  }
}

TEST_CASE("fit_moments near-normal short circuit") {
  MomentSet m = central_from_raw(0.5, 0.5 * 0.5 + 4.0, 0.5 * 0.5 * 0.5 + 3 * 0.5 * 4.0,
                                 std::pow(0.5, 4) + 6 * 0.25 * 4.0 + 3 * 16.0);
  auto fit = fit_moments(m);
  CHECK(fit.family == JohnsonFamily::SN);
  CHECK(fit.xi == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.lambda == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(johnson_quantile(fit, 0.01) ==
        doctest::Approx(0.5 + 2.0 * testutil::kZ01).epsilon(1e-9));
}

TEST_CASE("fit_moments SB branch reproduces sample moments") {
  // A bounded target: scaled Beta-like shape via an SB law's own moments.
  JohnsonParams truth;
  truth.family = JohnsonFamily::SB;
  truth.gamma = 0.7;
  truth.delta = 1.3;
  truth.xi = -1.0;
  truth.lambda = 4.0;
  auto dm = johnson_moments(truth);
  // Convert DistMoments back to raw moments for central_from_raw.
  const double mu = dm.mean, s2 = dm.variance;
  const double cm3 = dm.skew * std::pow(s2, 1.5);
  const double cm4 = dm.kurtosis * s2 * s2;
  const double r2 = s2 + mu * mu;
  const double r3 = cm3 + 3 * mu * r2 - 2 * mu * mu * mu;
  const double r4 = cm4 + 4 * mu * r3 - 6 * mu * mu * r2 + 3 * std::pow(mu, 4);
  auto fit = fit_moments(central_from_raw(mu, r2, r3, r4));
  REQUIRE(fit.family == JohnsonFamily::SB);
  auto dm2 = johnson_moments(fit);
  CHECK(dm2.mean == doctest::Approx(dm.mean).epsilon(1e-6));
  CHECK(dm2.variance == doctest::Approx(dm.variance).epsilon(1e-5));
  CHECK(testutil::near(dm2.skew, dm.skew, 1e-6 + 1e-4 * std::abs(dm.skew)));
  CHECK(dm2.kurtosis == doctest::Approx(dm.kurtosis).epsilon(1e-4));
}

TEST_CASE("moment_set_from_sample agrees with direct sums") {
  std::vector<double> xs = {1.0, 2.0, 4.0, 8.0, 16.0};
  auto m = moment_set_from_sample(xs);
  double r1 = 0, r2 = 0, r3 = 0, r4 = 0;
  for (double x : xs) {
    r1 += x;
    r2 += x * x;
    r3 += x * x * x;
    r4 += x * x * x * x;
  }
  const double n = double(xs.size());
  auto want = central_from_raw(r1 / n, r2 / n, r3 / n, r4 / n);
  CHECK(m.cm2 == doctest::Approx(want.cm2).epsilon(1e-12));
  CHECK(m.beta2 == doctest::Approx(want.beta2).epsilon(1e-12));
}

TEST_CASE("percentile fit on exact normal quantiles degenerates to SN") {
  const double z = 0.524;
  const double mu = 1.3, sd = 0.8;
  auto q = [&](double zz) { return mu + sd * zz; };
  auto fit = fit_percentiles(q(-3 * z), q(-z), q(z), q(3 * z), z);
  CHECK(fit.family == JohnsonFamily::SN);
  CHECK(fit.xi == doctest::Approx(mu).epsilon(1e-9));
  CHECK(fit.lambda == doctest::Approx(sd).epsilon(1e-9));
  for (double a : {0.01, 0.2, 0.8, 0.99})
    CHECK(testutil::near(johnson_quantile(fit, a), mu + sd * normal_quantile(a), 1e-6));
}

TEST_CASE("percentile fit recovers an SU law from its exact quantiles") {
  JohnsonParams truth{JohnsonFamily::SU, -0.8, 1.9, 0.2, 1.1};
  const double z = 0.7;
  auto q = [&](double zz) {
    return testutil::su_quantile_exact(truth.gamma, truth.delta, truth.xi, truth.lambda, zz);
  };
  auto fit = fit_percentiles(q(-3 * z), q(-z), q(z), q(3 * z), z);
  REQUIRE(fit.family == JohnsonFamily::SU);
  CHECK(fit.gamma == doctest::Approx(truth.gamma).epsilon(1e-7));
  CHECK(fit.delta == doctest::Approx(truth.delta).epsilon(1e-7));
  CHECK(testutil::near(fit.xi, truth.xi, 1e-7));
  CHECK(fit.lambda == doctest::Approx(truth.lambda).epsilon(1e-7));
}

TEST_CASE("percentile fit recovers an SB law from its exact quantiles") {
  JohnsonParams truth{JohnsonFamily::SB, 0.4, 1.2, -0.5, 3.0};
  const double z = 0.524;
  auto q = [&](double zz) {
    return testutil::sb_quantile_exact(truth.gamma, truth.delta, truth.xi, truth.lambda, zz);
  };
  auto fit = fit_percentiles(q(-3 * z), q(-z), q(z), q(3 * z), z);
  REQUIRE(fit.family == JohnsonFamily::SB);
  for (double a : {0.01, 0.3, 0.7, 0.99}) {
    const double want =
        testutil::sb_quantile_exact(truth.gamma, truth.delta, truth.xi, truth.lambda,
                                    normal_quantile(a));
    CHECK(johnson_quantile(fit, a) == doctest::Approx(want).epsilon(1e-7));
  }
}

TEST_CASE("percentile fit rejects non-increasing quantile inputs") {
  CHECK_THROWS_AS((void)fit_percentiles(0.0, 0.0, 1.0, 2.0, 0.524), std::domain_error);
  CHECK_THROWS_AS((void)fit_percentiles(0.0, 1.0, 1.0, 2.0, 0.524), std::domain_error);
  CHECK_THROWS_AS((void)fit_percentiles(2.0, 1.0, 0.5, 0.0, 0.524), std::domain_error);
}

TEST_CASE("cdf and quantile are inverses across families") {
  std::vector<JohnsonParams> laws = {
      {JohnsonFamily::SN, 0.0, 1.0, 0.5, 2.0},
      {JohnsonFamily::SL, -0.3, 1.4, 0.0, 1.0},
      {JohnsonFamily::SU, -1.2, 2.5, 0.3, 1.8},
      {JohnsonFamily::SB, 0.7, 1.3, -1.0, 4.0},
  };
  for (const auto& p : laws) {
    for (double a : {0.01, 0.1, 0.5, 0.9, 0.99}) {
      const double x = johnson_quantile(p, a);
      CHECK(johnson_cdf(p, x) == doctest::Approx(a).epsilon(1e-9));
    }
  }
}

TEST_CASE("pdf integrates to the cdf increment") {
  JohnsonParams p{JohnsonFamily::SU, -0.5, 1.5, 0.0, 1.0};
  const double a = johnson_quantile(p, 0.2), b = johnson_quantile(p, 0.8);
  // Simpson over [a, b].
  const int n = 2000;
  const double h = (b - a) / n;
  double acc = johnson_pdf(p, a) + johnson_pdf(p, b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * johnson_pdf(p, a + i * h);
  acc *= h / 3.0;
  CHECK(acc == doctest::Approx(0.6).epsilon(1e-8));
}

TEST_CASE("johnson_moments matches monte carlo for SU and SB") {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> nd;
  for (const auto& p : {JohnsonParams{JohnsonFamily::SU, -1.0, 2.0, 0.5, 1.5},
                        JohnsonParams{JohnsonFamily::SB, 0.3, 1.1, -2.0, 5.0}}) {
    auto dm = johnson_moments(p);
    const size_t n = 400000;
    std::vector<double> xs(n);
    for (auto& x : xs) {
      const double z = nd(gen);
      const double u = (z - p.gamma) / p.delta;
      const double g = p.family == JohnsonFamily::SU ? std::sinh(u) : 1.0 / (1.0 + std::exp(-u));
      x = p.xi + p.lambda * g;
    }
    auto st = testutil::stats(xs);
    CHECK(testutil::near(dm.mean, st.mean, 4 * st.se));
    CHECK(dm.variance == doctest::Approx(st.sd * st.sd).epsilon(0.02));
  }
}

TEST_CASE("cornish_fisher_quantile identities") {
  for (double a : {0.001, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999})
    CHECK(testutil::near(cornish_fisher_quantile(a, 0.0, 0.0, 0.0), normal_quantile(a), 1e-12));

  // Positive skew shifts the lower 1% point to the right (less extreme).
  CHECK(cornish_fisher_quantile(0.01, 0.5, 0.0, 0.0) > normal_quantile(0.01));
  // Excess kurtosis makes the 1% point more extreme.
  CHECK(cornish_fisher_quantile(0.01, 0.0, 1.0, 0.0) < normal_quantile(0.01));
}

}  // TEST_SUITE
