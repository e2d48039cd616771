#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fvar/math.hpp"
#include "fvar/regression.hpp"
#include "helpers.hpp"

using namespace fvar;

namespace {

std::vector<double> linspace(double a, double b, size_t n) {
  std::vector<double> xs(n);
  for (size_t i = 0; i < n; ++i) xs[i] = a + (b - a) * double(i) / double(n - 1);
  return xs;
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("basis_row monomial and laguerre values") {
  BasisSpec mono{BasisKind::Monomial, 3, FeatureKind::X, 0.0, 1.0};
  double row[4];
  basis_row(mono, 2.0, row);
  CHECK(row[0] == doctest::Approx(1.0));
  CHECK(row[1] == doctest::Approx(2.0));
  CHECK(row[2] == doctest::Approx(4.0));
  CHECK(row[3] == doctest::Approx(8.0));

  // Laguerre recurrence: L0=1, L1=1-x, L2=(x^2-4x+2)/2, L3=(-x^3+9x^2-18x+6)/6.
  BasisSpec lag{BasisKind::Laguerre, 3, FeatureKind::X, 0.0, 1.0};
  const double x = 0.7;
  basis_row(lag, x, row);
  CHECK(row[0] == doctest::Approx(1.0));
  CHECK(row[1] == doctest::Approx(1.0 - x));
  CHECK(row[2] == doctest::Approx((x * x - 4 * x + 2) / 2).epsilon(1e-12));
  CHECK(row[3] == doctest::Approx((-x * x * x + 9 * x * x - 18 * x + 6) / 6).epsilon(1e-12));
}

TEST_CASE("basis shift and scale standardize the feature") {
  BasisSpec mono{BasisKind::Monomial, 2, FeatureKind::X, 10.0, 4.0};
  double row[3];
  basis_row(mono, 18.0, row);  // standardized u = (18-10)/4 = 2
  CHECK(row[1] == doctest::Approx(2.0));
  CHECK(row[2] == doctest::Approx(4.0));

  std::vector<double> xs = {1.0, 2.0, 3.0, 4.0, 5.0};
  auto spec = standardized(BasisSpec{BasisKind::Monomial, 2, FeatureKind::X, 0, 1}, xs);
  CHECK(spec.shift == doctest::Approx(3.0));
  CHECK(spec.scale == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
}

TEST_CASE("least squares recovers polynomial coefficients exactly") {
  auto xs = linspace(-2.0, 2.0, 200);
  std::vector<double> ys(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) ys[i] = 1.5 - 2.0 * xs[i] + 0.25 * xs[i] * xs[i];
  auto model = fit_least_squares(xs, ys, BasisSpec{BasisKind::Monomial, 2, FeatureKind::X, 0, 1});
  for (size_t i = 0; i < xs.size(); ++i)
    CHECK(predict(model, xs[i]) == doctest::Approx(ys[i]).epsilon(1e-10));
  CHECK(testutil::near(model.residual_rms, 0.0, 1e-9));
}

TEST_CASE("least squares minimizes squared error under noise") {
  // y = 2 + 3x + noise: compare against the analytic normal-equation solution
  // computed independently for the affine case.
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd(0.0, 0.5);
  auto xs = linspace(0.0, 1.0, 500);
  std::vector<double> ys(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) ys[i] = 2.0 + 3.0 * xs[i] + nd(gen);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;

  auto model = fit_least_squares(xs, ys, BasisSpec{BasisKind::Monomial, 1, FeatureKind::X, 0, 1});
  CHECK(predict(model, 0.0) == doctest::Approx(icept).epsilon(1e-9));
  CHECK(predict(model, 1.0) == doctest::Approx(icept + slope).epsilon(1e-9));
}

TEST_CASE("laguerre and monomial bases fit the same polynomial space") {
  auto xs = linspace(0.1, 3.0, 300);
  std::vector<double> ys(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) ys[i] = std::exp(-xs[i]) * std::sin(3 * xs[i]);
  auto m1 = fit_least_squares(xs, ys, standardized({BasisKind::Monomial, 6, FeatureKind::X, 0, 1}, xs));
  auto m2 = fit_least_squares(xs, ys, standardized({BasisKind::Laguerre, 6, FeatureKind::X, 0, 1}, xs));
  for (double x : {0.2, 1.0, 2.5})
    CHECK(predict(m1, x) == doctest::Approx(predict(m2, x)).epsilon(1e-7));
  CHECK(m1.residual_rms == doctest::Approx(m2.residual_rms).epsilon(1e-7));
}

TEST_CASE("multi-response fit matches per-response fits") {
  auto xs = linspace(-1.0, 1.0, 100);
  std::vector<std::vector<double>> ys(2, std::vector<double>(xs.size()));
  for (size_t i = 0; i < xs.size(); ++i) {
    ys[0][i] = 1.0 + xs[i];
    ys[1][i] = xs[i] * xs[i] - 0.5;
  }
  BasisSpec b{BasisKind::Monomial, 2, FeatureKind::X, 0, 1};
  auto multi = fit_least_squares_multi(xs, ys, b);
  REQUIRE(multi.size() == 2);
  auto one = fit_least_squares(xs, ys[1], b);
  for (double x : {-0.9, 0.0, 0.7})
    CHECK(predict(multi[1], x) == doctest::Approx(predict(one, x)).epsilon(1e-12));
}

TEST_CASE("pinball loss definition") {
  CHECK(pinball_loss(2.0, 0.1) == doctest::Approx(0.2));
  CHECK(pinball_loss(-2.0, 0.1) == doctest::Approx(1.8));
  CHECK(pinball_loss(0.0, 0.3) == doctest::Approx(0.0));
  CHECK(pinball_loss(1.0, 0.99) == doctest::Approx(0.99));
}

TEST_CASE("quantile fit reproduces a gaussian quantile line") {
  // y = 2x + eps, eps ~ N(0,1): the alpha-quantile curve is 2x + z_alpha.
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  const size_t n = 40000;
  std::vector<double> xs(n), ys(n);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = ud(gen);
    ys[i] = 2.0 * xs[i] + nd(gen);
  }
  const double alpha = 0.1;
  auto model = fit_quantile(xs, ys, standardized({BasisKind::Monomial, 1, FeatureKind::X, 0, 1}, xs),
                            alpha);
  const double za = normal_quantile(alpha);
  for (double x : {-0.8, -0.3, 0.0, 0.4, 0.9})
    CHECK(testutil::near(predict(model, x), 2.0 * x + za, 0.06));
}

TEST_CASE("quantile fit coverage near alpha") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 2.0);
  const size_t n = 30000;
  std::vector<double> xs(n), ys(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = ud(gen);
    ys[i] = xs[i] * xs[i] + (0.5 + xs[i]) * nd(gen);  // heteroskedastic
  }
  const double alpha = 0.05;
  auto model = fit_quantile(xs, ys, standardized({BasisKind::Monomial, 3, FeatureKind::X, 0, 1}, xs),
                            alpha);
  size_t below = 0;
  for (size_t i = 0; i < n; ++i) below += ys[i] < predict(model, xs[i]);
  const double frac = double(below) / double(n);
  const double se = std::sqrt(alpha * (1 - alpha) / double(n));
  CHECK(std::abs(frac - alpha) < 4 * se);
}

TEST_CASE("quantile fit is invariant to sample duplication") {
  // Loss is per-observation averaged, so duplicating the data set must not
  // move the optimum (same optimization path given the same start).
  std::mt19937_64 gen(19);
  std::normal_distribution<double> nd;
  const size_t n = 2000;
  std::vector<double> xs(n), ys(n);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = ud(gen);
    ys[i] = xs[i] + 0.3 * nd(gen);
  }
  std::vector<double> xs2 = xs, ys2 = ys;
  xs2.insert(xs2.end(), xs.begin(), xs.end());
  ys2.insert(ys2.end(), ys.begin(), ys.end());
  auto b = standardized({BasisKind::Monomial, 1, FeatureKind::X, 0, 1}, xs);
  QuantileFitOptions opts;
  opts.steps = 2000;
  auto m1 = fit_quantile(xs, ys, b, 0.1, opts);
  auto m2 = fit_quantile(xs2, ys2, b, 0.1, opts);
  for (double x : {-0.5, 0.0, 0.5})
    CHECK(testutil::near(predict(m1, x), predict(m2, x), 5e-3));
}

TEST_CASE("quantile fit starts from the least squares solution") {
  // With zero steps the result must equal the plain LS fit shifted by the
  // residual quantile seed, which for symmetric data stays near the LS line.
  // We only check it does not blow up for degenerate inputs.
  std::vector<double> xs = {0.0, 1.0, 2.0, 3.0};
  std::vector<double> ys = {1.0, 1.0, 1.0, 1.0};
  auto m = fit_quantile(xs, ys, BasisSpec{BasisKind::Monomial, 1, FeatureKind::X, 0, 1}, 0.01);
  for (double x : {0.0, 3.0}) CHECK(testutil::near(predict(m, x), 1.0, 1e-6));
}

TEST_CASE("linear model json round trip") {
  LinearModel m;
  m.basis = BasisSpec{BasisKind::Laguerre, 5, FeatureKind::V, 1.25, 0.5};
  m.coeffs = {1.0, -2.5, 0.125, 3.75e-3, -1e-12, 17.0};
  auto text = to_json_string(m);
  auto back = linear_model_from_json(text);
  CHECK(back.basis.kind == m.basis.kind);
  CHECK(back.basis.degree == m.basis.degree);
  CHECK(back.basis.feature == m.basis.feature);
  CHECK(back.basis.shift == m.basis.shift);
  CHECK(back.basis.scale == m.basis.scale);
  REQUIRE(back.coeffs.size() == m.coeffs.size());
  for (size_t i = 0; i < m.coeffs.size(); ++i) CHECK(back.coeffs[i] == m.coeffs[i]);
  for (double x : {-1.0, 0.0, 2.0})
    CHECK(predict(back, x) == doctest::Approx(predict(m, x)).epsilon(1e-15));
}

TEST_CASE("enum string round trips") {
  CHECK(basis_kind_from_string("monomial") == BasisKind::Monomial);
  CHECK(basis_kind_from_string("laguerre") == BasisKind::Laguerre);
  CHECK(feature_kind_from_string("x") == FeatureKind::X);
  CHECK(feature_kind_from_string("v") == FeatureKind::V);
  CHECK(std::string(to_string(BasisKind::Laguerre)) == "laguerre");
  CHECK(std::string(to_string(FeatureKind::V)) == "v");
  CHECK_THROWS_AS((void)basis_kind_from_string("chebyshev"), std::invalid_argument);
  CHECK_THROWS_AS((void)feature_kind_from_string("w"), std::invalid_argument);
}

}  // TEST_SUITE
