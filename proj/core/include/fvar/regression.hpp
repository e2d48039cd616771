#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fvar {

enum class BasisKind { Monomial, Laguerre };
enum class FeatureKind { X, V };

const char* to_string(BasisKind k);
const char* to_string(FeatureKind f);
BasisKind basis_kind_from_string(const std::string& s);
FeatureKind feature_kind_from_string(const std::string& s);

// Polynomial basis over one standardized feature. `shift`/`scale` are applied
// before expansion; degree-32 fits in raw price units are numerically hopeless.
struct BasisSpec {
  BasisKind kind = BasisKind::Monomial;
  int degree = 3;
  FeatureKind feature = FeatureKind::X;
  double shift = 0.0;
  double scale = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(degree) + 1; }
};

// Sets shift/scale to the sample mean and standard deviation of `xs`.
BasisSpec standardized(BasisSpec spec, const std::vector<double>& xs);

// Writes the degree+1 basis values at x into `row`.
void basis_row(const BasisSpec& spec, double x, double* row);

struct LinearModel {
  BasisSpec basis;
  std::vector<double> coeffs;
  double residual_rms = 0.0;
  double condition = 0.0;
};

double predict(const LinearModel& model, double x);
std::vector<double> predict(const LinearModel& model, const std::vector<double>& xs);

double pinball_loss(double residual, double alpha);

LinearModel fit_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                              const BasisSpec& basis);

// Several responses against one design matrix, factored once.
std::vector<LinearModel> fit_least_squares_multi(const std::vector<double>& x,
                                                 const std::vector<std::vector<double>>& ys,
                                                 const BasisSpec& basis);

struct QuantileFitOptions {
  double smoothing = -1.0;  // <= 0: 1e-3 times the interquartile range of y
  int steps = 5000;
  double learn_rate = 10.0;  // decays as learn_rate / sqrt(step)
};

LinearModel fit_quantile(const std::vector<double>& x, const std::vector<double>& y,
                         const BasisSpec& basis, double alpha,
                         const QuantileFitOptions& opts = {});

// Audit serialization: {kind, degree, feature, shift, scale, coeffs}.
std::string to_json_string(const LinearModel& model);
LinearModel linear_model_from_json(const std::string& text);

}  // namespace fvar
