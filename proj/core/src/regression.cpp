#include "fvar/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fvar/simulation.hpp"
#include "json.hpp"

namespace fvar {

namespace {

Eigen::MatrixXd design_matrix(const BasisSpec& spec, const std::vector<double>& x) {
  const std::size_t n = x.size(), p = spec.size();
  Eigen::MatrixXd a(n, p);
  std::vector<double> row(p);
  for (std::size_t i = 0; i < n; ++i) {
    basis_row(spec, x[i], row.data());
    for (std::size_t j = 0; j < p; ++j) a(i, j) = row[j];
  }
  return a;
}

void check_fit_inputs(const std::vector<double>& x, const std::vector<double>& y,
                      const BasisSpec& basis) {
  if (basis.degree < 0) throw std::invalid_argument("regression: degree must be non-negative");
  if (!(basis.scale > 0.0)) throw std::invalid_argument("regression: scale must be positive");
  if (x.size() != y.size()) throw std::invalid_argument("regression: x/y length mismatch");
  if (x.size() < basis.size())
    throw std::invalid_argument("regression: fewer samples than parameters");
}

// Smoothed pinball: quadratic of width `w` replacing the kink, matching value
// and slope at +-w. Derivative is alpha above, alpha-1 below, linear between.
double smoothed_pinball(double r, double alpha, double w) {
  if (r >= w) return alpha * r;
  if (r <= -w) return (alpha - 1.0) * r;
  return r * r / (4.0 * w) + (alpha - 0.5) * r + 0.25 * w;
}

double smoothed_pinball_deriv(double r, double alpha, double w) {
  if (r >= w) return alpha;
  if (r <= -w) return alpha - 1.0;
  return r / (2.0 * w) + alpha - 0.5;
}

}  // namespace

const char* to_string(BasisKind k) {
  return k == BasisKind::Monomial ? "monomial" : "laguerre";
}

const char* to_string(FeatureKind f) { return f == FeatureKind::X ? "x" : "v"; }

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "monomial") return BasisKind::Monomial;
  if (s == "laguerre") return BasisKind::Laguerre;
  throw std::invalid_argument("unknown basis kind: " + s);
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "x") return FeatureKind::X;
  if (s == "v") return FeatureKind::V;
  throw std::invalid_argument("unknown feature kind: " + s);
}

BasisSpec standardized(BasisSpec spec, const std::vector<double>& xs) {
  if (xs.empty()) return spec;
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double v : xs) var += (v - mean) * (v - mean);
  var /= static_cast<double>(xs.size());
  spec.shift = mean;
  spec.scale = var > 0.0 ? std::sqrt(var) : 1.0;
  return spec;
}

void basis_row(const BasisSpec& spec, double x, double* row) {
  const double t = (x - spec.shift) / spec.scale;
  const int d = spec.degree;
  row[0] = 1.0;
  if (d == 0) return;
  if (spec.kind == BasisKind::Monomial) {
    for (int k = 1; k <= d; ++k) row[k] = row[k - 1] * t;
    return;
  }
  // Laguerre recurrence (k+1) L_{k+1} = (2k+1-t) L_k - k L_{k-1}
  row[1] = 1.0 - t;
  for (int k = 1; k < d; ++k)
    row[k + 1] = ((2.0 * k + 1.0 - t) * row[k] - k * row[k - 1]) / (k + 1.0);
}

double predict(const LinearModel& model, double x) {
  std::vector<double> row(model.basis.size());
  basis_row(model.basis, x, row.data());
  double s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) s += model.coeffs[j] * row[j];
  return s;
}

std::vector<double> predict(const LinearModel& model, const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  std::vector<double> row(model.basis.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    basis_row(model.basis, xs[i], row.data());
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += model.coeffs[j] * row[j];
    out[i] = s;
  }
  return out;
}

double pinball_loss(double residual, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("pinball_loss: alpha outside (0,1)");
  return residual >= 0.0 ? alpha * residual : (alpha - 1.0) * residual;
}

LinearModel fit_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                              const BasisSpec& basis) {
  return fit_least_squares_multi(x, {y}, basis).front();
}

std::vector<LinearModel> fit_least_squares_multi(const std::vector<double>& x,
                                                 const std::vector<std::vector<double>>& ys,
                                                 const BasisSpec& basis) {
  if (ys.empty()) throw std::invalid_argument("regression: no responses");
  for (const auto& y : ys) check_fit_inputs(x, y, basis);
  const Eigen::MatrixXd a = design_matrix(basis, x);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  const auto& sv = svd.singularValues();
  const Eigen::Index rank = svd.rank();
  const double condition =
      rank > 0 ? sv(0) / sv(rank - 1) : std::numeric_limits<double>::infinity();

  std::vector<LinearModel> out;
  out.reserve(ys.size());
  for (const auto& y : ys) {
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
    const Eigen::VectorXd beta = svd.solve(b);
    LinearModel model;
    model.basis = basis;
    model.coeffs.assign(beta.data(), beta.data() + beta.size());
    const Eigen::VectorXd resid = b - a * beta;
    model.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(y.size()));
    model.condition = condition;
    out.push_back(std::move(model));
  }
  return out;
}

LinearModel fit_quantile(const std::vector<double>& x, const std::vector<double>& y,
                         const BasisSpec& basis, double alpha, const QuantileFitOptions& opts) {
  check_fit_inputs(x, y, basis);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("fit_quantile: alpha outside (0,1)");
  const std::size_t n = x.size(), p = basis.size();

  double width = opts.smoothing;
  if (!(width > 0.0)) {
    const double iqr =
        empirical_quantile(y, 0.75) - empirical_quantile(y, 0.25);
    width = 1e-3 * iqr;
    if (!(width > 0.0)) {
      double amax = 0.0;
      for (double v : y) amax = std::max(amax, std::abs(v));
      width = 1e-9 * (1.0 + amax);
    }
  }

  const Eigen::MatrixXd a = design_matrix(basis, x);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());

  // normalize columns to unit RMS so one step size fits all coefficients
  Eigen::VectorXd col_scale(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double rms = std::sqrt(a.col(j).squaredNorm() / static_cast<double>(n));
    col_scale(j) = rms > 1e-12 ? rms : 1.0;
  }
  const Eigen::MatrixXd an = a * col_scale.cwiseInverse().asDiagonal();

  LinearModel init = fit_least_squares(x, y, basis);
  {
    const std::vector<double> fitted = predict(init, x);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - fitted[i];
    init.coeffs[0] += empirical_quantile(resid, alpha);
  }
  Eigen::VectorXd beta(p);
  for (std::size_t j = 0; j < p; ++j) beta(j) = init.coeffs[j] * col_scale(j);

  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd resid(n), slope(n), grad(p);
  auto eval_loss = [&](const Eigen::VectorXd& bt) {
    resid = b - an * bt;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += smoothed_pinball(resid(i), alpha, width);
    return loss * inv_n;
  };

  double loss = eval_loss(beta);
  int rising = 0;
  // The kink makes the last iterate oscillate across the quantile surface at
  // the step scale; the tail average of the second half converges to the
  // minimizer (Polyak averaging).
  Eigen::VectorXd avg_sum = Eigen::VectorXd::Zero(p);
  long avg_count = 0;
  const int avg_from = opts.steps / 2 + 1;
  for (int step = 1; step <= opts.steps; ++step) {
    for (std::size_t i = 0; i < n; ++i) slope(i) = smoothed_pinball_deriv(resid(i), alpha, width);
    grad.noalias() = -(an.transpose() * slope) * inv_n;
    if (grad.norm() < 1e-8) break;
    const double lr = opts.learn_rate / std::sqrt(static_cast<double>(step));
    beta -= lr * grad;
    if (step >= avg_from) {
      avg_sum += beta;
      ++avg_count;
    }
    const double next_loss = eval_loss(beta);
    if (next_loss > loss) {
      if (++rising >= 10) {
        std::ostringstream msg;
        msg << "fit_quantile: loss rose for 10 consecutive steps (step " << step << ", loss "
            << next_loss << ", gradient norm " << grad.norm() << ")";
        throw std::runtime_error(msg.str());
      }
    } else {
      rising = 0;
    }
    loss = next_loss;
  }
  if (avg_count > 0) beta = avg_sum / static_cast<double>(avg_count);

  LinearModel model;
  model.basis = basis;
  model.coeffs.resize(p);
  for (std::size_t j = 0; j < p; ++j) model.coeffs[j] = beta(j) / col_scale(j);
  const Eigen::VectorXd final_resid = b - an * beta;
  model.residual_rms = std::sqrt(final_resid.squaredNorm() * inv_n);
  model.condition = init.condition;
  return model;
}

std::string to_json_string(const LinearModel& model) {
  nlohmann::json j;
  j["kind"] = to_string(model.basis.kind);
  j["degree"] = model.basis.degree;
  j["feature"] = to_string(model.basis.feature);
  j["shift"] = model.basis.shift;
  j["scale"] = model.basis.scale;
  j["coeffs"] = model.coeffs;
  return j.dump();
}

LinearModel linear_model_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  for (const auto& [key, _] : j.items()) {
    if (key != "kind" && key != "degree" && key != "feature" && key != "shift" &&
        key != "scale" && key != "coeffs")
      throw std::invalid_argument("linear_model_from_json: unknown key " + key);
  }
  LinearModel model;
  model.basis.kind = basis_kind_from_string(j.at("kind").get<std::string>());
  model.basis.degree = j.at("degree").get<int>();
  model.basis.feature = feature_kind_from_string(j.at("feature").get<std::string>());
  model.basis.shift = j.at("shift").get<double>();
  model.basis.scale = j.at("scale").get<double>();
  model.coeffs = j.at("coeffs").get<std::vector<double>>();
  if (model.coeffs.size() != model.basis.size())
    throw std::invalid_argument("linear_model_from_json: coefficient count mismatch");
  return model;
}

}  // namespace fvar
