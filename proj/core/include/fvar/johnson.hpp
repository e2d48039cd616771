#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fvar {

// Johnson translation system: Z = gamma + delta * g((X - xi) / lambda) with
// g = log (SL), logit (SB), asinh (SU), identity (SN).
enum class JohnsonFamily { SL, SB, SU, SN };

const char* to_string(JohnsonFamily f);

struct JohnsonParams {
  JohnsonFamily family = JohnsonFamily::SN;
  double gamma = 0.0;
  double delta = 1.0;   // > 0
  double xi = 0.0;
  double lambda = 1.0;  // > 0; fixed at 1 for SL; the sd for SN
};

// Raw moments r1..r4 with derived central moments and shape pair.
// beta1 = skew^2, beta2 = kurtosis; skew_sign in {-1, 0, +1}.
struct MomentSet {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
  double cm2 = 0.0, cm3 = 0.0, cm4 = 0.0;
  double beta1 = 0.0, beta2 = 0.0;
  int skew_sign = 0;
};

// Throws std::domain_error when cm2 is at or below the degeneracy floor.
MomentSet central_from_raw(double r1, double r2, double r3, double r4);
MomentSet moment_set_from_sample(const std::vector<double>& xs);

// Fifth standardized cumulant input for Cornish-Fisher: cm5 / cm2^(5/2).
double fifth_central_from_raw(double r1, double r2, double r3, double r4, double r5);

// Feasibility of a (beta1, beta2) pair: every distribution satisfies
// beta2 >= beta1 + 1.
enum class BetaValidity { Valid, Invalid };
BetaValidity validate_beta(double beta1, double beta2);
BetaValidity validate_beta(const MomentSet& m);

// Orthogonal projection of an infeasible pair onto the boundary
// beta2 = beta1 + 1, clamped to beta1 >= 0.
std::pair<double, double> project_beta(double beta1, double beta2);

// Raised when the moment-matching iteration does not converge; callers fall
// back to the SN fit of (mean, variance).
class no_fit_error : public std::runtime_error {
 public:
  explicit no_fit_error(const std::string& what) : std::runtime_error(what) {}
};

// Family selection by the position of (beta1, beta2) against the lognormal
// line, then parameter matching of all four moments. Requires a Valid pair
// (project first). SU solves a one-dimensional recursion in omega =
// exp(delta^-2); SB runs a damped 2-D Newton on (gamma, delta) with
// quadrature moments; near-normal pairs short-circuit to SN.
JohnsonParams fit_moments(const MomentSet& m);

// beta2 of the lognormal with squared skewness beta1 (the SL line).
double lognormal_line(double beta1);

// Slifker-Shapiro percentile matching from the four sample quantiles at
// probabilities Phi(-3z), Phi(-z), Phi(z), Phi(3z). Family by the
// discriminant d = mn/p^2 (SU above 1.001, SB below 0.999, SL between, exact
// normal spacing degenerates to SN). Throws std::domain_error when a spread
// is non-positive.
JohnsonParams fit_percentiles(double q_m3z, double q_m1z, double q_p1z, double q_p3z, double z);

double johnson_quantile(const JohnsonParams& p, double alpha);
double johnson_cdf(const JohnsonParams& p, double x);
double johnson_pdf(const JohnsonParams& p, double x);

// First four moments of a fitted distribution (analytic for SN/SL/SU,
// quadrature for SB). Used by round-trip checks and the SB solver.
struct DistMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skew = 0.0;
  double kurtosis = 0.0;
};
DistMoments johnson_moments(const JohnsonParams& p);

// Cornish-Fisher quantile adjustment in standardized space; k4 is the excess
// kurtosis cumulant and k5 the fifth standardized cumulant. Returns the
// adjusted z; callers de-standardize with mean + sd * result.
double cornish_fisher_quantile(double alpha, double k3, double k4, double k5);

}  // namespace fvar
