#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "fvar/regression.hpp"
#include "fvar/simulation.hpp"

namespace fvar {

// ----- method specifications ------------------------------------------------

struct NestedMcSpec {
  std::size_t n_inner = 2000;
};

struct GlsmcSpec {
  BasisSpec basis;
};

enum class JlsmcCorrection { Project, NormalFallback, Discard };
const char* to_string(JlsmcCorrection c);
JlsmcCorrection jlsmc_correction_from_string(const std::string& s);

struct JlsmcSpec {
  BasisSpec basis;
  std::size_t eval_points = 200;
  JlsmcCorrection correction = JlsmcCorrection::Project;
  // 0: per-path single-sample moment targets; n > 0: each target is the mean
  // over n fresh inner samples per path
  std::size_t inner_mean = 0;
};

struct QuantileRegSpec {
  BasisSpec basis;
  std::size_t inner_augment = 0;  // extra inner samples appended per path
  QuantileFitOptions fit;
};

struct DeltaGammaNormalSpec {};
struct DeltaGammaCfSpec {};

struct JppInner {
  std::size_t n_inner = 100;
};
struct JppPseudo {
  std::size_t k = 200;
  std::size_t stride = 10;
  PseudoKey key = PseudoKey::ByX;
};
struct JppSpec {
  std::variant<JppInner, JppPseudo> source = JppPseudo{};
  double z = 1.0;  // percentile anchors at Phi(-3z), Phi(-z), Phi(z), Phi(3z)
};

struct RawPseudoSpec {
  std::size_t k = 200;
  PseudoKey key = PseudoKey::ByX;
};

using MethodSpec = std::variant<NestedMcSpec, GlsmcSpec, JlsmcSpec, QuantileRegSpec,
                                DeltaGammaNormalSpec, DeltaGammaCfSpec, JppSpec, RawPseudoSpec>;

// Stable human-readable identifier, e.g. "jlsmc[laguerre7,v,project,grid200]".
std::string method_id(const MethodSpec& spec);

// ----- evaluation artifacts ---------------------------------------------------

// Feature anchors where grid methods evaluate the fitted quantile: the
// cross-section feature quantiles at n equally spaced probabilities
// (i + 0.5)/n, i.e. 0.25%..99.75% for n = 200.
struct EvalGrid {
  std::vector<double> points;
  std::vector<double> probs;
};

EvalGrid make_eval_grid(const std::vector<double>& feature, std::size_t n);

// Per-path initial margin at one time step, in time-0 deflated money.
struct ImCross {
  std::size_t t_index = 0;
  double t = 0.0;
  std::string method;
  std::vector<double> per_path_im;
  double wall_time = 0.0;       // seconds, filled by the pipeline
  std::size_t corrected = 0;    // grid points corrected, discarded, or SN-fallen-back
  std::size_t fallbacks = 0;    // per-anchor normal fallbacks (JPP) or variance floors (GLSMC)
  std::vector<std::string> warnings;
};

// Everything an estimator needs about one time step.
struct StepContext {
  const OuterPathSet* outer = nullptr;
  std::size_t t_index = 0;
  double delta = 0.0;
  InclusionRule rule = InclusionRule::Full;
  double alpha = 0.01;
  int threads = 1;
};

// ----- the eight methods ------------------------------------------------------

ImCross nested_mc(const StepContext& ctx, const NestedMcSpec& spec);

ImCross glsmc(const DeltaVCross& cross, const BasisSpec& basis, double alpha);

// ctx is required when spec.inner_mean > 0 (fresh inner simulations).
ImCross jlsmc(const DeltaVCross& cross, const JlsmcSpec& spec, double alpha,
              const StepContext* ctx = nullptr);

// ctx is required when spec.inner_augment > 0.
ImCross quantile_reg_estimator(const DeltaVCross& cross, const QuantileRegSpec& spec, double alpha,
                               const StepContext* ctx = nullptr);

// Raw moments E[(d R + g R^2 / 2)^k], k = 1..5, for R ~ N(0, omega).
std::array<double, 5> delta_gamma_raw_moments(double delta_cash, double gamma_cash, double omega);

// One-step quantiles of the delta-gamma value change, t-money units.
double delta_gamma_normal_quantile(double delta_cash, double gamma_cash, double sigma,
                                   double delta_t, double alpha);
double delta_gamma_cf_quantile(double delta_cash, double gamma_cash, double sigma, double delta_t,
                               double alpha);

ImCross delta_gamma_normal(const StepContext& ctx);
ImCross delta_gamma_cf(const StepContext& ctx);

ImCross johnson_percentile_estimator(const StepContext& ctx, const JppSpec& spec);

ImCross raw_pseudo(const DeltaVCross& cross, const RawPseudoSpec& spec, double alpha,
                   int threads = 1);

// Dispatch on the variant; builds the deltaV cross-section internally where
// the method needs one.
ImCross run_method(const MethodSpec& spec, const StepContext& ctx);

}  // namespace fvar
