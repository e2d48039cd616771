#include "fvar/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "fvar/johnson.hpp"
#include "fvar/math.hpp"
#include "fvar/parallel.hpp"

namespace fvar {

namespace {

const std::vector<double>& feature_of(const DeltaVCross& cross, FeatureKind f) {
  return f == FeatureKind::X ? cross.x : cross.v;
}

// type-7 quantile of an already sorted sample
double sorted_quantile(const std::vector<double>& s, double p) {
  const std::size_t n = s.size();
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t i = static_cast<std::size_t>(h);
  const double g = h - static_cast<double>(i);
  if (g <= 0.0 || i + 1 >= n) return s[i];
  return s[i] + g * (s[i + 1] - s[i]);
}

// Piecewise-linear map through (x, y) nodes, flat beyond the ends. Duplicate
// x values are merged by averaging.
class LinearInterp {
 public:
  explicit LinearInterp(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    xs_.reserve(pts.size());
    ys_.reserve(pts.size());
    std::size_t i = 0;
    while (i < pts.size()) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < pts.size() && pts[j].first == pts[i].first) sum += pts[j++].second;
      xs_.push_back(pts[i].first);
      ys_.push_back(sum / static_cast<double>(j - i));
      i = j;
    }
  }

  double operator()(double x) const {
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return ys_[i - 1] + w * (ys_[i] - ys_[i - 1]);
  }

 private:
  std::vector<double> xs_, ys_;
};

std::string basis_tag(const BasisSpec& b) {
  std::ostringstream os;
  os << to_string(b.kind) << b.degree << "," << to_string(b.feature);
  return os.str();
}

ImCross make_result(const DeltaVCross& cross, std::string id) {
  ImCross out;
  out.t_index = cross.t_index;
  out.t = cross.t;
  out.method = std::move(id);
  out.per_path_im.resize(cross.size());
  return out;
}

void require_context(const StepContext* ctx, const char* who) {
  if (!ctx || !ctx->outer)
    throw std::invalid_argument(std::string(who) + ": needs a simulation context");
}

// normal-quantile fallback used when a distribution fit is not available
double sn_quantile(double mean, double var, double z_alpha) {
  return mean + z_alpha * std::sqrt(std::max(var, 0.0));
}

}  // namespace

const char* to_string(JlsmcCorrection c) {
  switch (c) {
    case JlsmcCorrection::Project: return "project";
    case JlsmcCorrection::NormalFallback: return "normal_fallback";
    case JlsmcCorrection::Discard: return "discard";
  }
  return "project";
}

JlsmcCorrection jlsmc_correction_from_string(const std::string& s) {
  if (s == "project") return JlsmcCorrection::Project;
  if (s == "normal_fallback") return JlsmcCorrection::NormalFallback;
  if (s == "discard") return JlsmcCorrection::Discard;
  throw std::invalid_argument("unknown jlsmc correction: " + s);
}

std::string method_id(const MethodSpec& spec) {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NestedMcSpec>) {
          os << "nested_mc[n=" << s.n_inner << "]";
        } else if constexpr (std::is_same_v<T, GlsmcSpec>) {
          os << "glsmc[" << basis_tag(s.basis) << "]";
        } else if constexpr (std::is_same_v<T, JlsmcSpec>) {
          os << "jlsmc[" << basis_tag(s.basis) << "," << to_string(s.correction) << ",grid"
             << s.eval_points;
          if (s.inner_mean > 0) os << ",innermean=" << s.inner_mean;
          os << "]";
        } else if constexpr (std::is_same_v<T, QuantileRegSpec>) {
          os << "qreg[" << basis_tag(s.basis);
          if (s.inner_augment > 0) os << ",aug=" << s.inner_augment;
          os << "]";
        } else if constexpr (std::is_same_v<T, DeltaGammaNormalSpec>) {
          os << "dg_normal";
        } else if constexpr (std::is_same_v<T, DeltaGammaCfSpec>) {
          os << "dg_cf";
        } else if constexpr (std::is_same_v<T, JppSpec>) {
          os << "jpp[";
          if (const auto* in = std::get_if<JppInner>(&s.source)) {
            os << "inner,n=" << in->n_inner;
          } else {
            const auto& ps = std::get<JppPseudo>(s.source);
            os << "pseudo,k=" << ps.k << ",stride=" << ps.stride << "," << to_string(ps.key);
          }
          os << ",z=" << s.z << "]";
        } else if constexpr (std::is_same_v<T, RawPseudoSpec>) {
          os << "raw_pseudo[k=" << s.k << "," << to_string(s.key) << "]";
        }
      },
      spec);
  return os.str();
}

EvalGrid make_eval_grid(const std::vector<double>& feature, std::size_t n) {
  if (n < 2) throw std::invalid_argument("make_eval_grid: need at least two points");
  if (feature.empty()) throw std::invalid_argument("make_eval_grid: empty feature sample");
  std::vector<double> sorted = feature;
  std::sort(sorted.begin(), sorted.end());
  EvalGrid grid;
  grid.points.resize(n);
  grid.probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid.probs[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    grid.points[i] = sorted_quantile(sorted, grid.probs[i]);
  }
  return grid;
}

ImCross nested_mc(const StepContext& ctx, const NestedMcSpec& spec) {
  require_context(&ctx, "nested_mc");
  const OuterPathSet& outer = *ctx.outer;
  const std::size_t n = outer.n_paths;
  const double t = outer.times.at(ctx.t_index);
  ImCross out;
  out.t_index = ctx.t_index;
  out.t = t;
  out.method = method_id(MethodSpec{spec});
  out.per_path_im.resize(n);
  parallel_for(n, static_cast<unsigned>(ctx.threads), [&](std::size_t i) {
    KeyedRng rng(outer.seed, i, StreamPurpose::Inner, ctx.t_index);
    const Anchor anchor{t, outer.state(i, ctx.t_index)};
    auto set = simulate_inner(outer.model, outer.inst, anchor, spec.n_inner, ctx.delta, ctx.rule,
                              rng);
    const double q = empirical_quantile(std::move(set.dv), ctx.alpha);
    out.per_path_im[i] = std::max(0.0, -q) * outer.deflator(i, ctx.t_index);
  });
  return out;
}

ImCross glsmc(const DeltaVCross& cross, const BasisSpec& basis_in, double alpha) {
  const std::size_t n = cross.size();
  if (n == 0) throw std::invalid_argument("glsmc: empty cross-section");
  const std::vector<double>& f = feature_of(cross, basis_in.feature);
  const BasisSpec basis = standardized(basis_in, f);

  std::vector<std::vector<double>> ys(2);
  ys[0] = cross.dv;
  ys[1].resize(n);
  for (std::size_t i = 0; i < n; ++i) ys[1][i] = cross.dv[i] * cross.dv[i];
  const auto models = fit_least_squares_multi(f, ys, basis);

  ImCross out = make_result(cross, method_id(MethodSpec{GlsmcSpec{basis_in}}));
  const double z = normal_quantile(alpha);
  const std::vector<double> r1 = predict(models[0], f);
  const std::vector<double> r2 = predict(models[1], f);
  std::size_t floored = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double var = r2[i] - r1[i] * r1[i];
    if (var < 0.0) {
      var = 0.0;
      ++floored;
    }
    out.per_path_im[i] = std::max(0.0, -(r1[i] + z * std::sqrt(var)));
  }
  out.fallbacks = floored;
  if (floored * 100 > n) {
    std::ostringstream msg;
    msg << "glsmc: variance estimate floored on " << floored << " of " << n << " paths";
    out.warnings.push_back(msg.str());
  }
  return out;
}

ImCross jlsmc(const DeltaVCross& cross, const JlsmcSpec& spec, double alpha,
              const StepContext* ctx) {
  const std::size_t n = cross.size();
  if (n == 0) throw std::invalid_argument("jlsmc: empty cross-section");
  if (spec.eval_points < 2) throw std::invalid_argument("jlsmc: eval_points must be >= 2");
  const std::vector<double>& f = feature_of(cross, spec.basis.feature);
  const BasisSpec basis = standardized(spec.basis, f);

  std::vector<std::vector<double>> ys(4, std::vector<double>(n));
  if (spec.inner_mean == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = cross.dv[i];
      const double d2 = d * d;
      ys[0][i] = d;
      ys[1][i] = d2;
      ys[2][i] = d2 * d;
      ys[3][i] = d2 * d2;
    }
  } else {
    require_context(ctx, "jlsmc(inner_mean)");
    const OuterPathSet& outer = *ctx->outer;
    const double t = outer.times.at(cross.t_index);
    parallel_for(n, static_cast<unsigned>(ctx->threads), [&](std::size_t i) {
      KeyedRng rng(outer.seed, i, StreamPurpose::Moment, cross.t_index);
      const Anchor anchor{t, outer.state(i, cross.t_index)};
      const auto set =
          simulate_inner(outer.model, outer.inst, anchor, spec.inner_mean, cross.delta,
                         cross.rule, rng);
      const double defl = cross.defl[i];
      double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
      for (double dv : set.dv) {
        const double d = defl * dv;
        const double d2 = d * d;
        m1 += d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
      }
      const double inv = 1.0 / static_cast<double>(set.dv.size());
      ys[0][i] = m1 * inv;
      ys[1][i] = m2 * inv;
      ys[2][i] = m3 * inv;
      ys[3][i] = m4 * inv;
    });
  }

  const auto models = fit_least_squares_multi(f, ys, basis);
  const EvalGrid grid = make_eval_grid(f, spec.eval_points);
  const double z = normal_quantile(alpha);

  ImCross out = make_result(cross, method_id(MethodSpec{spec}));
  std::vector<std::pair<double, double>> nodes;
  nodes.reserve(grid.points.size());
  std::size_t corrected = 0;
  for (double g : grid.points) {
    const double r1 = predict(models[0], g);
    const double r2 = predict(models[1], g);
    const double r3 = predict(models[2], g);
    const double r4 = predict(models[3], g);
    MomentSet ms;
    try {
      ms = central_from_raw(r1, r2, r3, r4);
    } catch (const std::domain_error&) {
      ++corrected;
      if (spec.correction == JlsmcCorrection::Discard) continue;
      nodes.emplace_back(g, r1);  // zero-variance point
      continue;
    }
    const double fallback_q = sn_quantile(ms.r1, ms.cm2, z);
    double q = fallback_q;
    if (validate_beta(ms) == BetaValidity::Valid) {
      try {
        q = johnson_quantile(fit_moments(ms), alpha);
      } catch (const no_fit_error&) {
        ++corrected;
      }
    } else {
      switch (spec.correction) {
        case JlsmcCorrection::Discard:
          ++corrected;
          continue;
        case JlsmcCorrection::NormalFallback:
          ++corrected;
          break;
        case JlsmcCorrection::Project: {
          // The line beta2 = beta1 + 1 is the two-point limit no bounded fit
          // attains; target just inside it, widening until the solver lands.
          const auto [b1p, b2p] = project_beta(ms.beta1, ms.beta2);
          MomentSet adj = ms;
          adj.beta1 = b1p;
          for (double eps : {1e-4, 1e-3, 1e-2, 5e-2}) {
            adj.beta2 = b2p + eps * (1.0 + b2p);
            try {
              q = johnson_quantile(fit_moments(adj), alpha);
              break;
            } catch (const no_fit_error&) {
            }
          }
          ++corrected;
          break;
        }
      }
    }
    nodes.emplace_back(g, q);
  }
  if (nodes.empty()) throw std::runtime_error("jlsmc: every evaluation point was discarded");

  const LinearInterp interp(std::move(nodes));
  for (std::size_t i = 0; i < n; ++i) out.per_path_im[i] = std::max(0.0, -interp(f[i]));
  out.corrected = corrected;
  return out;
}

ImCross quantile_reg_estimator(const DeltaVCross& cross, const QuantileRegSpec& spec, double alpha,
                               const StepContext* ctx) {
  const std::size_t n = cross.size();
  if (n == 0) throw std::invalid_argument("quantile_reg: empty cross-section");
  const std::vector<double>& f = feature_of(cross, spec.basis.feature);

  std::vector<double> xs = f;
  std::vector<double> ys = cross.dv;
  if (spec.inner_augment > 0) {
    require_context(ctx, "quantile_reg(inner_augment)");
    const OuterPathSet& outer = *ctx->outer;
    const double t = outer.times.at(cross.t_index);
    const std::size_t aug = spec.inner_augment;
    xs.resize(n + n * aug);
    ys.resize(n + n * aug);
    parallel_for(n, static_cast<unsigned>(ctx->threads), [&](std::size_t i) {
      KeyedRng rng(outer.seed, i, StreamPurpose::Augment, cross.t_index);
      const Anchor anchor{t, outer.state(i, cross.t_index)};
      const auto set = simulate_inner(outer.model, outer.inst, anchor, aug, cross.delta,
                                      cross.rule, rng);
      for (std::size_t j = 0; j < aug; ++j) {
        xs[n + i * aug + j] = f[i];
        ys[n + i * aug + j] = cross.defl[i] * set.dv[j];
      }
    });
  }

  const BasisSpec basis = standardized(spec.basis, xs);
  const LinearModel model = fit_quantile(xs, ys, basis, alpha, spec.fit);

  ImCross out = make_result(cross, method_id(MethodSpec{spec}));
  const std::vector<double> q = predict(model, f);
  for (std::size_t i = 0; i < n; ++i) out.per_path_im[i] = std::max(0.0, -q[i]);
  return out;
}

std::array<double, 5> delta_gamma_raw_moments(double delta_cash, double gamma_cash, double omega) {
  const double d2 = delta_cash * delta_cash;
  const double d4 = d2 * d2;
  const double g = gamma_cash;
  const double g2 = g * g;
  const double w = omega;
  const double w2 = w * w, w3 = w2 * w, w4 = w3 * w, w5 = w4 * w;
  std::array<double, 5> e{};
  e[0] = 0.5 * g * w;
  e[1] = d2 * w + 0.75 * g2 * w2;
  e[2] = 4.5 * d2 * g * w2 + 1.875 * g * g2 * w3;
  e[3] = 3.0 * d4 * w2 + 22.5 * d2 * g2 * w3 + (105.0 / 16.0) * g2 * g2 * w4;
  e[4] = 37.5 * d4 * g * w3 + 131.25 * d2 * g * g2 * w4 + (945.0 / 32.0) * g * g2 * g2 * w5;
  return e;
}

double delta_gamma_normal_quantile(double delta_cash, double gamma_cash, double sigma,
                                   double delta_t, double alpha) {
  if (!(delta_t > 0.0)) throw std::domain_error("delta_gamma: delta_t must be positive");
  const double omega = sigma * sigma * delta_t;
  const double mean = 0.5 * gamma_cash * omega;
  const double var =
      delta_cash * delta_cash * omega + 0.5 * gamma_cash * gamma_cash * omega * omega;
  return mean + normal_quantile(alpha) * std::sqrt(var);
}

double delta_gamma_cf_quantile(double delta_cash, double gamma_cash, double sigma, double delta_t,
                               double alpha) {
  if (!(delta_t > 0.0)) throw std::domain_error("delta_gamma: delta_t must be positive");
  const double omega = sigma * sigma * delta_t;
  const double mean = 0.5 * gamma_cash * omega;
  // sd of delta*R + gamma/2*R^2 without squaring the inputs; deep OTM paths
  // carry subnormal greeks whose squares underflow.
  const double sd = std::sqrt(omega) * std::hypot(delta_cash, gamma_cash * std::sqrt(0.5 * omega));
  // delta = gamma = 0 collapses deltaV to a point mass; every quantile is the
  // mean.
  if (!(sd > 0.0)) return mean;
  // Standardized cumulants are invariant under (delta, gamma) -> c*(delta,
  // gamma); rescale so the central moments are O(1).
  const auto e = delta_gamma_raw_moments(delta_cash / sd, gamma_cash / sd, omega);
  const double m = e[0];  // cm2 is exactly 1 in this parametrization
  const double cm3 = e[2] - 3.0 * m * e[1] + 2.0 * m * m * m;
  const double cm4 = e[3] - 4.0 * m * e[2] + 6.0 * m * m * e[1] - 3.0 * m * m * m * m;
  const double cm5 = e[4] - 5.0 * m * e[3] + 10.0 * m * m * e[2] - 10.0 * m * m * m * e[1] +
                     4.0 * m * m * m * m * m;
  const double k3 = cm3;
  const double k4 = cm4 - 3.0;
  const double k5 = cm5 - 10.0 * cm3;
  return mean + sd * cornish_fisher_quantile(alpha, k3, k4, k5);
}

namespace {

ImCross delta_gamma_impl(const StepContext& ctx, bool cornish_fisher) {
  require_context(&ctx, "delta_gamma");
  const OuterPathSet& outer = *ctx.outer;
  const auto* gbm = std::get_if<GbmParams>(&outer.model);
  if (!gbm)
    throw std::invalid_argument("delta_gamma: needs a lognormal diffusion model with greeks");
  const std::size_t n = outer.n_paths;
  const double t = outer.times.at(ctx.t_index);
  ImCross out;
  out.t_index = ctx.t_index;
  out.t = t;
  out.method = cornish_fisher ? method_id(MethodSpec{DeltaGammaCfSpec{}})
                              : method_id(MethodSpec{DeltaGammaNormalSpec{}});
  out.per_path_im.resize(n);
  parallel_for(n, static_cast<unsigned>(ctx.threads), [&](std::size_t i) {
    const double s = outer.state(i, ctx.t_index);
    const Greeks g = greeks(outer.inst, outer.model, t, s);
    const double q = cornish_fisher
                         ? delta_gamma_cf_quantile(g.delta_cash, g.gamma_cash, gbm->sigma,
                                                   ctx.delta, ctx.alpha)
                         : delta_gamma_normal_quantile(g.delta_cash, g.gamma_cash, gbm->sigma,
                                                       ctx.delta, ctx.alpha);
    out.per_path_im[i] = std::max(0.0, -q) * outer.deflator(i, ctx.t_index);
  });
  return out;
}

// Johnson quantile from four percentile anchors; falls back to a plain
// normal fit when the spreads degenerate.
double jpp_quantile(std::vector<double>& sample, double z, double alpha, double z_alpha,
                    bool* fell_back) {
  std::sort(sample.begin(), sample.end());
  const double q_m3 = sorted_quantile(sample, normal_cdf(-3.0 * z));
  const double q_m1 = sorted_quantile(sample, normal_cdf(-z));
  const double q_p1 = sorted_quantile(sample, normal_cdf(z));
  const double q_p3 = sorted_quantile(sample, normal_cdf(3.0 * z));
  try {
    return johnson_quantile(fit_percentiles(q_m3, q_m1, q_p1, q_p3, z), alpha);
  } catch (const std::exception&) {
    *fell_back = true;
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(sample.size());
    double var = 0.0;
    for (double v : sample) var += (v - mean) * (v - mean);
    var /= static_cast<double>(sample.size());
    return sn_quantile(mean, var, z_alpha);
  }
}

}  // namespace

ImCross delta_gamma_normal(const StepContext& ctx) { return delta_gamma_impl(ctx, false); }
ImCross delta_gamma_cf(const StepContext& ctx) { return delta_gamma_impl(ctx, true); }

ImCross johnson_percentile_estimator(const StepContext& ctx, const JppSpec& spec) {
  require_context(&ctx, "johnson_percentile");
  if (!(spec.z > 0.0)) throw std::invalid_argument("johnson_percentile: z must be positive");
  const OuterPathSet& outer = *ctx.outer;
  const std::size_t n = outer.n_paths;
  const double t = outer.times.at(ctx.t_index);
  const double z_alpha = normal_quantile(ctx.alpha);

  ImCross out;
  out.t_index = ctx.t_index;
  out.t = t;
  out.method = method_id(MethodSpec{spec});
  out.per_path_im.resize(n);

  if (const auto* inner = std::get_if<JppInner>(&spec.source)) {
    if (inner->n_inner < 20)
      throw std::invalid_argument("johnson_percentile: need at least 20 samples per anchor");
    std::vector<unsigned char> fell(n, 0);
    parallel_for(n, static_cast<unsigned>(ctx.threads), [&](std::size_t i) {
      KeyedRng rng(outer.seed, i, StreamPurpose::Inner, ctx.t_index);
      const Anchor anchor{t, outer.state(i, ctx.t_index)};
      auto set = simulate_inner(outer.model, outer.inst, anchor, inner->n_inner, ctx.delta,
                                ctx.rule, rng);
      bool fb = false;
      const double q = jpp_quantile(set.dv, spec.z, ctx.alpha, z_alpha, &fb);
      fell[i] = fb ? 1 : 0;
      out.per_path_im[i] = std::max(0.0, -q) * outer.deflator(i, ctx.t_index);
    });
    for (unsigned char c : fell) out.fallbacks += c;
    return out;
  }

  const auto& ps = std::get<JppPseudo>(spec.source);
  if (ps.k < 20)
    throw std::invalid_argument("johnson_percentile: need at least 20 samples per anchor");
  if (ps.stride == 0) throw std::invalid_argument("johnson_percentile: stride must be >= 1");
  const DeltaVCross cross = delta_v(outer, ctx.t_index, ctx.delta, ctx.rule);
  const SortedKeyView view(cross, ps.key);

  std::vector<std::size_t> ranks;
  for (std::size_t r = 0; r < n; r += ps.stride) ranks.push_back(r);
  if (ranks.back() != n - 1) ranks.push_back(n - 1);

  std::vector<std::pair<double, double>> nodes(ranks.size());
  std::vector<unsigned char> fell(ranks.size(), 0);
  parallel_for(ranks.size(), static_cast<unsigned>(ctx.threads), [&](std::size_t a) {
    const std::size_t path = view.order[ranks[a]];
    auto set = pseudo_inner(view, path, ps.k);
    bool fb = false;
    const double q = jpp_quantile(set.dv, spec.z, ctx.alpha, z_alpha, &fb);
    fell[a] = fb ? 1 : 0;
    nodes[a] = {view.key_value(path), q};
  });
  for (unsigned char c : fell) out.fallbacks += c;

  const LinearInterp interp(std::move(nodes));
  const std::vector<double>& keys = ps.key == PseudoKey::ByX ? cross.x : cross.v;
  for (std::size_t i = 0; i < n; ++i) out.per_path_im[i] = std::max(0.0, -interp(keys[i]));
  return out;
}

ImCross raw_pseudo(const DeltaVCross& cross, const RawPseudoSpec& spec, double alpha,
                   int threads) {
  const std::size_t n = cross.size();
  if (n == 0) throw std::invalid_argument("raw_pseudo: empty cross-section");
  if (spec.k < 2 || spec.k > n)
    throw std::invalid_argument("raw_pseudo: k must be in [2, n_outer]");
  const SortedKeyView view(cross, spec.key);
  ImCross out = make_result(cross, method_id(MethodSpec{spec}));
  parallel_for(n, static_cast<unsigned>(threads), [&](std::size_t i) {
    const auto [lo, hi] = view.window(view.rank_of[i], spec.k);
    std::vector<double> window;
    window.reserve(hi - lo + 1);
    for (std::size_t r = lo; r <= hi; ++r) window.push_back(cross.dv[view.order[r]]);
    out.per_path_im[i] = std::max(0.0, -empirical_quantile(std::move(window), alpha));
  });
  return out;
}

ImCross run_method(const MethodSpec& spec, const StepContext& ctx) {
  require_context(&ctx, "run_method");
  return std::visit(
      [&](const auto& s) -> ImCross {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NestedMcSpec>) {
          return nested_mc(ctx, s);
        } else if constexpr (std::is_same_v<T, GlsmcSpec>) {
          return glsmc(delta_v(*ctx.outer, ctx.t_index, ctx.delta, ctx.rule), s.basis, ctx.alpha);
        } else if constexpr (std::is_same_v<T, JlsmcSpec>) {
          return jlsmc(delta_v(*ctx.outer, ctx.t_index, ctx.delta, ctx.rule), s, ctx.alpha, &ctx);
        } else if constexpr (std::is_same_v<T, QuantileRegSpec>) {
          return quantile_reg_estimator(delta_v(*ctx.outer, ctx.t_index, ctx.delta, ctx.rule), s,
                                        ctx.alpha, &ctx);
        } else if constexpr (std::is_same_v<T, DeltaGammaNormalSpec>) {
          return delta_gamma_normal(ctx);
        } else if constexpr (std::is_same_v<T, DeltaGammaCfSpec>) {
          return delta_gamma_cf(ctx);
        } else if constexpr (std::is_same_v<T, JppSpec>) {
          return johnson_percentile_estimator(ctx, s);
        } else {
          return raw_pseudo(delta_v(*ctx.outer, ctx.t_index, ctx.delta, ctx.rule), s, ctx.alpha,
                            ctx.threads);
        }
      },
      spec);
}

}  // namespace fvar
