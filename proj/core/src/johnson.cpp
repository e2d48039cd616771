#include "fvar/johnson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fvar/math.hpp"

namespace fvar {

namespace {

constexpr double kSnBeta1Gate = 1e-8;
constexpr double kSnBeta2Gate = 1e-5;
constexpr double kSlBand = 1e-3;       // |beta2 - lognormal(beta1)| selecting SL
constexpr double kBetaTol = 1e-10;     // Newton residual tolerance on (beta1, beta2)
constexpr int kMaxIter = 200;

JohnsonParams sn_fit(double mean, double variance) {
  const double sd = std::sqrt(variance);
  JohnsonParams p;
  p.family = JohnsonFamily::SN;
  p.delta = 1.0;
  p.lambda = sd;
  p.gamma = -mean / sd;
  p.xi = 0.0;
  return p;
}

// omega of the lognormal with squared skewness beta1: the positive root of
// (omega - 1)(omega + 2)^2 = beta1, via the depressed-cubic closed form.
double lognormal_omega(double beta1) {
  if (beta1 <= 0.0) return 1.0;
  const double u3 = 0.5 * (2.0 + beta1 + std::sqrt(beta1 * (beta1 + 4.0)));
  const double u = std::cbrt(u3);
  return u + 1.0 / u - 1.0;
}

// ----- SU moment matching --------------------------------------------------
//
// With omega = exp(delta^-2), M = omega * sinh^2(gamma/delta) and unit
// variance, the shape pair obeys
//   beta1(omega, M) = M (omega-1) [3(omega+1)^2 + 4M(omega+2)]^2
//                     / (2 (2M + omega + 1)^3)
//   beta2(omega, M) : quadratic in M (coefficients below).
// For fixed beta2 the quadratic gives M(omega); beta1(omega, M(omega)) grows
// from 0 at the symmetric point to the lognormal-line value, so a bracketed
// root search in omega recovers the parameters.

double su_m_of_omega(double w, double beta2) {
  const double C = ((w + 2.0) * w + 3.0) * w * w - 3.0;
  const double a = 8.0 * (C - beta2);
  const double b = 8.0 * (w * C + w * (w + 2.0) - beta2 * (w + 1.0));
  const double c =
      w * w * C + 4.0 * w * w * (w + 2.0) + 6.0 * w + 3.0 - 2.0 * beta2 * (w + 1.0) * (w + 1.0);
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (std::abs(a) < 1e-14 * std::abs(b)) return -c / b;
  // M = 0 is a root at the symmetric point; follow that branch, which is the
  // smaller nonnegative root (the quadratic opens downward inside the bracket)
  const double sq = std::sqrt(disc);
  const double r1 = (-b + sq) / (2.0 * a);
  const double r2 = (-b - sq) / (2.0 * a);
  const double lo = std::min(r1, r2), hi = std::max(r1, r2);
  if (lo >= -1e-12) return std::max(lo, 0.0);
  if (hi >= -1e-12) return std::max(hi, 0.0);
  return std::numeric_limits<double>::quiet_NaN();
}

double su_beta1_of(double w, double m) {
  if (!(m >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double wp1 = w + 1.0;
  const double bracket = 3.0 * wp1 * wp1 + 4.0 * m * (w + 2.0);
  const double den = 2.0 * std::pow(2.0 * m + wp1, 3);
  return m * (w - 1.0) * bracket * bracket / den;
}

JohnsonParams su_assemble(double w, double m, double mean, double variance, int skew_sign) {
  JohnsonParams p;
  p.family = JohnsonFamily::SU;
  p.delta = 1.0 / std::sqrt(std::log(w));
  const double abs_sinh = std::sqrt(m / w);
  // positive skew needs Omega = gamma/delta < 0
  const double omega_arg = -static_cast<double>(skew_sign >= 0 ? 1 : -1) * std::asinh(abs_sinh);
  p.gamma = p.delta * omega_arg;
  const double var_y = (w - 1.0) * (2.0 * m + w + 1.0) / 2.0;
  p.lambda = std::sqrt(variance / var_y);
  p.xi = mean + p.lambda * std::sqrt(w) * std::sinh(omega_arg);
  return p;
}

JohnsonParams su_fit(double beta1, double beta2, double mean, double variance, int skew_sign) {
  const double w_sym_sq = std::sqrt(2.0 * beta2 - 2.0) - 1.0;
  if (!(w_sym_sq > 0.0)) throw no_fit_error("su_fit: beta2 too small for SU");
  const double w_sym = std::sqrt(w_sym_sq);
  if (w_sym <= 1.0 + 1e-10) return sn_fit(mean, variance);
  if (beta1 < 1e-12) return su_assemble(w_sym, 0.0, mean, variance, skew_sign);

  // upper end: omega of the lognormal with this beta2 (bisection; the curve
  // omega^4 + 2 omega^3 + 3 omega^2 - 3 is increasing)
  double lo = w_sym, hi = std::pow(2.0 * beta2 + 3.0, 0.25) + 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double C = ((mid + 2.0) * mid + 3.0) * mid * mid - 3.0;
    (C < beta2 ? lo : hi) = mid;
  }
  const double w_ln = lo;

  auto g = [&](double w) {
    const double m = su_m_of_omega(w, beta2);
    const double b1 = su_beta1_of(w, m);
    if (std::isnan(b1)) return std::numeric_limits<double>::infinity();
    return b1 - beta1;
  };
  double a = w_sym, b = w_ln;
  double ga = g(a);
  if (ga > 0.0) return su_assemble(w_sym, 0.0, mean, variance, skew_sign);  // beta1 ~ 0
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    const double gm = g(mid);
    if (std::abs(gm) <= kBetaTol * (1.0 + beta1) || (b - a) < 1e-15 * b) {
      return su_assemble(mid, su_m_of_omega(mid, beta2), mean, variance, skew_sign);
    }
    if (std::isinf(gm) || gm > 0.0) b = mid; else { a = mid; ga = gm; }
  }
  const double w = 0.5 * (a + b);
  const double m = su_m_of_omega(w, beta2);
  if (std::isnan(m) || std::abs(su_beta1_of(w, m) - beta1) > 1e-6 * (1.0 + beta1))
    throw no_fit_error("su_fit: omega recursion did not converge");
  return su_assemble(w, m, mean, variance, skew_sign);
}

// ----- SB moment matching --------------------------------------------------

// E[Y^k] for Y = logistic((Z - gamma)/delta), Z standard normal, by composite
// Gauss-Legendre in z. The integrand's sharpest feature has width ~delta, so
// panel count scales with 1/delta.
struct SbMoments {
  double e1, e2, e3, e4;
  double mean, var, skew, beta2;
};

SbMoments sb_moments(double gamma, double delta, bool coarse = false) {
  static const GaussLegendre rule(16);
  // The logistic transition sits at z = gamma with width delta. Quadrature
  // covers gamma +- 54 delta (clipped to +-13 sigma); outside that band y^k
  // is 0 or 1 to beyond double precision, and the upper side contributes the
  // exact normal tail mass. This keeps small delta (near the two-point
  // boundary) as accurate as order-one delta.
  const double band = 54.0 * delta;
  const double lo = std::max(-13.0, gamma - band);
  const double hi = std::min(13.0, gamma + band);
  const long double inv_sqrt_2pi = 0.398942280401432677939946L;
  long double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  if (hi > lo) {
    const double target = std::min(2.0 * delta, 0.15);
    std::size_t panels = static_cast<std::size_t>(std::ceil((hi - lo) / target));
    panels = std::clamp<std::size_t>(panels, 54, 220);
    if (coarse) panels = std::min<std::size_t>(panels, 96);
    const long double h = (hi - lo) / static_cast<long double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const long double mid = lo + h * (static_cast<long double>(p) + 0.5L);
      for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const long double z = mid + 0.5L * h * rule.x[i];
        const long double y = 1.0L / (1.0L + expl(-(z - gamma) / delta));
        const long double wphi = rule.w[i] * inv_sqrt_2pi * expl(-0.5L * z * z) * 0.5L * h;
        const long double y2 = y * y;
        s1 += wphi * y;
        s2 += wphi * y2;
        s3 += wphi * y2 * y;
        s4 += wphi * y2 * y2;
      }
    }
  }
  if (gamma + band < 13.0) {
    const long double tail = 1.0L - (long double)normal_cdf(gamma + band);
    s1 += tail; s2 += tail; s3 += tail; s4 += tail;
  }
  SbMoments m;
  m.e1 = static_cast<double>(s1);
  m.e2 = static_cast<double>(s2);
  m.e3 = static_cast<double>(s3);
  m.e4 = static_cast<double>(s4);
  const long double c2 = s2 - s1 * s1;
  const long double c3 = s3 - 3.0L * s1 * s2 + 2.0L * s1 * s1 * s1;
  const long double c4 = s4 - 4.0L * s1 * s3 + 6.0L * s1 * s1 * s2 - 3.0L * s1 * s1 * s1 * s1;
  m.mean = static_cast<double>(s1);
  m.var = static_cast<double>(c2);
  m.skew = static_cast<double>(c3 / powl(c2, 1.5L));
  m.beta2 = static_cast<double>(c4 / (c2 * c2));
  return m;
}

struct SbSeed {
  double gamma, delta, skew, beta2;
};

const std::vector<SbSeed>& sb_seed_grid() {
  static const std::vector<SbSeed> grid = [] {
    std::vector<SbSeed> g;
    for (double lg = std::log(0.02); lg <= std::log(8.0) + 1e-9; lg += std::log(8.0 / 0.02) / 43.0) {
      const double d = std::exp(lg);
      for (double ga = 0.0; ga <= 6.0 + 1e-9; ga += 0.25) {
        const SbMoments m = sb_moments(ga, d, /*coarse=*/true);
        if (m.var > 1e-14) g.push_back({ga, d, m.skew, m.beta2});
      }
    }
    return g;
  }();
  return grid;
}

JohnsonParams sb_fit(double beta1, double beta2, double mean, double variance, int skew_sign) {
  const double target_skew = std::sqrt(std::max(beta1, 0.0));

  double best = std::numeric_limits<double>::infinity();
  double ga = 0.5, de = 1.0;
  for (const auto& s : sb_seed_grid()) {
    const double ds = (s.skew - target_skew) / (1.0 + target_skew);
    const double db = (s.beta2 - beta2) / (1.0 + beta2);
    const double dist = ds * ds + db * db;
    if (dist < best) { best = dist; ga = s.gamma; de = s.delta; }
  }

  auto residual = [&](double g, double d, SbMoments* out = nullptr) {
    const SbMoments m = sb_moments(g, d);
    if (out) *out = m;
    return std::pair<double, double>(m.skew - target_skew, m.beta2 - beta2);
  };

  SbMoments cur{};
  auto [f1, f2] = residual(ga, de, &cur);
  double fn = f1 * f1 + f2 * f2;
  for (int it = 0; it < kMaxIter; ++it) {
    const double b1_res = std::abs(cur.skew * cur.skew - beta1);
    const double b2_res = std::abs(cur.beta2 - beta2);
    if (b1_res <= kBetaTol * (1.0 + beta1) && b2_res <= kBetaTol * (1.0 + beta2)) {
      JohnsonParams p;
      p.family = JohnsonFamily::SB;
      p.lambda = std::sqrt(variance / cur.var);
      if (skew_sign >= 0) {
        p.gamma = ga;
        p.xi = mean - p.lambda * cur.mean;
      } else {
        p.gamma = -ga;
        p.xi = mean - p.lambda * (1.0 - cur.mean);
      }
      p.delta = de;
      return p;
    }
    // forward-difference Jacobian
    const double hg = 1e-6 * (1.0 + std::abs(ga));
    const double hd = 1e-6 * de;
    const auto [g1a, g2a] = residual(ga + hg, de);
    const auto [d1a, d2a] = residual(ga, de + hd);
    const double j11 = (g1a - f1) / hg, j12 = (d1a - f1) / hd;
    const double j21 = (g2a - f2) / hg, j22 = (d2a - f2) / hd;
    const double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-300) throw no_fit_error("sb_fit: singular Jacobian");
    double step_g = -(j22 * f1 - j12 * f2) / det;
    double step_d = -(-j21 * f1 + j11 * f2) / det;
    // keep delta positive and steps trust-region sized
    step_g = std::clamp(step_g, -2.0 * (1.0 + std::abs(ga)), 2.0 * (1.0 + std::abs(ga)));
    step_d = std::clamp(step_d, -0.6 * de, 2.0 * de);
    double lam = 1.0;
    bool accepted = false;
    for (int halv = 0; halv < 14; ++halv, lam *= 0.5) {
      const double ng = std::max(ga + lam * step_g, 0.0);
      const double nd = std::max(de + lam * step_d, 1e-4);
      SbMoments nm{};
      const auto [n1, n2] = residual(ng, nd, &nm);
      const double nfn = n1 * n1 + n2 * n2;
      if (nfn < fn) {
        ga = ng; de = nd; f1 = n1; f2 = n2; fn = nfn; cur = nm;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw no_fit_error("sb_fit: damped Newton stalled");
  }
  throw no_fit_error("sb_fit: no convergence within iteration budget");
}

JohnsonParams sl_fit(double beta1, double mean, double variance, int skew_sign) {
  if (skew_sign < 0)
    throw no_fit_error("sl_fit: negative-skew lognormal band is not representable");
  const double w = lognormal_omega(beta1);
  if (w <= 1.0 + 1e-12) return sn_fit(mean, variance);
  JohnsonParams p;
  p.family = JohnsonFamily::SL;
  p.lambda = 1.0;
  p.delta = 1.0 / std::sqrt(std::log(w));
  const double c = std::sqrt(variance / (w * (w - 1.0)));  // e^{-gamma/delta}
  p.gamma = -p.delta * std::log(c);
  p.xi = mean - c * std::sqrt(w);
  return p;
}

}  // namespace

const char* to_string(JohnsonFamily f) {
  switch (f) {
    case JohnsonFamily::SL: return "SL";
    case JohnsonFamily::SB: return "SB";
    case JohnsonFamily::SU: return "SU";
    case JohnsonFamily::SN: return "SN";
  }
  return "SN";
}

MomentSet central_from_raw(double r1, double r2, double r3, double r4) {
  MomentSet m;
  m.r1 = r1; m.r2 = r2; m.r3 = r3; m.r4 = r4;
  const long double m1 = r1;
  const long double cm2 = r2 - m1 * m1;
  const long double cm3 = r3 - 3.0L * m1 * r2 + 2.0L * m1 * m1 * m1;
  const long double cm4 = r4 - 4.0L * m1 * r3 + 6.0L * m1 * m1 * r2 - 3.0L * m1 * m1 * m1 * m1;
  const long double floor = 1e-12L * std::max<long double>(std::abs((long double)r2), 1e-300L);
  if (!(cm2 > floor)) throw std::domain_error("central_from_raw: degenerate second moment");
  m.cm2 = static_cast<double>(cm2);
  m.cm3 = static_cast<double>(cm3);
  m.cm4 = static_cast<double>(cm4);
  m.beta1 = static_cast<double>(cm3 * cm3 / (cm2 * cm2 * cm2));
  m.beta2 = static_cast<double>(cm4 / (cm2 * cm2));
  const long double skew_floor = 1e-12L * powl(cm2, 1.5L);
  m.skew_sign = cm3 > skew_floor ? 1 : (cm3 < -skew_floor ? -1 : 0);
  return m;
}

MomentSet moment_set_from_sample(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::domain_error("moment_set_from_sample: need at least two values");
  long double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (double x : xs) {
    const long double v = x;
    s1 += v; s2 += v * v; s3 += v * v * v; s4 += v * v * v * v;
  }
  const long double n = static_cast<long double>(xs.size());
  return central_from_raw(static_cast<double>(s1 / n), static_cast<double>(s2 / n),
                          static_cast<double>(s3 / n), static_cast<double>(s4 / n));
}

double fifth_central_from_raw(double r1, double r2, double r3, double r4, double r5) {
  const long double m1 = r1;
  const long double cm2 = r2 - m1 * m1;
  const long double cm5 = r5 - 5.0L * m1 * r4 + 10.0L * m1 * m1 * r3 -
                          10.0L * m1 * m1 * m1 * r2 + 4.0L * m1 * m1 * m1 * m1 * m1;
  if (!(cm2 > 0.0L)) throw std::domain_error("fifth_central_from_raw: degenerate second moment");
  return static_cast<double>(cm5 / powl(cm2, 2.5L));
}

BetaValidity validate_beta(double beta1, double beta2) {
  if (!(beta1 >= 0.0) || std::isnan(beta2)) return BetaValidity::Invalid;
  return beta2 >= beta1 + 1.0 ? BetaValidity::Valid : BetaValidity::Invalid;
}

BetaValidity validate_beta(const MomentSet& m) { return validate_beta(m.beta1, m.beta2); }

std::pair<double, double> project_beta(double beta1, double beta2) {
  const double t = std::max(0.5 * (beta1 + beta2 - 1.0), 0.0);
  return {t, t + 1.0};
}

double lognormal_line(double beta1) {
  const double w = lognormal_omega(beta1);
  return ((w + 2.0) * w + 3.0) * w * w - 3.0;
}

JohnsonParams fit_moments(const MomentSet& m) {
  if (validate_beta(m) == BetaValidity::Invalid)
    throw std::invalid_argument("fit_moments: infeasible (beta1, beta2); project first");
  if (!(m.cm2 > 0.0)) throw std::domain_error("fit_moments: degenerate variance");
  const double mean = m.r1, var = m.cm2;

  if (m.beta1 < kSnBeta1Gate && std::abs(m.beta2 - 3.0) < kSnBeta2Gate)
    return sn_fit(mean, var);

  const double line = lognormal_line(m.beta1);
  if (std::abs(m.beta2 - line) < kSlBand) {
    if (m.beta1 < 1e-12) {
      if (m.beta2 > 3.0 + 1e-9) return su_fit(m.beta1, m.beta2, mean, var, m.skew_sign);
      if (m.beta2 < 3.0 - 1e-9) return sb_fit(m.beta1, m.beta2, mean, var, m.skew_sign);
      return sn_fit(mean, var);
    }
    if (m.skew_sign >= 0) return sl_fit(m.beta1, mean, var, m.skew_sign);
    // mirrored lognormal band: hand to the adjacent family solver
    if (m.beta2 >= line) return su_fit(m.beta1, m.beta2, mean, var, m.skew_sign);
    return sb_fit(m.beta1, m.beta2, mean, var, m.skew_sign);
  }
  if (m.beta2 > line) return su_fit(m.beta1, m.beta2, mean, var, m.skew_sign);
  return sb_fit(m.beta1, m.beta2, mean, var, m.skew_sign);
}

JohnsonParams fit_percentiles(double q_m3z, double q_m1z, double q_p1z, double q_p3z, double z) {
  if (!(z > 0.0)) throw std::domain_error("fit_percentiles: z must be positive");
  const double m = q_p3z - q_p1z;
  const double n = q_m1z - q_m3z;
  const double p = q_p1z - q_m1z;
  if (!(m > 0.0) || !(n > 0.0) || !(p > 0.0))
    throw std::domain_error("fit_percentiles: degenerate sample (non-positive spread)");
  const double d = m * n / (p * p);
  const double mid = 0.5 * (q_p1z + q_m1z);

  if (d > 1.001) {
    const double mp = m / p, np = n / p;
    JohnsonParams out;
    out.family = JohnsonFamily::SU;
    out.delta = 2.0 * z / std::acosh(0.5 * (mp + np));
    out.gamma = out.delta * std::asinh((np - mp) / (2.0 * std::sqrt(mp * np - 1.0)));
    out.lambda = 2.0 * p * std::sqrt(mp * np - 1.0) /
                 ((mp + np - 2.0) * std::sqrt(mp + np + 2.0));
    out.xi = mid + p * (np - mp) / (2.0 * (mp + np - 2.0));
    return out;
  }
  if (d < 0.999) {
    const double pm = p / m, pn = p / n;
    const double prod = (1.0 + pm) * (1.0 + pn);
    JohnsonParams out;
    out.family = JohnsonFamily::SB;
    out.delta = z / std::acosh(0.5 * std::sqrt(prod));
    out.gamma = out.delta * std::asinh((pn - pm) * std::sqrt(prod - 4.0) / (2.0 * (pm * pn - 1.0)));
    out.lambda = p * std::sqrt((prod - 2.0) * (prod - 2.0) - 4.0) / (pm * pn - 1.0);
    out.xi = mid - 0.5 * out.lambda + p * (pn - pm) / (2.0 * (pm * pn - 1.0));
    return out;
  }
  // SL: d ~ 1; m = n = p exactly is the normal limit
  const double r = m / p;
  if (std::abs(r - 1.0) < 1e-7 || r < 1.0) {
    const double sd = p / (2.0 * z);
    return sn_fit(mid, sd * sd);
  }
  JohnsonParams out;
  out.family = JohnsonFamily::SL;
  out.lambda = 1.0;
  out.delta = 2.0 * z / std::log(r);
  out.gamma = out.delta * std::log((r - 1.0) / (p * std::sqrt(r)));
  out.xi = mid - 0.5 * p * (r + 1.0) / (r - 1.0);
  return out;
}

double johnson_quantile(const JohnsonParams& p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("johnson_quantile: alpha outside (0,1)");
  const double z = normal_quantile(alpha);
  const double u = (z - p.gamma) / p.delta;
  switch (p.family) {
    case JohnsonFamily::SN: return p.xi + p.lambda * u;
    case JohnsonFamily::SL: return p.xi + std::exp(u);
    case JohnsonFamily::SB: return p.xi + p.lambda / (1.0 + std::exp(-u));
    case JohnsonFamily::SU: return p.xi + p.lambda * std::sinh(u);
  }
  return p.xi;
}

double johnson_cdf(const JohnsonParams& p, double x) {
  const double y = (x - p.xi) / p.lambda;
  switch (p.family) {
    case JohnsonFamily::SN: return normal_cdf(p.gamma + p.delta * y);
    case JohnsonFamily::SL:
      if (x <= p.xi) return 0.0;
      return normal_cdf(p.gamma + p.delta * std::log(x - p.xi));
    case JohnsonFamily::SB:
      if (y <= 0.0) return 0.0;
      if (y >= 1.0) return 1.0;
      return normal_cdf(p.gamma + p.delta * std::log(y / (1.0 - y)));
    case JohnsonFamily::SU: return normal_cdf(p.gamma + p.delta * std::asinh(y));
  }
  return 0.0;
}

double johnson_pdf(const JohnsonParams& p, double x) {
  const double y = (x - p.xi) / p.lambda;
  switch (p.family) {
    case JohnsonFamily::SN:
      return normal_pdf(p.gamma + p.delta * y) * p.delta / p.lambda;
    case JohnsonFamily::SL: {
      if (x <= p.xi) return 0.0;
      const double z = p.gamma + p.delta * std::log(x - p.xi);
      return normal_pdf(z) * p.delta / (x - p.xi);
    }
    case JohnsonFamily::SB: {
      if (y <= 0.0 || y >= 1.0) return 0.0;
      const double z = p.gamma + p.delta * std::log(y / (1.0 - y));
      return normal_pdf(z) * p.delta / (p.lambda * y * (1.0 - y));
    }
    case JohnsonFamily::SU: {
      const double z = p.gamma + p.delta * std::asinh(y);
      return normal_pdf(z) * p.delta / (p.lambda * std::sqrt(y * y + 1.0));
    }
  }
  return 0.0;
}

DistMoments johnson_moments(const JohnsonParams& p) {
  DistMoments out;
  switch (p.family) {
    case JohnsonFamily::SN: {
      out.mean = p.xi + p.lambda * (-p.gamma) / p.delta;
      out.variance = p.lambda * p.lambda / (p.delta * p.delta);
      out.skew = 0.0;
      out.kurtosis = 3.0;
      return out;
    }
    case JohnsonFamily::SL: {
      const double w = std::exp(1.0 / (p.delta * p.delta));
      const double c = std::exp(-p.gamma / p.delta);
      out.mean = p.xi + c * std::sqrt(w);
      out.variance = c * c * w * (w - 1.0);
      out.skew = (w + 2.0) * std::sqrt(w - 1.0);
      out.kurtosis = ((w + 2.0) * w + 3.0) * w * w - 3.0;
      return out;
    }
    case JohnsonFamily::SU: {
      const double w = std::exp(1.0 / (p.delta * p.delta));
      const double om = p.gamma / p.delta;
      const double sw = std::sqrt(w);
      const double s1 = std::sinh(om), s3 = std::sinh(3.0 * om);
      const double c2 = std::cosh(2.0 * om), c4 = std::cosh(4.0 * om);
      const double wm1 = w - 1.0;
      out.mean = p.xi - p.lambda * sw * s1;
      const double var_y = 0.5 * wm1 * (w * c2 + 1.0);
      out.variance = p.lambda * p.lambda * var_y;
      const double mu3 = -0.25 * sw * wm1 * wm1 * (w * (w + 2.0) * s3 + 3.0 * s1);
      out.skew = mu3 / std::pow(var_y, 1.5);
      const double C = ((w + 2.0) * w + 3.0) * w * w - 3.0;
      const double mu4 =
          0.125 * wm1 * wm1 *
          (w * w * C * c4 + 4.0 * w * w * (w + 2.0) * c2 + 3.0 * (2.0 * w + 1.0));
      out.kurtosis = mu4 / (var_y * var_y);
      return out;
    }
    case JohnsonFamily::SB: {
      const SbMoments m = sb_moments(std::abs(p.gamma), p.delta);
      const bool mirrored = p.gamma < 0.0;
      out.mean = mirrored ? p.xi + p.lambda * (1.0 - m.mean) : p.xi + p.lambda * m.mean;
      out.variance = p.lambda * p.lambda * m.var;
      out.skew = mirrored ? -m.skew : m.skew;
      out.kurtosis = m.beta2;
      return out;
    }
  }
  return out;
}

double cornish_fisher_quantile(double alpha, double k3, double k4, double k5) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("cornish_fisher_quantile: alpha outside (0,1)");
  const double z = normal_quantile(alpha);
  const double z2 = z * z, z3 = z2 * z, z4 = z2 * z2;
  return z + k3 * (z2 - 1.0) / 6.0 + k4 * (z3 - 3.0 * z) / 24.0 -
         k3 * k3 * (2.0 * z3 - 5.0 * z) / 36.0 + k5 * (z4 - 6.0 * z2 + 3.0) / 120.0 -
         k3 * k4 * (z4 - 5.0 * z2 + 2.0) / 24.0 +
         k3 * k3 * k3 * (12.0 * z4 - 53.0 * z2 + 17.0) / 324.0;
}

}  // namespace fvar
