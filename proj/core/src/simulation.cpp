#include "fvar/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fvar/math.hpp"

namespace fvar {

namespace {

constexpr double kTimeTol = 1e-9;

double apply_rule(double amount, InclusionRule rule) {
  switch (rule) {
    case InclusionRule::Full: return amount;
    case InclusionRule::None: return 0.0;
    case InclusionRule::PositiveOnly: return std::max(amount, 0.0);
    case InclusionRule::NegativeOnly: return std::min(amount, 0.0);
  }
  return amount;
}

// Exact OU transition of (x, I) with I = int x ds, shared per step size.
struct OuStep {
  double e1 = 0.0;   // E[x'|x] multiplier
  double bh = 0.0;   // E[dI|x] multiplier
  double c11 = 0.0;  // chol of [Var x', Cov; Cov, Var dI]
  double c21 = 0.0;
  double c22 = 0.0;

  OuStep(const G1ppParams& p, double h) {
    const double a = p.mean_reversion;
    if (a > 1e-12) {
      e1 = std::exp(-a * h);
      bh = -std::expm1(-a * h) / a;
      const double vx = p.sigma * p.sigma * -std::expm1(-2.0 * a * h) / (2.0 * a);
      const double vi = p.sigma * p.sigma / (a * a) *
                        (h - 2.0 * bh + -std::expm1(-2.0 * a * h) / (2.0 * a));
      const double cov = 0.5 * p.sigma * p.sigma * bh * bh;
      c11 = std::sqrt(vx);
      c21 = c11 > 0.0 ? cov / c11 : 0.0;
      c22 = std::sqrt(std::max(vi - c21 * c21, 0.0));
    } else {
      e1 = 1.0;
      bh = h;
      const double vx = p.sigma * p.sigma * h;
      const double vi = p.sigma * p.sigma * h * h * h / 3.0;
      const double cov = 0.5 * p.sigma * p.sigma * h * h;
      c11 = std::sqrt(vx);
      c21 = c11 > 0.0 ? cov / c11 : 0.0;
      c22 = std::sqrt(std::max(vi - c21 * c21, 0.0));
    }
  }

  void advance(double& x, double& di, KeyedRng& rng) const {
    const double z1 = rng.next_normal();
    const double z2 = rng.next_normal();
    di = x * bh + c21 * z1 + c22 * z2;
    x = x * e1 + c11 * z1;
  }
};

// Flattened call legs with per-draw constants for one valuation time.
struct LegGrid {
  struct Leg {
    double qty, strike, dfq, dfd, s, logk;
  };
  std::vector<Leg> legs;
  bool at_expiry = false;

  LegGrid(const Instrument& inst, const GbmParams& g, double tau) {
    std::vector<std::pair<double, double>> raw;
    if (const auto* c = std::get_if<EuropeanCall>(&inst)) raw = {{1.0, c->strike}};
    else if (const auto* c = std::get_if<FxCall>(&inst)) raw = {{1.0, c->strike}};
    else if (const auto* c = std::get_if<CallCombination>(&inst)) raw = c->legs;
    else throw std::invalid_argument("LegGrid: not a Black-Scholes instrument");
    at_expiry = tau <= kTimeTol || g.sigma * std::sqrt(std::max(tau, 0.0)) < 1e-12;
    for (auto [q, k] : raw) {
      Leg leg;
      leg.qty = q;
      leg.strike = k;
      leg.dfq = std::exp(-g.rate_fgn * tau);
      leg.dfd = std::exp(-g.rate_dom * tau);
      leg.s = g.sigma * std::sqrt(std::max(tau, 0.0));
      leg.logk = std::log(k * leg.dfd);
      legs.push_back(leg);
    }
  }

  double value(double spot) const {
    double v = 0.0;
    if (at_expiry) {
      for (const auto& l : legs) v += l.qty * std::max(spot * l.dfq - l.strike * l.dfd, 0.0);
      return v;
    }
    const double ls = std::log(spot);
    for (const auto& l : legs) {
      const double d1 = (ls + std::log(l.dfq) - l.logk) / l.s + 0.5 * l.s;
      v += l.qty * (spot * l.dfq * normal_cdf(d1) - l.strike * l.dfd * normal_cdf(d1 - l.s));
    }
    return v;
  }
};

}  // namespace

const char* to_string(InclusionRule rule) {
  switch (rule) {
    case InclusionRule::Full: return "full";
    case InclusionRule::None: return "none";
    case InclusionRule::PositiveOnly: return "positive_only";
    case InclusionRule::NegativeOnly: return "negative_only";
  }
  return "full";
}

InclusionRule inclusion_rule_from_string(const std::string& s) {
  if (s == "full") return InclusionRule::Full;
  if (s == "none") return InclusionRule::None;
  if (s == "positive_only") return InclusionRule::PositiveOnly;
  if (s == "negative_only") return InclusionRule::NegativeOnly;
  throw std::invalid_argument("unknown inclusion rule: " + s);
}

std::size_t OuterPathSet::time_index(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t - kTimeTol);
  if (it == times.end() || std::abs(*it - t) > kTimeTol)
    throw std::out_of_range("time " + std::to_string(t) + " is not on the simulation grid");
  return static_cast<std::size_t>(it - times.begin());
}

std::vector<double> build_time_grid(const Instrument& inst, double delta) {
  if (!(delta > 0.0)) throw std::domain_error("build_time_grid: delta must be positive");
  const double T = instrument_maturity(inst);
  const long n = std::lround(T / delta);
  if (n < 1 || std::abs(static_cast<double>(n) * delta - T) > kTimeTol)
    throw std::domain_error("build_time_grid: maturity must be an integral number of MPoR steps");
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n) + 8);
  for (long i = 0; i <= n; ++i) times.push_back(static_cast<double>(i) * delta);
  for (double u : cashflow_times(inst, 0.0, T + kTimeTol)) times.push_back(u);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < kTimeTol; }),
              times.end());
  return times;
}

OuterPathSet simulate_outer(const Model& model, const Instrument& inst, std::size_t n_paths,
                            std::vector<double> times, std::uint64_t seed) {
  if (n_paths == 0) throw std::domain_error("simulate_outer: need at least one path");
  if (times.size() < 2 || times.front() != 0.0)
    throw std::domain_error("simulate_outer: grid must start at 0 and hold at least two points");

  OuterPathSet out;
  out.model = model;
  out.inst = inst;
  out.seed = seed;
  out.times = std::move(times);
  out.n_paths = n_paths;
  const std::size_t nt = out.times.size();
  out.states.resize(n_paths * nt);
  out.values.resize(n_paths * nt);
  out.deflators.resize(n_paths * nt);
  out.cashflow_events.resize(n_paths);

  const double T = instrument_maturity(inst);
  const double horizon = T + 1e-6;  // half-open event windows: keep flows dated exactly T
  const std::vector<double> events = cashflow_times(inst, 0.0, horizon);
  std::vector<std::size_t> event_idx;
  event_idx.reserve(events.size());

  if (const auto* gbm = std::get_if<GbmParams>(&model)) {
    std::vector<double> drift(nt - 1), vol(nt - 1);
    for (std::size_t j = 0; j + 1 < nt; ++j) {
      const double h = out.times[j + 1] - out.times[j];
      drift[j] = (gbm->rate_dom - gbm->rate_fgn - 0.5 * gbm->sigma * gbm->sigma) * h;
      vol[j] = gbm->sigma * std::sqrt(h);
    }
    std::vector<LegGrid> val(nt, LegGrid(inst, *gbm, 0.0));
    for (std::size_t j = 0; j < nt; ++j) val[j] = LegGrid(inst, *gbm, T - out.times[j]);
    for (std::size_t m = 0; m < n_paths; ++m) {
      KeyedRng rng(seed, m, StreamPurpose::Outer);
      double s = gbm->spot0;
      for (std::size_t j = 0; j < nt; ++j) {
        if (j > 0) s *= std::exp(drift[j - 1] + vol[j - 1] * rng.next_normal());
        const double defl = std::exp(-gbm->rate_dom * out.times[j]);
        out.states[m * nt + j] = s;
        out.deflators[m * nt + j] = defl;
        out.values[m * nt + j] = defl * val[j].value(s);
      }
    }
  } else {
    const auto& g1 = std::get<G1ppParams>(model);
    std::vector<OuStep> steps;
    steps.reserve(nt - 1);
    for (std::size_t j = 0; j + 1 < nt; ++j)
      steps.emplace_back(g1, out.times[j + 1] - out.times[j]);
    for (std::size_t m = 0; m < n_paths; ++m) {
      KeyedRng rng(seed, m, StreamPurpose::Outer);
      double x = 0.0, intx = 0.0;
      for (std::size_t j = 0; j < nt; ++j) {
        if (j > 0) {
          double di = 0.0;
          steps[j - 1].advance(x, di, rng);
          intx += di;
        }
        const double defl = std::exp(-g1.flat_rate * out.times[j] - intx);
        out.states[m * nt + j] = x;
        out.deflators[m * nt + j] = defl;
        out.values[m * nt + j] = defl * portfolio_value(inst, model, out.times[j], x);
      }
    }
  }

  for (double u : events) event_idx.push_back(out.time_index(u));
  for (std::size_t m = 0; m < n_paths; ++m) {
    auto state_at = [&](double u) { return out.state(m, out.time_index(u)); };
    auto flows = cashflows_in_window(inst, model, 0.0, horizon, state_at);
    for (std::size_t e = 0; e < flows.size(); ++e)
      flows[e].amount *= out.deflator(m, event_idx[e]);
    out.cashflow_events[m] = std::move(flows);
  }
  return out;
}

DeltaVCross delta_v(const OuterPathSet& outer, std::size_t t_index, double delta,
                    InclusionRule rule) {
  if (t_index >= outer.times.size()) throw std::out_of_range("delta_v: t_index out of range");
  const double t = outer.times[t_index];
  const std::size_t j2 = outer.time_index(t + delta);
  const std::size_t nt = outer.times.size();

  DeltaVCross cross;
  cross.t_index = t_index;
  cross.t = t;
  cross.delta = delta;
  cross.rule = rule;
  cross.x.resize(outer.n_paths);
  cross.v.resize(outer.n_paths);
  cross.dv.resize(outer.n_paths);
  cross.defl.resize(outer.n_paths);
  for (std::size_t m = 0; m < outer.n_paths; ++m) {
    double dv = outer.values[m * nt + j2] - outer.values[m * nt + t_index];
    for (const auto& cf : outer.cashflow_events[m]) {
      if (cf.time < t - kTimeTol) continue;
      if (cf.time >= t + delta - kTimeTol) break;
      dv += apply_rule(cf.amount, rule);
    }
    cross.x[m] = outer.states[m * nt + t_index];
    cross.v[m] = outer.values[m * nt + t_index];
    cross.dv[m] = dv;
    cross.defl[m] = outer.deflators[m * nt + t_index];
  }
  return cross;
}

double empirical_quantile(std::vector<double> xs, double alpha) {
  if (xs.empty()) throw std::domain_error("empirical_quantile: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("empirical_quantile: alpha outside (0,1)");
  const std::size_t n = xs.size();
  const double h = static_cast<double>(n - 1) * alpha;
  const std::size_t i = static_cast<std::size_t>(h);
  const double g = h - static_cast<double>(i);
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(i), xs.end());
  const double lo = xs[i];
  if (g <= 0.0 || i + 1 >= n) return lo;
  const double hi = *std::min_element(xs.begin() + static_cast<std::ptrdiff_t>(i) + 1, xs.end());
  return lo + g * (hi - lo);
}

InnerSampleSet simulate_inner(const Model& model, const Instrument& inst, const Anchor& anchor,
                              std::size_t n_inner, double delta, InclusionRule rule,
                              KeyedRng& rng) {
  if (n_inner == 0) throw std::domain_error("simulate_inner: need at least one sample");
  InnerSampleSet set;
  set.origin = InnerSampleSet::Origin::Model;
  set.t = anchor.t;
  set.x = anchor.x;
  set.dv.resize(n_inner);

  if (const auto* gbm = std::get_if<GbmParams>(&model)) {
    const double T = instrument_maturity(inst);
    if (anchor.t + delta > T + kTimeTol)
      throw std::domain_error("simulate_inner: window extends past maturity");
    const LegGrid val_t(inst, *gbm, T - anchor.t);
    const LegGrid val_h(inst, *gbm, T - anchor.t - delta);
    const double v0 = val_t.value(anchor.x);
    const double disc = std::exp(-gbm->rate_dom * delta);
    const double drift = (gbm->rate_dom - gbm->rate_fgn - 0.5 * gbm->sigma * gbm->sigma) * delta;
    const double vol = gbm->sigma * std::sqrt(delta);
    for (std::size_t i = 0; i < n_inner; ++i) {
      const double s = anchor.x * std::exp(drift + vol * rng.next_normal());
      set.dv[i] = disc * val_h.value(s) - v0;
    }
    return set;
  }

  const auto& g1 = std::get<G1ppParams>(model);
  const double v0 = portfolio_value(inst, model, anchor.t, anchor.x);
  // segment the window at event dates; flows are booked where they occur
  std::vector<double> marks = cashflow_times(inst, anchor.t, anchor.t + delta);
  std::vector<double> seg_ends = marks;
  seg_ends.push_back(anchor.t + delta);
  std::vector<OuStep> steps;
  double prev = anchor.t;
  for (double u : seg_ends) {
    if (u > prev + kTimeTol) steps.emplace_back(g1, u - prev);
    prev = u;
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    double x = anchor.x, logd = 0.0, flows = 0.0;
    std::size_t si = 0;
    prev = anchor.t;
    auto book = [&](double u) {
      auto cfs = cashflows_in_window(inst, model, u, u + 1e-8, [&](double) { return x; });
      for (const auto& cf : cfs) flows += apply_rule(cf.amount * std::exp(logd), rule);
    };
    for (double u : marks) {
      if (u > prev + kTimeTol) {
        double di = 0.0;
        steps[si++].advance(x, di, rng);
        logd -= g1.flat_rate * (u - prev) + di;
        prev = u;
      }
      book(u);
    }
    if (anchor.t + delta > prev + kTimeTol) {
      double di = 0.0;
      steps[si++].advance(x, di, rng);
      logd -= g1.flat_rate * (anchor.t + delta - prev) + di;
    }
    set.dv[i] =
        std::exp(logd) * portfolio_value(inst, model, anchor.t + delta, x) + flows - v0;
  }
  return set;
}

const char* to_string(PseudoKey key) { return key == PseudoKey::ByX ? "x" : "v"; }

PseudoKey pseudo_key_from_string(const std::string& s) {
  if (s == "x") return PseudoKey::ByX;
  if (s == "v") return PseudoKey::ByV;
  throw std::invalid_argument("unknown pseudo key: " + s);
}

SortedKeyView::SortedKeyView(const DeltaVCross& c, PseudoKey k) : cross(&c), key(k) {
  const std::size_t n = c.size();
  order.resize(n);
  rank_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::vector<double>& keys = (k == PseudoKey::ByX) ? c.x : c.v;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
  });
  for (std::size_t r = 0; r < n; ++r) rank_of[order[r]] = r;
}

double SortedKeyView::key_value(std::size_t path) const {
  return (key == PseudoKey::ByX) ? cross->x[path] : cross->v[path];
}

std::pair<std::size_t, std::size_t> SortedKeyView::window(std::size_t anchor_rank,
                                                          std::size_t k) const {
  const std::size_t n = order.size();
  if (k == 0 || k > n) throw std::domain_error("pseudo window: k must be in [1, n]");
  const double ak = key_value(order[anchor_rank]);
  std::size_t lo = anchor_rank, hi = anchor_rank;
  while (hi - lo + 1 < k) {
    const bool has_l = lo > 0, has_r = hi + 1 < n;
    if (!has_l) { ++hi; continue; }
    if (!has_r) { --lo; continue; }
    const double dl = ak - key_value(order[lo - 1]);
    const double dr = key_value(order[hi + 1]) - ak;
    if (dl < dr || (dl == dr && order[lo - 1] < order[hi + 1])) --lo; else ++hi;
  }
  return {lo, hi};
}

InnerSampleSet pseudo_inner(const SortedKeyView& view, std::size_t anchor_path, std::size_t k) {
  const DeltaVCross& c = *view.cross;
  const auto [lo, hi] = view.window(view.rank_of[anchor_path], k);
  InnerSampleSet set;
  set.origin = InnerSampleSet::Origin::Pseudo;
  set.t = c.t;
  set.x = c.x[anchor_path];
  set.dv.reserve(hi - lo + 1);
  const double ak = view.key_value(anchor_path);
  double width = 0.0;
  for (std::size_t r = lo; r <= hi; ++r) {
    set.dv.push_back(c.dv[view.order[r]]);
    width = std::max(width, std::abs(view.key_value(view.order[r]) - ak));
  }
  set.half_width = width;
  return set;
}

InnerSampleSet pseudo_inner(const DeltaVCross& cross, std::size_t anchor_path, PseudoKey key,
                            std::size_t k) {
  SortedKeyView view(cross, key);
  return pseudo_inner(view, anchor_path, k);
}

}  // namespace fvar
