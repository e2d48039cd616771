#include "fvar/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fvar/math.hpp"

namespace fvar {

namespace {

constexpr double kDateTol = 1e-9;

const IrSwap* as_swap(const Instrument& inst) { return std::get_if<IrSwap>(&inst); }

// Notional applying to a flow dated u: the schedule entry with the smallest
// year >= u (years cover (year-1, year]).
double notional_at(const IrSwap& sw, double u) {
  for (const auto& [year, amount] : sw.notional_schedule)
    if (u <= year + kDateTol) return amount;
  if (!sw.notional_schedule.empty()) return sw.notional_schedule.back().second;
  throw std::invalid_argument("IrSwap: empty notional schedule");
}

struct BsView {
  std::vector<std::pair<double, double>> legs;  // (qty, strike)
  double maturity;
  const GbmParams* gbm;
};

BsView bs_view(const Instrument& inst, const Model& model) {
  const auto* gbm = std::get_if<GbmParams>(&model);
  if (!gbm) throw std::invalid_argument("BS instrument requires a GBM model");
  if (const auto* c = std::get_if<EuropeanCall>(&inst))
    return {{{1.0, c->strike}}, c->maturity, gbm};
  if (const auto* c = std::get_if<FxCall>(&inst))
    return {{{1.0, c->strike}}, c->maturity, gbm};
  if (const auto* c = std::get_if<CallCombination>(&inst))
    return {c->legs, c->maturity, gbm};
  throw std::invalid_argument("instrument has no Black-Scholes representation");
}

double swap_value(const IrSwap& sw, const G1ppParams& g1, double t, double x) {
  // Outstanding = flows dated >= t. Floating coupons are realized at their
  // fixing dates, so a period is outstanding while its fixing is >= t; its
  // PV is N*(P(t,Ts) - P(t,Te)*(1 - tau*spread)), which collapses to the
  // booked amount when t equals the fixing date.
  double v = 0.0;
  const long nf = std::lround(sw.maturity / sw.float_period);
  for (long i = 1; i <= nf; ++i) {
    const double ts = static_cast<double>(i - 1) * sw.float_period;
    const double te = static_cast<double>(i) * sw.float_period;
    if (ts < t - kDateTol) continue;
    const double n = notional_at(sw, te);
    const double ps = g1pp_bond_price(g1, t, ts, x);
    const double pe = g1pp_bond_price(g1, t, te, x);
    v += n * (ps - pe * (1.0 - sw.float_period * sw.spread));
  }
  const long nx = std::lround(sw.maturity / sw.fixed_period);
  for (long k = 1; k <= nx; ++k) {
    const double tp = static_cast<double>(k) * sw.fixed_period;
    if (tp < t - kDateTol) continue;
    v -= notional_at(sw, tp) * sw.fixed_period * sw.fixed_rate *
         g1pp_bond_price(g1, t, tp, x);
  }
  return v;
}

}  // namespace

double instrument_maturity(const Instrument& inst) {
  return std::visit([](const auto& i) { return i.maturity; }, inst);
}

std::string instrument_name(const Instrument& inst) {
  if (std::holds_alternative<EuropeanCall>(inst)) return "european_call";
  if (std::holds_alternative<CallCombination>(inst)) return "call_combination";
  if (std::holds_alternative<FxCall>(inst)) return "fx_call";
  return "ir_swap";
}

double bs_price(double spot, double strike, double rate_dom, double rate_fgn,
                double sigma, double tau) {
  if (!(spot > 0.0) || !(strike > 0.0)) throw std::domain_error("bs_price: spot/strike must be positive");
  if (sigma < 0.0 || tau < 0.0) throw std::domain_error("bs_price: sigma/tau must be non-negative");
  if (tau == 0.0) return std::max(spot - strike, 0.0);
  const double fwd = spot * std::exp(-rate_fgn * tau);
  const double kd = strike * std::exp(-rate_dom * tau);
  const double s = sigma * std::sqrt(tau);
  if (s < 1e-12) return std::max(fwd - kd, 0.0);
  const double d1 = std::log(fwd / kd) / s + 0.5 * s;
  return fwd * normal_cdf(d1) - kd * normal_cdf(d1 - s);
}

Greeks greeks(const Instrument& inst, const Model& model, double t, double state) {
  if (as_swap(inst))
    throw std::invalid_argument("greeks: cash sensitivities are defined for the Black-Scholes instruments only");
  const BsView view = bs_view(inst, model);
  const double tau = view.maturity - t;
  if (!(tau > 0.0)) throw std::domain_error("greeks: need t < maturity");
  if (!(state > 0.0)) throw std::domain_error("greeks: spot must be positive");
  const double s = view.gbm->sigma * std::sqrt(tau);
  if (s < 1e-12) throw std::domain_error("greeks: vanishing total volatility");
  const double dfq = std::exp(-view.gbm->rate_fgn * tau);
  Greeks g;
  for (const auto& [qty, k] : view.legs) {
    const double d1 =
        std::log(state * dfq / (k * std::exp(-view.gbm->rate_dom * tau))) / s + 0.5 * s;
    g.delta_cash += qty * state * dfq * normal_cdf(d1);
    g.gamma_cash += qty * state * dfq * normal_pdf(d1) / s;
  }
  return g;
}

double g1pp_bond_price(const G1ppParams& p, double t, double T, double x) {
  if (T < t - kDateTol) throw std::domain_error("g1pp_bond_price: need T >= t");
  const double a = p.mean_reversion;
  const double tau = std::max(T - t, 0.0);
  auto B = [a](double u) { return a > 1e-12 ? -std::expm1(-a * u) / a : u; };
  // V(t,T) = Var[ int_t^T x_s ds | x_t ]
  auto V = [&](double u) {
    if (a <= 1e-12) return p.sigma * p.sigma * u * u * u / 3.0;
    return p.sigma * p.sigma / (a * a) *
           (u - 2.0 * B(u) + -std::expm1(-2.0 * a * u) / (2.0 * a));
  };
  const double lnA = -p.flat_rate * tau + 0.5 * (V(tau) - V(T) + V(t));
  return std::exp(lnA - B(tau) * x);
}

double portfolio_value(const Instrument& inst, const Model& model, double t, double state) {
  if (const auto* sw = as_swap(inst)) {
    const auto* g1 = std::get_if<G1ppParams>(&model);
    if (!g1) throw std::invalid_argument("IrSwap requires a G1++ model");
    return swap_value(*sw, *g1, t, state);
  }
  const BsView view = bs_view(inst, model);
  const double tau = view.maturity - t;
  if (tau < -kDateTol) throw std::domain_error("portfolio_value: t beyond maturity");
  double v = 0.0;
  for (const auto& [qty, k] : view.legs)
    v += qty * bs_price(state, k, view.gbm->rate_dom, view.gbm->rate_fgn,
                        view.gbm->sigma, std::max(tau, 0.0));
  return v;
}

std::vector<double> cashflow_times(const Instrument& inst, double t0, double t1) {
  std::vector<double> out;
  if (const auto* sw = as_swap(inst)) {
    const long nf = std::lround(sw->maturity / sw->float_period);
    for (long i = 0; i < nf; ++i) {
      const double u = static_cast<double>(i) * sw->float_period;  // fixing date
      if (u >= t0 - kDateTol && u < t1 - kDateTol) out.push_back(u);
    }
    const long nx = std::lround(sw->maturity / sw->fixed_period);
    for (long k = 1; k <= nx; ++k) {
      const double u = static_cast<double>(k) * sw->fixed_period;
      if (u >= t0 - kDateTol && u < t1 - kDateTol) out.push_back(u);
    }
    std::sort(out.begin(), out.end());
    // annual fixed dates coincide with quarterly fixings; one event per date
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) < kDateTol; }),
              out.end());
    return out;
  }
  const double T = instrument_maturity(inst);
  if (T >= t0 - kDateTol && T < t1 - kDateTol) out.push_back(T);
  return out;
}

std::vector<Cashflow> cashflows_in_window(const Instrument& inst, const Model& model,
                                          double t0, double t1,
                                          const std::function<double(double)>& state_at) {
  std::vector<Cashflow> flows;
  if (const auto* sw = as_swap(inst)) {
    const auto* g1 = std::get_if<G1ppParams>(&model);
    if (!g1) throw std::invalid_argument("IrSwap requires a G1++ model");
    for (double u : cashflow_times(inst, t0, t1)) {
      const double x = state_at(u);
      double amount = 0.0;
      // floating fixing at u: PV of the coupon paid at u + float_period
      const double frac = u / sw->float_period;
      if (std::abs(frac - std::round(frac)) < 1e-6 && u < sw->maturity - kDateTol) {
        const double te = u + sw->float_period;
        const double pe = g1pp_bond_price(*g1, u, te, x);
        amount += notional_at(*sw, te) * (1.0 - pe * (1.0 - sw->float_period * sw->spread));
      }
      // fixed payment at u
      const double fracx = u / sw->fixed_period;
      if (std::abs(fracx - std::round(fracx)) < 1e-6 && u > kDateTol) {
        amount -= notional_at(*sw, u) * sw->fixed_period * sw->fixed_rate;
      }
      flows.push_back({u, amount});
    }
    return flows;
  }
  // option payoff at maturity
  for (double u : cashflow_times(inst, t0, t1))
    flows.push_back({u, portfolio_value(inst, model, u, state_at(u))});
  return flows;
}

std::vector<std::pair<double, double>> linear_notional_schedule(double first, double last,
                                                                double maturity) {
  const long n = std::lround(maturity);
  std::vector<std::pair<double, double>> sched;
  sched.reserve(static_cast<std::size_t>(n));
  for (long y = 1; y <= n; ++y) {
    const double w = n > 1 ? static_cast<double>(y - 1) / static_cast<double>(n - 1) : 0.0;
    sched.emplace_back(static_cast<double>(y), first + (last - first) * w);
  }
  return sched;
}

}  // namespace fvar
