#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fvar {

// ---------------------------------------------------------------------------
// Market models
// ---------------------------------------------------------------------------

// Geometric Brownian motion under the domestic risk-neutral measure:
//   dS/S = (rate_dom - rate_fgn) dt + sigma dW.
// rate_fgn doubles as the dividend/foreign leg (0 for plain equity).
struct GbmParams {
  double spot0 = 0.0;
  double rate_dom = 0.0;
  double rate_fgn = 0.0;
  double sigma = 0.0;
};

// One-factor Gaussian short rate r_t = x_t + phi(t), dx = -a x dt + sigma dW,
// x_0 = 0, fitted to a flat initial zero curve at flat_rate.
struct G1ppParams {
  double mean_reversion = 0.0;
  double sigma = 0.0;
  double flat_rate = 0.0;
};

using Model = std::variant<GbmParams, G1ppParams>;

// ---------------------------------------------------------------------------
// Instruments
// ---------------------------------------------------------------------------

struct EuropeanCall {
  double strike = 0.0;
  double maturity = 0.0;
};

struct CallCombination {
  // (quantity, strike) legs sharing one maturity
  std::vector<std::pair<double, double>> legs;
  double maturity = 0.0;
};

struct FxCall {
  double strike = 0.0;
  double maturity = 0.0;
};

struct IrSwap {
  double fixed_rate = 0.0;
  double spread = 0.0;            // added to the floating rate
  double fixed_period = 1.0;      // year fraction between fixed payments
  double float_period = 0.25;     // year fraction between floating payments
  double maturity = 0.0;
  // (year, amount): `amount` applies to flows dated in (year-1, year].
  std::vector<std::pair<double, double>> notional_schedule;
};

using Instrument = std::variant<EuropeanCall, CallCombination, FxCall, IrSwap>;

double instrument_maturity(const Instrument& inst);
std::string instrument_name(const Instrument& inst);

// ---------------------------------------------------------------------------
// Pricing
// ---------------------------------------------------------------------------

// Undiscounted-to-0 Black-Scholes / Garman-Kohlhagen call price in time-tau
// money. tau = 0 degenerates to intrinsic; sigma*sqrt(tau) ~ 0 to the
// deterministic forward intrinsic.
double bs_price(double spot, double strike, double rate_dom, double rate_fgn,
                double sigma, double tau);

// Cash sensitivities: delta_cash = dV/dS * S, gamma_cash = d2V/dS2 * S^2.
struct Greeks {
  double delta_cash = 0.0;
  double gamma_cash = 0.0;
};

// Closed-form Black-Scholes cash greeks, leg-additive for combinations.
// Throws for instruments without such sensitivities (IrSwap).
Greeks greeks(const Instrument& inst, const Model& model, double t, double state);

// Zero bond P(t, T) given factor level x at t. Flat initial curve is
// reproduced exactly at t = 0, x = 0.
double g1pp_bond_price(const G1ppParams& p, double t, double T, double x);

// Portfolio value at (t, state) in time-t money. `state` is the risk factor:
// spot for the BS instruments, the short-rate factor x for the swap. The
// value is cum-flow: a flow dated exactly t is still included. Deflation to
// time-0 units happens in the simulation layer.
double portfolio_value(const Instrument& inst, const Model& model, double t, double state);

// ---------------------------------------------------------------------------
// Cashflows
// ---------------------------------------------------------------------------

struct Cashflow {
  double time = 0.0;
  double amount = 0.0;  // time-`time` money, signed from our side
};

// Event dates of `inst` in [t0, t1). For options the only event is the payoff
// at maturity. Swap floating payments are realized at their fixing dates (the
// PV of the coupon is state-determined there); fixed payments at their dates.
std::vector<double> cashflow_times(const Instrument& inst, double t0, double t1);

// Flow amounts for the events in [t0, t1); `state_at` must return the risk
// factor at an event date.
std::vector<Cashflow> cashflows_in_window(const Instrument& inst, const Model& model,
                                          double t0, double t1,
                                          const std::function<double(double)>& state_at);

// Linear annual notional schedule from `first` (year 1) to `last` (final year).
std::vector<std::pair<double, double>> linear_notional_schedule(double first, double last,
                                                                double maturity);

}  // namespace fvar
