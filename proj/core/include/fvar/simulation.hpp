#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fvar/models.hpp"
#include "fvar/rng.hpp"

namespace fvar {

// Which MPoR-window cashflows enter deltaV (Eq. (1) inclusion function f):
// all of them, none, only received (x+), only paid (x-).
enum class InclusionRule { Full, None, PositiveOnly, NegativeOnly };

const char* to_string(InclusionRule rule);
InclusionRule inclusion_rule_from_string(const std::string& s);

// Simulated outer scenario set. `values` are portfolio values deflated to
// time-0 money (value * deflator); cashflow amounts are deflated the same
// way. Matrices are path-major: entry(path, time_index).
struct OuterPathSet {
  Model model;
  Instrument inst;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::size_t n_paths = 0;
  std::vector<double> states;     // risk factor X_t
  std::vector<double> values;     // deflated V_t
  std::vector<double> deflators;  // exp(-int_0^t r ds)
  std::vector<std::vector<Cashflow>> cashflow_events;  // per path, deflated, time-sorted

  double state(std::size_t path, std::size_t j) const { return states[path * times.size() + j]; }
  double value(std::size_t path, std::size_t j) const { return values[path * times.size() + j]; }
  double deflator(std::size_t path, std::size_t j) const { return deflators[path * times.size() + j]; }
  std::size_t time_index(double t) const;  // exact grid lookup, throws if absent
};

// Simulation grid: all multiples of delta up to the instrument maturity,
// unioned with the instrument event dates (swap fixings are not multiples of
// delta). Every multiple-of-delta point t <= maturity - delta keeps t + delta
// on the grid.
std::vector<double> build_time_grid(const Instrument& inst, double delta);

OuterPathSet simulate_outer(const Model& model, const Instrument& inst, std::size_t n_paths,
                            std::vector<double> times, std::uint64_t seed);

// Cross-section of deltaV over the MPoR window [t, t+delta) at one DIM time.
struct DeltaVCross {
  std::size_t t_index = 0;
  double t = 0.0;
  double delta = 0.0;
  InclusionRule rule = InclusionRule::Full;
  std::vector<double> x;     // risk factor at t
  std::vector<double> v;     // deflated portfolio value at t
  std::vector<double> dv;    // deflated value change + included flows
  std::vector<double> defl;  // deflator at t (estimators scaling t-anchored quantities)
  std::size_t size() const { return dv.size(); }
};

DeltaVCross delta_v(const OuterPathSet& outer, std::size_t t_index, double delta,
                    InclusionRule rule);

// Type-7 empirical quantile (linear interpolation of order statistics).
double empirical_quantile(std::vector<double> xs, double alpha);

// Conditional deltaV samples at one anchor. Model origin samples are in
// t-anchored deflated units (deflator 1 at the anchor; scale by the outer
// deflator to compare across t). Pseudo origin samples are borrowed outer
// deltaVs, already in time-0 units.
struct InnerSampleSet {
  enum class Origin { Model, Pseudo };
  Origin origin = Origin::Model;
  double t = 0.0;
  double x = 0.0;
  std::vector<double> dv;
  double half_width = 0.0;  // Pseudo: max |key - anchor key| in the neighborhood
};

struct Anchor {
  double t = 0.0;
  double x = 0.0;
};

InnerSampleSet simulate_inner(const Model& model, const Instrument& inst, const Anchor& anchor,
                              std::size_t n_inner, double delta, InclusionRule rule,
                              KeyedRng& rng);

// Pseudo-inner sampling: outer paths sorted by a conditioning key, each
// anchor borrowing its k nearest neighbours (ties by path index).
enum class PseudoKey { ByX, ByV };

const char* to_string(PseudoKey key);
PseudoKey pseudo_key_from_string(const std::string& s);

struct SortedKeyView {
  const DeltaVCross* cross = nullptr;
  PseudoKey key = PseudoKey::ByX;
  std::vector<std::size_t> order;    // path indices sorted by (key value, path index)
  std::vector<std::size_t> rank_of;  // inverse permutation

  SortedKeyView(const DeltaVCross& c, PseudoKey k);
  double key_value(std::size_t path) const;
  // window [lo, hi] of sorted ranks holding the k nearest keys around the
  // anchor's rank
  std::pair<std::size_t, std::size_t> window(std::size_t anchor_rank, std::size_t k) const;
};

InnerSampleSet pseudo_inner(const SortedKeyView& view, std::size_t anchor_path, std::size_t k);
InnerSampleSet pseudo_inner(const DeltaVCross& cross, std::size_t anchor_path, PseudoKey key,
                            std::size_t k);

}  // namespace fvar
