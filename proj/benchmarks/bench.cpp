// Micro benchmarks for the per-step costs that dominate a DIM run: outer
// simulation, the cross-section estimators, and the fitting primitives they
// lean on. Sizes are picked so one iteration is milliseconds, not the desk
// scale the acceptance suite uses.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "fvar/estimators.hpp"
#include "fvar/johnson.hpp"
#include "fvar/pipeline.hpp"
#include "fvar/regression.hpp"
#include "fvar/simulation.hpp"

namespace {

using namespace fvar;

OuterPathSet make_outer(std::size_t n_paths) {
  Model model = GbmParams{85.0, 0.03, 0.0, 0.1};
  Instrument inst = EuropeanCall{85.0, 5.0};
  return simulate_outer(model, inst, n_paths, build_time_grid(inst, 0.05), 7);
}

StepContext make_ctx(const OuterPathSet& outer) {
  StepContext ctx;
  ctx.outer = &outer;
  ctx.t_index = outer.time_index(0.5);
  ctx.delta = 0.05;
  ctx.rule = InclusionRule::Full;
  ctx.alpha = 0.01;
  ctx.threads = 1;
  return ctx;
}

void bm_simulate_outer(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  Model model = GbmParams{85.0, 0.03, 0.0, 0.1};
  Instrument inst = EuropeanCall{85.0, 5.0};
  auto grid = build_time_grid(inst, 0.05);
  for (auto _ : state) {
    auto outer = simulate_outer(model, inst, n, grid, 7);
    benchmark::DoNotOptimize(outer.values.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n) * int64_t(grid.size()));
}
BENCHMARK(bm_simulate_outer)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void bm_delta_v(benchmark::State& state) {
  auto outer = make_outer(std::size_t(state.range(0)));
  const auto j = outer.time_index(0.5);
  for (auto _ : state) {
    auto cross = delta_v(outer, j, 0.05, InclusionRule::Full);
    benchmark::DoNotOptimize(cross.dv.data());
  }
}
BENCHMARK(bm_delta_v)->Arg(20000)->Unit(benchmark::kMicrosecond);

void bm_glsmc(benchmark::State& state) {
  auto outer = make_outer(std::size_t(state.range(0)));
  auto cross = delta_v(outer, outer.time_index(0.5), 0.05, InclusionRule::Full);
  BasisSpec basis = standardized({BasisKind::Laguerre, 7, FeatureKind::X, 0, 1}, cross.x);
  for (auto _ : state) {
    auto im = glsmc(cross, basis, 0.01);
    benchmark::DoNotOptimize(im.per_path_im.data());
  }
}
BENCHMARK(bm_glsmc)->Arg(20000)->Unit(benchmark::kMillisecond);

void bm_jlsmc(benchmark::State& state) {
  auto outer = make_outer(std::size_t(state.range(0)));
  auto cross = delta_v(outer, outer.time_index(0.5), 0.05, InclusionRule::Full);
  JlsmcSpec spec{standardized({BasisKind::Laguerre, 7, FeatureKind::X, 0, 1}, cross.x), 200,
                 JlsmcCorrection::Project, 0};
  for (auto _ : state) {
    auto im = jlsmc(cross, spec, 0.01);
    benchmark::DoNotOptimize(im.per_path_im.data());
  }
}
BENCHMARK(bm_jlsmc)->Arg(20000)->Unit(benchmark::kMillisecond);

void bm_raw_pseudo(benchmark::State& state) {
  auto outer = make_outer(std::size_t(state.range(0)));
  auto ctx = make_ctx(outer);
  RawPseudoSpec spec{200, PseudoKey::ByX};
  for (auto _ : state) {
    auto im = run_method(spec, ctx);
    benchmark::DoNotOptimize(im.per_path_im.data());
  }
}
BENCHMARK(bm_raw_pseudo)->Arg(20000)->Unit(benchmark::kMillisecond);

void bm_jpp_pseudo(benchmark::State& state) {
  auto outer = make_outer(std::size_t(state.range(0)));
  auto ctx = make_ctx(outer);
  JppSpec spec{JppPseudo{200, 10, PseudoKey::ByX}, 0.524};
  for (auto _ : state) {
    auto im = run_method(spec, ctx);
    benchmark::DoNotOptimize(im.per_path_im.data());
  }
}
BENCHMARK(bm_jpp_pseudo)->Arg(20000)->Unit(benchmark::kMillisecond);

void bm_nested_step(benchmark::State& state) {
  auto outer = make_outer(500);
  auto ctx = make_ctx(outer);
  NestedMcSpec spec{std::size_t(state.range(0))};
  for (auto _ : state) {
    auto im = nested_mc(ctx, spec);
    benchmark::DoNotOptimize(im.per_path_im.data());
  }
}
BENCHMARK(bm_nested_step)->Arg(500)->Unit(benchmark::kMillisecond);

void bm_fit_least_squares(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 80.0 + 10.0 * nd(gen);
    y[i] = 0.01 * x[i] * x[i] + nd(gen);
  }
  BasisSpec basis = standardized({BasisKind::Laguerre, 7, FeatureKind::X, 0, 1}, x);
  for (auto _ : state) {
    auto model = fit_least_squares(x, y, basis);
    benchmark::DoNotOptimize(model.coeffs.data());
  }
}
BENCHMARK(bm_fit_least_squares)->Arg(20000)->Unit(benchmark::kMicrosecond);

void bm_fit_quantile(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 2.0 * double(i) / double(n);
    y[i] = x[i] * x[i] + (0.5 + x[i]) * nd(gen);
  }
  BasisSpec basis = standardized({BasisKind::Monomial, 3, FeatureKind::X, 0, 1}, x);
  QuantileFitOptions opt;
  opt.steps = 1000;
  for (auto _ : state) {
    auto model = fit_quantile(x, y, basis, 0.01, opt);
    benchmark::DoNotOptimize(model.coeffs.data());
  }
}
BENCHMARK(bm_fit_quantile)->Arg(20000)->Unit(benchmark::kMillisecond);

void bm_fit_moments(benchmark::State& state) {
  // A mildly skewed, heavy-tailed target exercising the SU iteration.
  MomentSet ms = central_from_raw(0.1, 1.2, 0.9, 6.5);
  for (auto _ : state) {
    auto fit = fit_moments(ms);
    benchmark::DoNotOptimize(&fit);
  }
}
BENCHMARK(bm_fit_moments)->Unit(benchmark::kMicrosecond);

void bm_empirical_quantile(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<double> xs(n);
  for (auto& v : xs) v = nd(gen);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_quantile(xs, 0.01));
  }
}
BENCHMARK(bm_empirical_quantile)->Arg(2000)->Arg(20000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
