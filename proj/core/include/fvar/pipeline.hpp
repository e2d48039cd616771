#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fvar/config.hpp"
#include "fvar/estimators.hpp"
#include "fvar/simulation.hpp"

namespace fvar {

// DIM curve: path average of per-path initial margin at each DIM time,
// time-0 deflated money.
struct DimCurve {
  std::vector<double> times;
  std::vector<double> dim;
  std::string method;
  InclusionRule rule = InclusionRule::Full;
  double wall_time_total = 0.0;
  std::size_t corrected_total = 0;
  std::size_t fallback_total = 0;
};

// Grid indices of the DIM times: delta multiples with t + delta still on the
// grid, optionally thinned evenly to `count` (0 keeps all).
std::vector<std::size_t> dim_time_indices(const OuterPathSet& outer, double delta,
                                          std::size_t count);

// Runs one method across the DIM times. `keep` (optional) collects the
// per-path cross-sections for CSV export.
DimCurve compute_dim(const OuterPathSet& outer, const MethodSpec& method, double alpha,
                     double delta, InclusionRule rule, const std::vector<std::size_t>& t_indices,
                     int threads, std::vector<ImCross>* keep = nullptr);

// (rmse_abs, rmse_rel); rel is normalized by the benchmark curve mean.
std::pair<double, double> rmse(const DimCurve& curve, const DimCurve& benchmark);

struct BenchmarkRow {
  std::string method_id;
  std::string spec;  // the method's JSON spec
  double rmse_abs = 0.0;
  double rmse_rel = 0.0;
  double time_mean = 0.0;
  double time_sd = 0.0;
  bool failed = false;
  std::string error;
};

struct BenchmarkReport {
  DimCurve benchmark;
  std::vector<DimCurve> curves;       // one per non-failed method
  std::vector<BenchmarkRow> rows;     // sorted by rmse_abs, failures last
  std::vector<ImCross> im_sections;   // populated when the config asks for per-path output
  double simulate_seconds = 0.0;
};

BenchmarkReport run_benchmark(const RunConfig& config);

// Writes run_manifest.json. `rows` may be null (status "running", written
// before any result file). Content carries no timestamps, so a rerun with
// the same config is byte-identical.
void write_manifest(const RunConfig& config, const std::string& status,
                    const std::vector<BenchmarkRow>* rows, const std::string& out_dir);

// Writes dim_curves.csv, benchmark.csv and (when configured) im_cross.csv.
void emit(const RunConfig& config, const BenchmarkReport& report, const std::string& out_dir);

// Single-schema CSV writers shared by `emit` and the CLI's dim subcommand.
void write_dim_curves(const std::vector<DimCurve>& curves, const std::string& path);
void write_im_sections(const std::vector<ImCross>& sections, const std::string& path);

}  // namespace fvar
