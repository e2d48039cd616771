#include "fvar/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "fvar/parallel.hpp"

namespace fvar {

namespace {

// Kept in sync with the CMake project version.
constexpr const char* kVersion = "0.1.0";

constexpr double kGridTol = 1e-9;

double now_diff(std::chrono::steady_clock::time_point start) {
  const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
  return d.count();
}

// Full decimal precision so the CSVs re-parse to the exact doubles.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("pipeline: cannot open " + path.string() + " for writing");
  return f;
}

void close_checked(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f.good()) throw std::runtime_error("pipeline: write failed: " + path.string());
}

}  // namespace

std::vector<std::size_t> dim_time_indices(const OuterPathSet& outer, double delta,
                                          std::size_t count) {
  const std::vector<double>& times = outer.times;
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double m = std::round(t / delta);
    if (std::abs(t - m * delta) > kGridTol) continue;
    const double target = t + delta;
    bool next_on_grid = false;
    for (std::size_t j = i + 1; j < times.size() && times[j] <= target + kGridTol; ++j) {
      if (std::abs(times[j] - target) <= kGridTol) {
        next_on_grid = true;
        break;
      }
    }
    if (next_on_grid) all.push_back(i);
  }
  if (count == 0 || count >= all.size() || all.empty()) return all;
  if (count == 1) return {all.back()};
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double pos = static_cast<double>(j) * static_cast<double>(all.size() - 1) /
                       static_cast<double>(count - 1);
    out.push_back(all[static_cast<std::size_t>(std::llround(pos))]);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DimCurve compute_dim(const OuterPathSet& outer, const MethodSpec& method, double alpha,
                     double delta, InclusionRule rule, const std::vector<std::size_t>& t_indices,
                     int threads, std::vector<ImCross>* keep) {
  DimCurve curve;
  curve.method = method_id(method);
  curve.rule = rule;
  curve.times.reserve(t_indices.size());
  curve.dim.reserve(t_indices.size());
  for (std::size_t ti : t_indices) {
    if (ti >= outer.times.size()) throw std::invalid_argument("compute_dim: t_index off the grid");
    StepContext ctx;
    ctx.outer = &outer;
    ctx.t_index = ti;
    ctx.delta = delta;
    ctx.rule = rule;
    ctx.alpha = alpha;
    ctx.threads = threads;
    const auto start = std::chrono::steady_clock::now();
    ImCross cross;
    try {
      cross = run_method(method, ctx);
    } catch (const std::exception& e) {
      throw std::runtime_error(curve.method + " at t=" + fmt(outer.times[ti]) + ": " + e.what());
    }
    cross.wall_time = now_diff(start);
    curve.wall_time_total += cross.wall_time;
    curve.corrected_total += cross.corrected;
    curve.fallback_total += cross.fallbacks;
    if (cross.per_path_im.empty())
      throw std::runtime_error(curve.method + " at t=" + fmt(outer.times[ti]) +
                               ": empty cross-section");
    double mean = 0.0;
    for (double im : cross.per_path_im) mean += im;
    mean /= static_cast<double>(cross.per_path_im.size());
    curve.times.push_back(outer.times[ti]);
    curve.dim.push_back(mean);
    if (keep != nullptr) keep->push_back(std::move(cross));
  }
  return curve;
}

std::pair<double, double> rmse(const DimCurve& curve, const DimCurve& benchmark) {
  const std::size_t n = curve.times.size();
  if (n == 0 || n != benchmark.times.size())
    throw std::invalid_argument("rmse: curves span different time grids");
  double acc = 0.0;
  double bench_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(curve.times[i] - benchmark.times[i]) > 1e-12)
      throw std::invalid_argument("rmse: curves span different time grids");
    const double d = curve.dim[i] - benchmark.dim[i];
    acc += d * d;
    bench_mean += benchmark.dim[i];
  }
  const double abs_err = std::sqrt(acc / static_cast<double>(n));
  bench_mean /= static_cast<double>(n);
  double rel_err;
  if (bench_mean != 0.0)
    rel_err = abs_err / bench_mean;
  else
    rel_err = abs_err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return {abs_err, rel_err};
}

BenchmarkReport run_benchmark(const RunConfig& config) {
  const int threads = static_cast<int>(resolve_threads(static_cast<unsigned>(
      config.threads < 0 ? 0 : config.threads)));

  BenchmarkReport report;
  const auto sim_start = std::chrono::steady_clock::now();
  std::vector<double> grid = build_time_grid(config.instrument, config.delta);
  const OuterPathSet outer =
      simulate_outer(config.model, config.instrument, config.n_outer, std::move(grid), config.seed);
  report.simulate_seconds = now_diff(sim_start);

  const std::vector<std::size_t> t_idx = dim_time_indices(outer, config.delta, config.dim_times);
  if (t_idx.empty()) throw std::runtime_error("run_benchmark: no DIM times on the grid");

  // Benchmark failures abort the run; there is nothing to score against.
  {
    std::vector<ImCross> sections;
    std::vector<ImCross>* keep = config.write_im_cross ? &sections : nullptr;
    report.benchmark = compute_dim(outer, config.benchmark, config.alpha, config.delta,
                                   config.rule, t_idx, threads, keep);
    for (ImCross& s : sections) report.im_sections.push_back(std::move(s));
  }

  for (const MethodSpec& method : config.methods) {
    BenchmarkRow row;
    row.method_id = method_id(method);
    row.spec = method_to_json(method);
    std::vector<ImCross> sections;
    try {
      DimCurve curve;
      std::vector<double> pass_seconds;
      pass_seconds.reserve(static_cast<std::size_t>(config.repeats));
      for (int r = 0; r < config.repeats; ++r) {
        // Per-path sections only from the first pass; every pass is
        // numerically identical (same keyed RNG streams).
        std::vector<ImCross>* keep = (r == 0 && config.write_im_cross) ? &sections : nullptr;
        DimCurve pass = compute_dim(outer, method, config.alpha, config.delta, config.rule, t_idx,
                                    threads, keep);
        pass_seconds.push_back(pass.wall_time_total);
        if (r == 0) curve = std::move(pass);
      }
      const auto [abs_err, rel_err] = rmse(curve, report.benchmark);
      row.rmse_abs = abs_err;
      row.rmse_rel = rel_err;
      double mean = 0.0;
      for (double s : pass_seconds) mean += s;
      mean /= static_cast<double>(pass_seconds.size());
      double var = 0.0;
      if (pass_seconds.size() > 1) {
        for (double s : pass_seconds) var += (s - mean) * (s - mean);
        var /= static_cast<double>(pass_seconds.size() - 1);
      }
      row.time_mean = mean;
      row.time_sd = std::sqrt(var);
      report.curves.push_back(std::move(curve));
      for (ImCross& s : sections) report.im_sections.push_back(std::move(s));
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      row.rmse_abs = std::numeric_limits<double>::quiet_NaN();
      row.rmse_rel = std::numeric_limits<double>::quiet_NaN();
    }
    report.rows.push_back(std::move(row));
  }

  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const BenchmarkRow& a, const BenchmarkRow& b) {
                     if (a.failed != b.failed) return !a.failed;
                     if (a.failed) return false;
                     return a.rmse_abs < b.rmse_abs;
                   });
  return report;
}

void write_manifest(const RunConfig& config, const std::string& status,
                    const std::vector<BenchmarkRow>* rows, const std::string& out_dir) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(to_json_string(config));
  j["schema"] = 1;
  j["status"] = status;
  j["version"] = kVersion;
  if (rows != nullptr) {
    nlohmann::json failed = nlohmann::json::array();
    for (const BenchmarkRow& r : *rows)
      if (r.failed) failed.push_back(r.method_id);
    j["failed_methods"] = std::move(failed);
  }
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path path = std::filesystem::path(out_dir) / "run_manifest.json";
  std::ofstream f = open_out(path);
  f << j.dump(2) << "\n";
  close_checked(f, path);
}

void write_dim_curves(const std::vector<DimCurve>& curves, const std::string& path) {
  const std::filesystem::path p(path);
  std::ofstream f = open_out(p);
  f << "t,dim,method_id,rule\n";
  for (const DimCurve& c : curves)
    for (std::size_t i = 0; i < c.times.size(); ++i)
      f << fmt(c.times[i]) << ',' << fmt(c.dim[i]) << ',' << csv_field(c.method) << ','
        << to_string(c.rule) << '\n';
  close_checked(f, p);
}

void write_im_sections(const std::vector<ImCross>& sections, const std::string& path) {
  const std::filesystem::path p(path);
  std::ofstream f = open_out(p);
  f << "t,path_id,im,method_id\n";
  for (const ImCross& s : sections)
    for (std::size_t i = 0; i < s.per_path_im.size(); ++i)
      f << fmt(s.t) << ',' << i << ',' << fmt(s.per_path_im[i]) << ',' << csv_field(s.method)
        << '\n';
  close_checked(f, p);
}

void emit(const RunConfig& config, const BenchmarkReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  {
    std::vector<DimCurve> all;
    all.reserve(1 + report.curves.size());
    all.push_back(report.benchmark);
    all.insert(all.end(), report.curves.begin(), report.curves.end());
    write_dim_curves(all, (dir / "dim_curves.csv").string());
  }

  {
    const std::filesystem::path path = dir / "benchmark.csv";
    std::ofstream f = open_out(path);
    f << "method_id,rmse_abs,rmse_rel,time_mean_s,time_sd_s,failed,error,spec\n";
    for (const BenchmarkRow& r : report.rows) {
      f << csv_field(r.method_id) << ',';
      if (r.failed)
        f << ",,";
      else
        f << fmt(r.rmse_abs) << ',' << fmt(r.rmse_rel) << ',';
      f << fmt(r.time_mean) << ',' << fmt(r.time_sd) << ',' << (r.failed ? '1' : '0') << ','
        << csv_field(r.error) << ',' << csv_field(r.spec) << '\n';
    }
    close_checked(f, path);
  }

  if (config.write_im_cross)
    write_im_sections(report.im_sections, (dir / "im_cross.csv").string());

  const bool any_failed = std::any_of(report.rows.begin(), report.rows.end(),
                                      [](const BenchmarkRow& r) { return r.failed; });
  write_manifest(config, any_failed ? "partial" : "complete", &report.rows, out_dir);
}

}  // namespace fvar
