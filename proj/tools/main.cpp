// fvar command line front end.
//
//   fvar simulate     --config cfg.json [--out DIR]        outer path export
//   fvar dim          --config cfg.json --method NAME      one method's DIM curve
//   fvar compare      --config cfg.json                    full method comparison
//   fvar fit-johnson  FILE [--method moments|percentile]   distribution fit
//
// --alpha/--seed/--threads/--out override the config file. Every run that
// writes result files writes run_manifest.json first, so an aborted run is
// diagnosable from the manifest alone.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fvar/config.hpp"
#include "fvar/estimators.hpp"
#include "fvar/johnson.hpp"
#include "fvar/math.hpp"
#include "fvar/pipeline.hpp"
#include "fvar/simulation.hpp"

namespace {

struct Overrides {
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

fvar::RunConfig load_with_overrides(const std::string& config_path, const Overrides& o) {
  fvar::RunConfig cfg = fvar::load_config(config_path);
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0)
    throw std::invalid_argument("--alpha: must lie strictly between 0 and 1");
  return cfg;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --method accepts a bare method name (default options), a method_id prefix
// matching one configured method, or an inline JSON spec.
fvar::MethodSpec resolve_method(const std::string& name, const fvar::RunConfig& cfg) {
  if (!name.empty() && name.front() == '{') return fvar::method_from_json(name);

  std::vector<fvar::MethodSpec> pool;
  pool.push_back(cfg.benchmark);
  pool.insert(pool.end(), cfg.methods.begin(), cfg.methods.end());
  std::vector<fvar::MethodSpec> hits;
  for (const auto& m : pool) {
    const std::string id = fvar::method_id(m);
    if (id.rfind(name, 0) == 0) hits.push_back(m);
  }
  if (hits.size() == 1) return hits.front();
  if (hits.size() > 1) {
    // Prefix is ambiguous within the config; fall through to bare-name
    // defaults only if the name is exactly a method family.
  }

  if (name == "nested_mc") return fvar::NestedMcSpec{};
  if (name == "glsmc") return fvar::GlsmcSpec{};
  if (name == "jlsmc") return fvar::JlsmcSpec{};
  if (name == "qreg") return fvar::QuantileRegSpec{};
  if (name == "dg_normal") return fvar::DeltaGammaNormalSpec{};
  if (name == "dg_cf") return fvar::DeltaGammaCfSpec{};
  if (name == "jpp") return fvar::JppSpec{};
  if (name == "raw_pseudo") return fvar::RawPseudoSpec{};

  if (hits.size() > 1)
    throw std::invalid_argument("--method: '" + name + "' matches more than one configured method");
  throw std::invalid_argument("--method: '" + name +
                              "' matches no configured method and is not a method name");
}

int cmd_simulate(const std::string& config_path, const Overrides& o) {
  const fvar::RunConfig cfg = load_with_overrides(config_path, o);
  fvar::write_manifest(cfg, "running", nullptr, cfg.out_dir);

  std::vector<double> grid = fvar::build_time_grid(cfg.instrument, cfg.delta);
  const fvar::OuterPathSet outer =
      fvar::simulate_outer(cfg.model, cfg.instrument, cfg.n_outer, std::move(grid), cfg.seed);

  const std::filesystem::path dir(cfg.out_dir);
  {
    std::ofstream f(dir / "paths.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + (dir / "paths.csv").string());
    f << "path_id,t,x,v,deflator\n";
    for (std::size_t p = 0; p < outer.n_paths; ++p)
      for (std::size_t j = 0; j < outer.times.size(); ++j)
        f << p << ',' << fmt(outer.times[j]) << ',' << fmt(outer.state(p, j)) << ','
          << fmt(outer.value(p, j)) << ',' << fmt(outer.deflator(p, j)) << '\n';
    f.flush();
    if (!f.good()) throw std::runtime_error("write failed: " + (dir / "paths.csv").string());
  }
  {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t p = 0; p < outer.n_paths; ++p) {
      nlohmann::json flows = nlohmann::json::array();
      for (const fvar::Cashflow& cf : outer.cashflow_events[p]) {
        nlohmann::json e;
        e["t"] = cf.time;
        e["amount"] = cf.amount;
        flows.push_back(std::move(e));
      }
      j.push_back(std::move(flows));
    }
    std::ofstream f(dir / "cashflows.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + (dir / "cashflows.json").string());
    f << j.dump(2) << "\n";
    f.flush();
    if (!f.good()) throw std::runtime_error("write failed: " + (dir / "cashflows.json").string());
  }

  fvar::write_manifest(cfg, "complete", nullptr, cfg.out_dir);
  std::cout << "wrote " << (dir / "paths.csv").string() << " (" << outer.n_paths << " paths, "
            << outer.times.size() << " times)\n";
  return 0;
}

int cmd_dim(const std::string& config_path, const std::string& method_name, const Overrides& o) {
  const fvar::RunConfig cfg = load_with_overrides(config_path, o);
  const fvar::MethodSpec method = resolve_method(method_name, cfg);
  fvar::write_manifest(cfg, "running", nullptr, cfg.out_dir);

  std::vector<double> grid = fvar::build_time_grid(cfg.instrument, cfg.delta);
  const fvar::OuterPathSet outer =
      fvar::simulate_outer(cfg.model, cfg.instrument, cfg.n_outer, std::move(grid), cfg.seed);
  const std::vector<std::size_t> t_idx = fvar::dim_time_indices(outer, cfg.delta, cfg.dim_times);
  if (t_idx.empty()) throw std::runtime_error("no DIM times on the grid");

  const int threads = cfg.threads;
  std::vector<fvar::ImCross> sections;
  fvar::DimCurve curve =
      fvar::compute_dim(outer, method, cfg.alpha, cfg.delta, cfg.rule, t_idx, threads,
                        cfg.write_im_cross ? &sections : nullptr);

  const std::filesystem::path dir(cfg.out_dir);
  fvar::write_dim_curves({curve}, (dir / "dim_curves.csv").string());
  if (cfg.write_im_cross) fvar::write_im_sections(sections, (dir / "im_cross.csv").string());
  fvar::write_manifest(cfg, "complete", nullptr, cfg.out_dir);

  std::cout << curve.method << ": " << curve.times.size() << " DIM times, estimation "
            << fmt(curve.wall_time_total) << " s\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const Overrides& o) {
  const fvar::RunConfig cfg = load_with_overrides(config_path, o);
  fvar::write_manifest(cfg, "running", nullptr, cfg.out_dir);

  const fvar::BenchmarkReport report = fvar::run_benchmark(cfg);
  fvar::emit(cfg, report, cfg.out_dir);

  bool any_failed = false;
  std::cout << "benchmark " << report.benchmark.method << " (simulation "
            << fmt(report.simulate_seconds) << " s, estimation "
            << fmt(report.benchmark.wall_time_total) << " s)\n";
  for (const fvar::BenchmarkRow& r : report.rows) {
    if (r.failed) {
      any_failed = true;
      std::cout << "  " << r.method_id << ": FAILED: " << r.error << "\n";
    } else {
      std::cout << "  " << r.method_id << ": rmse_abs=" << fmt(r.rmse_abs)
                << " rmse_rel=" << fmt(r.rmse_rel) << " time=" << fmt(r.time_mean) << "s\n";
    }
  }
  std::cout << "wrote " << (std::filesystem::path(cfg.out_dir) / "benchmark.csv").string() << "\n";
  return any_failed ? 1 : 0;
}

int cmd_fit_johnson(const std::string& sample_path, const std::string& fit_method, double z) {
  std::ifstream f(sample_path);
  if (!f) throw std::runtime_error("cannot open sample file " + sample_path);
  std::vector<double> xs;
  double v = 0.0;
  while (f >> v) xs.push_back(v);
  if (xs.size() < 10)
    throw std::invalid_argument("sample file: need at least 10 numeric values, got " +
                                std::to_string(xs.size()));

  fvar::JohnsonParams params;
  if (fit_method == "moments") {
    params = fvar::fit_moments(fvar::moment_set_from_sample(xs));
  } else {
    const double zs[4] = {-3.0 * z, -z, z, 3.0 * z};
    double quant[4];
    for (int i = 0; i < 4; ++i) quant[i] = fvar::empirical_quantile(xs, fvar::normal_cdf(zs[i]));
    params = fvar::fit_percentiles(quant[0], quant[1], quant[2], quant[3], z);
  }

  nlohmann::json j;
  j["family"] = fvar::to_string(params.family);
  j["gamma"] = params.gamma;
  j["delta"] = params.delta;
  j["xi"] = params.xi;
  j["lambda"] = params.lambda;
  j["n"] = xs.size();
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Future value-at-risk / dynamic initial margin estimation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string method_name;
  std::string sample_path;
  std::string fit_method = "moments";
  double z = 1.0;
  Overrides o;

  double alpha_val = 0.0;
  std::uint64_t seed_val = 0;
  int threads_val = 0;
  std::string out_val;

  const auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "JSON run configuration");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--alpha", alpha_val, "tail level override, 0 < alpha < 1");
    sub->add_option("--seed", seed_val, "RNG seed override");
    sub->add_option("--threads", threads_val, "worker threads (0 = hardware)");
    sub->add_option("--out", out_val, "output directory override");
  };

  CLI::App* sim = app.add_subcommand("simulate", "Simulate outer paths and export them as CSV");
  add_common(sim, true);

  CLI::App* dim = app.add_subcommand("dim", "Compute one method's DIM curve");
  add_common(dim, true);
  dim->add_option("--method", method_name,
                  "method name, configured-method id prefix, or inline JSON spec")
      ->required();

  CLI::App* cmp = app.add_subcommand("compare", "Run every configured method against the benchmark");
  add_common(cmp, true);

  CLI::App* fit = app.add_subcommand("fit-johnson", "Fit a Johnson distribution to a sample file");
  fit->add_option("file", sample_path, "whitespace-separated sample values")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--method", fit_method, "moments or percentile")
      ->check(CLI::IsMember({"moments", "percentile"}));
  fit->add_option("--z", z, "percentile spacing in normal sd units (percentile fit)");

  CLI11_PARSE(app, argc, argv);

  try {
    for (CLI::App* sub : {sim, dim, cmp}) {
      if (!sub->parsed()) continue;
      if (sub->count("--alpha") > 0) o.alpha = alpha_val;
      if (sub->count("--seed") > 0) o.seed = seed_val;
      if (sub->count("--threads") > 0) o.threads = threads_val;
      if (sub->count("--out") > 0) o.out_dir = out_val;
    }
    if (sim->parsed()) return cmd_simulate(config_path, o);
    if (dim->parsed()) return cmd_dim(config_path, method_name, o);
    if (cmp->parsed()) return cmd_compare(config_path, o);
    if (fit->parsed()) return cmd_fit_johnson(sample_path, fit_method, z);
  } catch (const std::exception& e) {
    std::cerr << "fvar: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
