#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fvar/estimators.hpp"
#include "fvar/models.hpp"
#include "fvar/simulation.hpp"

namespace fvar {

// One full run: market, instrument, scales, the benchmark method and the
// methods compared against it.
struct RunConfig {
  Model model;
  Instrument instrument;
  std::size_t n_outer = 10000;
  double delta = 0.05;
  double alpha = 0.01;
  InclusionRule rule = InclusionRule::Full;
  std::size_t dim_times = 0;  // 0: every delta multiple; else evenly thinned to this many
  MethodSpec benchmark = NestedMcSpec{};
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 1;
  int repeats = 3;
  int threads = 0;  // 0: hardware parallelism
  std::string out_dir = "out";
  bool write_im_cross = false;
};

// Strict JSON parsing: unknown keys anywhere are an error, constraint
// violations name the key and the constraint.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

std::string to_json_string(const RunConfig& config, int indent = 2);
std::string method_to_json(const MethodSpec& spec);
MethodSpec method_from_json(const std::string& json_text);

}  // namespace fvar
