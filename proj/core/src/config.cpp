#include "fvar/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fvar {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& constraint) {
  throw std::invalid_argument("config: " + key + ": " + constraint);
}

void reject_unknown(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key)) fail(key, "required");
  if (!j.at(key).is_number()) fail(key, "must be a number");
  return j.at(key).get<double>();
}

double optional_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(key, "must be a number");
  return j.at(key).get<double>();
}

std::string require_string(const json& j, const std::string& key) {
  if (!j.contains(key)) fail(key, "required");
  if (!j.at(key).is_string()) fail(key, "must be a string");
  return j.at(key).get<std::string>();
}

std::size_t optional_count(const json& j, const std::string& key, std::size_t fallback,
                           std::size_t min_value) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 0)
    fail(key, "must be a non-negative integer");
  const auto v = j.at(key).get<std::size_t>();
  if (v < min_value) fail(key, "must be >= " + std::to_string(min_value));
  return v;
}

Model parse_model(const json& j) {
  const std::string type = require_string(j, "type");
  if (type == "gbm") {
    reject_unknown(j, "model", {"type", "spot", "rate_dom", "rate_fgn", "sigma"});
    GbmParams p;
    p.spot0 = require_number(j, "spot");
    p.rate_dom = require_number(j, "rate_dom");
    p.rate_fgn = optional_number(j, "rate_fgn", 0.0);
    p.sigma = require_number(j, "sigma");
    if (!(p.spot0 > 0.0)) fail("model.spot", "must be positive");
    if (!(p.sigma >= 0.0)) fail("model.sigma", "must be non-negative");
    return p;
  }
  if (type == "g1pp") {
    reject_unknown(j, "model", {"type", "mean_reversion", "sigma", "flat_rate"});
    G1ppParams p;
    p.mean_reversion = require_number(j, "mean_reversion");
    p.sigma = require_number(j, "sigma");
    p.flat_rate = require_number(j, "flat_rate");
    if (!(p.mean_reversion >= 0.0)) fail("model.mean_reversion", "must be non-negative");
    if (!(p.sigma >= 0.0)) fail("model.sigma", "must be non-negative");
    return p;
  }
  fail("model.type", "must be \"gbm\" or \"g1pp\"");
}

Instrument parse_instrument(const json& j) {
  const std::string type = require_string(j, "type");
  if (type == "european_call") {
    reject_unknown(j, "instrument", {"type", "strike", "maturity"});
    EuropeanCall c;
    c.strike = require_number(j, "strike");
    c.maturity = require_number(j, "maturity");
    if (!(c.maturity > 0.0)) fail("instrument.maturity", "must be positive");
    return c;
  }
  if (type == "call_combination") {
    reject_unknown(j, "instrument", {"type", "legs", "maturity"});
    CallCombination c;
    if (!j.contains("legs") || !j.at("legs").is_array() || j.at("legs").empty())
      fail("instrument.legs", "must be a non-empty array of [quantity, strike] pairs");
    for (const auto& leg : j.at("legs")) {
      if (!leg.is_array() || leg.size() != 2 || !leg[0].is_number() || !leg[1].is_number())
        fail("instrument.legs", "each leg must be [quantity, strike]");
      c.legs.emplace_back(leg[0].get<double>(), leg[1].get<double>());
    }
    c.maturity = require_number(j, "maturity");
    if (!(c.maturity > 0.0)) fail("instrument.maturity", "must be positive");
    return c;
  }
  if (type == "fx_call") {
    reject_unknown(j, "instrument", {"type", "strike", "maturity"});
    FxCall c;
    c.strike = require_number(j, "strike");
    c.maturity = require_number(j, "maturity");
    if (!(c.maturity > 0.0)) fail("instrument.maturity", "must be positive");
    return c;
  }
  if (type == "ir_swap") {
    reject_unknown(j, "instrument",
                   {"type", "fixed_rate", "spread", "fixed_period", "float_period", "maturity",
                    "notional_first", "notional_last"});
    IrSwap s;
    s.fixed_rate = require_number(j, "fixed_rate");
    s.spread = optional_number(j, "spread", 0.0);
    s.fixed_period = optional_number(j, "fixed_period", 1.0);
    s.float_period = optional_number(j, "float_period", 0.25);
    s.maturity = require_number(j, "maturity");
    if (!(s.maturity > 0.0)) fail("instrument.maturity", "must be positive");
    if (!(s.fixed_period > 0.0)) fail("instrument.fixed_period", "must be positive");
    if (!(s.float_period > 0.0)) fail("instrument.float_period", "must be positive");
    const double first = require_number(j, "notional_first");
    const double last = optional_number(j, "notional_last", first);
    s.notional_schedule = linear_notional_schedule(first, last, s.maturity);
    return s;
  }
  fail("instrument.type",
       "must be \"european_call\", \"call_combination\", \"fx_call\", or \"ir_swap\"");
}

BasisSpec parse_basis(const json& j, const std::string& where) {
  BasisSpec b;
  b.kind = basis_kind_from_string(j.contains("basis") ? require_string(j, "basis") : "monomial");
  if (j.contains("degree")) {
    if (!j.at("degree").is_number_integer() || j.at("degree").get<long long>() < 0)
      fail(where + ".degree", "must be a non-negative integer");
    b.degree = j.at("degree").get<int>();
  }
  b.feature =
      feature_kind_from_string(j.contains("feature") ? require_string(j, "feature") : "x");
  return b;
}

MethodSpec parse_method(const json& j) {
  if (!j.is_object()) fail("methods", "each entry must be an object");
  const std::string name = require_string(j, "method");
  if (name == "nested_mc") {
    reject_unknown(j, name, {"method", "n_inner"});
    NestedMcSpec s;
    s.n_inner = optional_count(j, "n_inner", s.n_inner, 2);
    return s;
  }
  if (name == "glsmc") {
    reject_unknown(j, name, {"method", "basis", "degree", "feature"});
    return GlsmcSpec{parse_basis(j, name)};
  }
  if (name == "jlsmc") {
    reject_unknown(j, name,
                   {"method", "basis", "degree", "feature", "eval_points", "correction",
                    "inner_mean"});
    JlsmcSpec s;
    s.basis = parse_basis(j, name);
    s.eval_points = optional_count(j, "eval_points", s.eval_points, 2);
    if (j.contains("correction"))
      s.correction = jlsmc_correction_from_string(require_string(j, "correction"));
    s.inner_mean = optional_count(j, "inner_mean", 0, 0);
    return s;
  }
  if (name == "quantile_reg") {
    reject_unknown(j, name,
                   {"method", "basis", "degree", "feature", "inner_augment", "steps",
                    "learn_rate", "smoothing"});
    QuantileRegSpec s;
    s.basis = parse_basis(j, name);
    s.inner_augment = optional_count(j, "inner_augment", 0, 0);
    if (j.contains("steps")) s.fit.steps = static_cast<int>(optional_count(j, "steps", 5000, 1));
    s.fit.learn_rate = optional_number(j, "learn_rate", s.fit.learn_rate);
    s.fit.smoothing = optional_number(j, "smoothing", s.fit.smoothing);
    return s;
  }
  if (name == "dg_normal") {
    reject_unknown(j, name, {"method"});
    return DeltaGammaNormalSpec{};
  }
  if (name == "dg_cf") {
    reject_unknown(j, name, {"method"});
    return DeltaGammaCfSpec{};
  }
  if (name == "jpp") {
    reject_unknown(j, name, {"method", "source", "n_inner", "k", "stride", "key", "z"});
    JppSpec s;
    const std::string source = j.contains("source") ? require_string(j, "source") : "pseudo";
    if (source == "inner") {
      JppInner in;
      in.n_inner = optional_count(j, "n_inner", in.n_inner, 20);
      if (j.contains("k") || j.contains("stride") || j.contains("key"))
        fail("jpp", "k/stride/key apply only to source \"pseudo\"");
      s.source = in;
    } else if (source == "pseudo") {
      JppPseudo ps;
      ps.k = optional_count(j, "k", ps.k, 20);
      ps.stride = optional_count(j, "stride", ps.stride, 1);
      if (j.contains("key")) ps.key = pseudo_key_from_string(require_string(j, "key"));
      if (j.contains("n_inner")) fail("jpp", "n_inner applies only to source \"inner\"");
      s.source = ps;
    } else {
      fail("jpp.source", "must be \"inner\" or \"pseudo\"");
    }
    s.z = optional_number(j, "z", s.z);
    if (!(s.z > 0.0)) fail("jpp.z", "must be positive");
    return s;
  }
  if (name == "raw_pseudo") {
    reject_unknown(j, name, {"method", "k", "key"});
    RawPseudoSpec s;
    s.k = optional_count(j, "k", s.k, 2);
    if (j.contains("key")) s.key = pseudo_key_from_string(require_string(j, "key"));
    return s;
  }
  fail("method", "unknown method \"" + name + "\"");
}

json model_to_json(const Model& model) {
  json j;
  if (const auto* gbm = std::get_if<GbmParams>(&model)) {
    j["type"] = "gbm";
    j["spot"] = gbm->spot0;
    j["rate_dom"] = gbm->rate_dom;
    j["rate_fgn"] = gbm->rate_fgn;
    j["sigma"] = gbm->sigma;
  } else {
    const auto& g1 = std::get<G1ppParams>(model);
    j["type"] = "g1pp";
    j["mean_reversion"] = g1.mean_reversion;
    j["sigma"] = g1.sigma;
    j["flat_rate"] = g1.flat_rate;
  }
  return j;
}

json instrument_to_json(const Instrument& inst) {
  json j;
  if (const auto* c = std::get_if<EuropeanCall>(&inst)) {
    j["type"] = "european_call";
    j["strike"] = c->strike;
    j["maturity"] = c->maturity;
  } else if (const auto* cc = std::get_if<CallCombination>(&inst)) {
    j["type"] = "call_combination";
    j["legs"] = json::array();
    for (const auto& [qty, strike] : cc->legs) j["legs"].push_back({qty, strike});
    j["maturity"] = cc->maturity;
  } else if (const auto* fx = std::get_if<FxCall>(&inst)) {
    j["type"] = "fx_call";
    j["strike"] = fx->strike;
    j["maturity"] = fx->maturity;
  } else {
    const auto& s = std::get<IrSwap>(inst);
    j["type"] = "ir_swap";
    j["fixed_rate"] = s.fixed_rate;
    j["spread"] = s.spread;
    j["fixed_period"] = s.fixed_period;
    j["float_period"] = s.float_period;
    j["maturity"] = s.maturity;
    j["notional_first"] = s.notional_schedule.front().second;
    j["notional_last"] = s.notional_schedule.back().second;
  }
  return j;
}

void basis_to_json(json& j, const BasisSpec& b) {
  j["basis"] = to_string(b.kind);
  j["degree"] = b.degree;
  j["feature"] = to_string(b.feature);
}

json method_to_json_obj(const MethodSpec& spec) {
  json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NestedMcSpec>) {
          j["method"] = "nested_mc";
          j["n_inner"] = s.n_inner;
        } else if constexpr (std::is_same_v<T, GlsmcSpec>) {
          j["method"] = "glsmc";
          basis_to_json(j, s.basis);
        } else if constexpr (std::is_same_v<T, JlsmcSpec>) {
          j["method"] = "jlsmc";
          basis_to_json(j, s.basis);
          j["eval_points"] = s.eval_points;
          j["correction"] = to_string(s.correction);
          if (s.inner_mean > 0) j["inner_mean"] = s.inner_mean;
        } else if constexpr (std::is_same_v<T, QuantileRegSpec>) {
          j["method"] = "quantile_reg";
          basis_to_json(j, s.basis);
          if (s.inner_augment > 0) j["inner_augment"] = s.inner_augment;
          if (s.fit.steps != QuantileFitOptions{}.steps) j["steps"] = s.fit.steps;
          if (s.fit.learn_rate != QuantileFitOptions{}.learn_rate)
            j["learn_rate"] = s.fit.learn_rate;
          if (s.fit.smoothing > 0.0) j["smoothing"] = s.fit.smoothing;
        } else if constexpr (std::is_same_v<T, DeltaGammaNormalSpec>) {
          j["method"] = "dg_normal";
        } else if constexpr (std::is_same_v<T, DeltaGammaCfSpec>) {
          j["method"] = "dg_cf";
        } else if constexpr (std::is_same_v<T, JppSpec>) {
          j["method"] = "jpp";
          if (const auto* in = std::get_if<JppInner>(&s.source)) {
            j["source"] = "inner";
            j["n_inner"] = in->n_inner;
          } else {
            const auto& ps = std::get<JppPseudo>(s.source);
            j["source"] = "pseudo";
            j["k"] = ps.k;
            j["stride"] = ps.stride;
            j["key"] = to_string(ps.key);
          }
          j["z"] = s.z;
        } else if constexpr (std::is_same_v<T, RawPseudoSpec>) {
          j["method"] = "raw_pseudo";
          j["k"] = s.k;
          j["key"] = to_string(s.key);
        }
      },
      spec);
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config", "top level must be an object");
  reject_unknown(j, "",
                 {"model", "instrument", "n_outer", "delta", "alpha", "rule", "dim_times",
                  "benchmark", "methods", "seed", "repeats", "threads", "out_dir",
                  "write_im_cross"});

  RunConfig cfg;
  if (!j.contains("model")) fail("model", "required");
  cfg.model = parse_model(j.at("model"));
  if (!j.contains("instrument")) fail("instrument", "required");
  cfg.instrument = parse_instrument(j.at("instrument"));

  cfg.n_outer = optional_count(j, "n_outer", cfg.n_outer, 1);
  if (cfg.n_outer < 100) fail("n_outer", "must be >= 100");
  cfg.delta = optional_number(j, "delta", cfg.delta);
  if (!(cfg.delta > 0.0)) fail("delta", "must be positive");
  if (cfg.delta > instrument_maturity(cfg.instrument))
    fail("delta", "must not exceed the instrument maturity");
  cfg.alpha = optional_number(j, "alpha", cfg.alpha);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("alpha", "must be in (0, 1)");
  if (j.contains("rule")) cfg.rule = inclusion_rule_from_string(require_string(j, "rule"));
  cfg.dim_times = optional_count(j, "dim_times", 0, 0);

  if (j.contains("benchmark")) cfg.benchmark = parse_method(j.at("benchmark"));
  if (j.contains("methods")) {
    if (!j.at("methods").is_array()) fail("methods", "must be an array");
    for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m));
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) fail("seed", "must be an integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.repeats = static_cast<int>(optional_count(j, "repeats", 3, 1));
  cfg.threads = static_cast<int>(optional_count(j, "threads", 0, 0));
  if (j.contains("out_dir")) cfg.out_dir = require_string(j, "out_dir");
  if (j.contains("write_im_cross")) {
    if (!j.at("write_im_cross").is_boolean()) fail("write_im_cross", "must be a boolean");
    cfg.write_im_cross = j.at("write_im_cross").get<bool>();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_json_string(const RunConfig& cfg, int indent) {
  json j;
  j["model"] = model_to_json(cfg.model);
  j["instrument"] = instrument_to_json(cfg.instrument);
  j["n_outer"] = cfg.n_outer;
  j["delta"] = cfg.delta;
  j["alpha"] = cfg.alpha;
  j["rule"] = to_string(cfg.rule);
  if (cfg.dim_times > 0) j["dim_times"] = cfg.dim_times;
  j["benchmark"] = method_to_json_obj(cfg.benchmark);
  j["methods"] = json::array();
  for (const auto& m : cfg.methods) j["methods"].push_back(method_to_json_obj(m));
  j["seed"] = cfg.seed;
  j["repeats"] = cfg.repeats;
  j["threads"] = cfg.threads;
  j["out_dir"] = cfg.out_dir;
  j["write_im_cross"] = cfg.write_im_cross;
  return j.dump(indent);
}

std::string method_to_json(const MethodSpec& spec) { return method_to_json_obj(spec).dump(); }

MethodSpec method_from_json(const std::string& json_text) {
  return parse_method(json::parse(json_text));
}

}  // namespace fvar
