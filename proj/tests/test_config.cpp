#include <doctest.h>

#include <stdexcept>
#include <string>
#include <variant>

#include "fvar/config.hpp"

using namespace fvar;

namespace {

#ifndef FVAR_CONFIG_DIR
#error "FVAR_CONFIG_DIR must point at the bundled configs"
#endif

const std::string kConfigDir = FVAR_CONFIG_DIR;

std::string minimal_config(const std::string& extra = "") {
  return std::string(R"({
    "model": {"type": "gbm", "spot": 100.0, "rate_dom": 0.05, "rate_fgn": 0.0, "sigma": 0.2},
    "instrument": {"type": "european_call", "strike": 100.0, "maturity": 1.0},
    "n_outer": 100,
    "delta": 0.25,
    "alpha": 0.01,
    "rule": "full",
    "benchmark": {"method": "nested_mc", "n_inner": 50},
    "methods": [{"method": "raw_pseudo", "k": 20, "key": "x"}],
    "seed": 3,
    "out_dir": "out/test")") +
         extra + "\n}";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("bundled configs parse and carry the documented setups") {
  auto combo = load_config(kConfigDir + "/callcombination.json");
  CHECK(std::holds_alternative<GbmParams>(combo.model));
  CHECK(std::get<GbmParams>(combo.model).spot0 == doctest::Approx(85.0));
  CHECK(std::holds_alternative<CallCombination>(combo.instrument));
  CHECK(combo.n_outer == 20000);
  CHECK(combo.delta == doctest::Approx(0.05));
  CHECK(combo.dim_times == 25);
  CHECK(std::holds_alternative<NestedMcSpec>(combo.benchmark));
  CHECK(combo.methods.size() == 8);

  auto fx = load_config(kConfigDir + "/fxcall.json");
  CHECK(std::holds_alternative<FxCall>(fx.instrument));
  CHECK(std::get<GbmParams>(fx.model).rate_fgn == doctest::Approx(0.02));
  bool has_qreg_v = false;
  for (const auto& m : fx.methods)
    if (auto* q = std::get_if<QuantileRegSpec>(&m))
      has_qreg_v = has_qreg_v || q->basis.feature == FeatureKind::V;
  CHECK(has_qreg_v);

  auto swap = load_config(kConfigDir + "/irswap.json");
  CHECK(std::holds_alternative<G1ppParams>(swap.model));
  CHECK(std::holds_alternative<IrSwap>(swap.instrument));
}

TEST_CASE("minimal config parses with defaults") {
  auto cfg = parse_config(minimal_config());
  CHECK(cfg.n_outer == 100);
  CHECK(cfg.alpha == doctest::Approx(0.01));
  CHECK(cfg.rule == InclusionRule::Full);
  CHECK(cfg.dim_times == 0);
  CHECK(cfg.repeats == 3);
  CHECK(cfg.threads == 0);
  CHECK(cfg.write_im_cross == false);
  REQUIRE(cfg.methods.size() == 1);
  CHECK(std::holds_alternative<RawPseudoSpec>(cfg.methods[0]));
}

TEST_CASE("unknown keys are rejected everywhere") {
  CHECK_THROWS_AS((void)parse_config(minimal_config(R"(, "typo_key": 1)")), std::invalid_argument);
  // Unknown key nested inside a method spec.
  auto bad = minimal_config();
  bad.replace(bad.find("\"k\": 20"), 7, "\"kk\": 20");
  CHECK_THROWS_AS((void)parse_config(bad), std::invalid_argument);
  // Unknown key inside the model.
  auto bad2 = minimal_config();
  bad2.replace(bad2.find("\"spot\""), 6, "\"spott\"");
  CHECK_THROWS_AS((void)parse_config(bad2), std::invalid_argument);
}

TEST_CASE("constraint violations name the key") {
  auto with = [&](const std::string& key, const std::string& from, const std::string& to) {
    auto text = minimal_config();
    auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, from.size(), to);
    try {
      (void)parse_config(text);
      FAIL("expected a parse error for ", key);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  with("alpha", "\"alpha\": 0.01", "\"alpha\": 1.5");
  with("alpha", "\"alpha\": 0.01", "\"alpha\": 0.0");
  with("n_outer", "\"n_outer\": 100", "\"n_outer\": 0");
  with("delta", "\"delta\": 0.25", "\"delta\": -0.1");
  with("sigma", "\"sigma\": 0.2", "\"sigma\": -0.2");
  with("strike", "\"strike\": 100.0", "\"strike\": -5");
  with("repeats", "\"seed\": 3", "\"seed\": 3, \"repeats\": 0");
}

TEST_CASE("rule and method strings parse") {
  for (auto [name, want] :
       std::initializer_list<std::pair<const char*, InclusionRule>>{
           {"full", InclusionRule::Full},
           {"none", InclusionRule::None},
           {"positive_only", InclusionRule::PositiveOnly},
           {"negative_only", InclusionRule::NegativeOnly}}) {
    auto text = minimal_config();
    text.replace(text.find("\"rule\": \"full\""), 14,
                 std::string("\"rule\": \"") + name + "\"");
    CHECK(parse_config(text).rule == want);
  }
  auto bad = minimal_config();
  bad.replace(bad.find("\"rule\": \"full\""), 14, "\"rule\": \"sometimes\"");
  CHECK_THROWS_AS((void)parse_config(bad), std::invalid_argument);
}

TEST_CASE("every method spec round trips through json") {
  std::vector<MethodSpec> methods = {
      NestedMcSpec{123},
      GlsmcSpec{{BasisKind::Laguerre, 9, FeatureKind::V, 0, 1}},
      JlsmcSpec{{BasisKind::Monomial, 4, FeatureKind::X, 0, 1}, 150, JlsmcCorrection::Discard, 8},
      QuantileRegSpec{{BasisKind::Laguerre, 7, FeatureKind::V, 0, 1}, 16, {}},
      DeltaGammaNormalSpec{},
      DeltaGammaCfSpec{},
      JppSpec{JppInner{64}, 0.7},
      JppSpec{JppPseudo{300, 25, PseudoKey::ByV}, 0.524},
      RawPseudoSpec{111, PseudoKey::ByV},
  };
  for (const auto& m : methods) {
    auto back = method_from_json(method_to_json(m));
    CHECK(method_id(back) == method_id(m));
  }
}

TEST_CASE("config json round trip preserves the parsed structure") {
  auto cfg = load_config(kConfigDir + "/fxcall.json");
  auto back = parse_config(to_json_string(cfg));
  CHECK(back.n_outer == cfg.n_outer);
  CHECK(back.seed == cfg.seed);
  CHECK(back.delta == cfg.delta);
  CHECK(back.methods.size() == cfg.methods.size());
  for (size_t i = 0; i < cfg.methods.size(); ++i)
    CHECK(method_id(back.methods[i]) == method_id(cfg.methods[i]));
  CHECK(method_id(back.benchmark) == method_id(cfg.benchmark));
  CHECK(back.out_dir == cfg.out_dir);
}

TEST_CASE("instrument variants parse") {
  auto swap_cfg = std::string(R"({
    "model": {"type": "g1pp", "mean_reversion": 0.1, "sigma": 0.015, "flat_rate": 0.03},
    "instrument": {"type": "ir_swap", "fixed_rate": 0.04, "spread": 0.0025,
                   "fixed_period": 1.0, "float_period": 0.25, "maturity": 2.0,
                   "notional_first": 1000000.0, "notional_last": 1200000.0},
    "n_outer": 10,
    "delta": 0.1,
    "benchmark": {"method": "nested_mc", "n_inner": 10},
    "methods": [{"method": "dg_normal"}],
    "out_dir": "out/x"
  })");
  auto cfg = parse_config(swap_cfg);
  const auto& sw = std::get<IrSwap>(cfg.instrument);
  CHECK(sw.fixed_rate == doctest::Approx(0.04));
  REQUIRE(sw.notional_schedule.size() == 2);
  CHECK(sw.notional_schedule.front().second == doctest::Approx(1000000.0));
  CHECK(sw.notional_schedule.back().second == doctest::Approx(1200000.0));

  // notional_last defaults to notional_first: a flat schedule.
  auto flat = swap_cfg;
  flat.replace(flat.find(R"(, "notional_last": 1200000.0)"), 28, "");
  const auto& sw2 = std::get<IrSwap>(parse_config(flat).instrument);
  for (const auto& [year, amount] : sw2.notional_schedule)
    CHECK(amount == doctest::Approx(1000000.0));
}

TEST_CASE("missing required keys are reported") {
  auto text = minimal_config();
  auto pos = text.find(R"("model")");
  text.replace(pos, text.find(R"("instrument")") - pos, "");
  CHECK_THROWS_AS((void)parse_config(text), std::invalid_argument);
}

}  // TEST_SUITE
