#include <string>

#include <gtest/gtest.h>

#include "atomgw/scenario.hpp"

using namespace atomgw;

TEST(Scenario, DefaultsDescribeStrontiumWorkingPoint) {
  const Scenario s;
  EXPECT_EQ(s.sequence.N, 300);
  EXPECT_EQ(s.sequence.T, 50.0);
  EXPECT_EQ(s.geometry.L, 1e6);
  EXPECT_DOUBLE_EQ(s.sequence.k, s.atom.omega_a / c_light);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.build_sequence().size(), std::size_t(8 * 300 - 1));
}

TEST(Scenario, EmitParseRoundTrip) {
  Scenario s;
  s.sequence.N = 7;
  s.sequence.T = 12.5;
  s.sequence.mirror = MirrorVariant::secondary_first;
  s.gw.h = 3.3e-21;
  s.gw.phi0 = 0.1234567890123456789;
  s.noise.config.laser_phase_jitter = 0.25;
  s.noise.seed = 18446744073709551615ull;
  s.analysis.mode = EngineMode::direct;
  s.analysis.corner_locked = false;
  s.analysis.sweep = "gw.h=1e-21:1e-20:3";
  const std::string text = emit_scenario(s);
  const Scenario back = parse_scenario(text);
  EXPECT_TRUE(back == s);
  EXPECT_EQ(emit_scenario(back), text);
  EXPECT_EQ(scenario_digest(back), scenario_digest(s));
  EXPECT_EQ(back.gw.phi0, s.gw.phi0);
  EXPECT_EQ(*back.noise.seed, 18446744073709551615ull);
}

TEST(Scenario, EveryKeyRoundTripsThroughText) {
  const Scenario s;
  for (const auto& key : scenario_keys()) {
    Scenario t;
    const std::string v = get_scenario_value(s, key);
    if (v.empty()) continue;
    set_scenario_value(t, key, v);
    EXPECT_EQ(get_scenario_value(t, key), v) << key;
  }
}

TEST(Scenario, OptionalKeysOmittedWhenUnset) {
  const std::string text = emit_scenario(Scenario{});
  EXPECT_EQ(text.find("noise.seed"), std::string::npos);
  EXPECT_EQ(text.find("analysis.sweep"), std::string::npos);
  EXPECT_NE(text.find("sequence.N = 300"), std::string::npos);
}

TEST(Scenario, DigestTracksContent) {
  Scenario a;
  Scenario b;
  EXPECT_EQ(scenario_digest(a), scenario_digest(b));
  b.gw.h = 2e-20;
  EXPECT_NE(scenario_digest(a), scenario_digest(b));
}

TEST(ParseScenario, CommentsBlanksAndDefaults) {
  const auto s = parse_scenario("# comment\n\n  sequence.N = 4   # pairs\ngw.h=1e-19\n");
  EXPECT_EQ(s.sequence.N, 4);
  EXPECT_EQ(s.gw.h, 1e-19);
  EXPECT_EQ(s.sequence.T, 50.0);
}

TEST(ParseScenario, RejectsInvalidN) {
  EXPECT_THROW(parse_scenario("sequence.N = 0\n"), ValidationError);
  EXPECT_THROW(parse_scenario("sequence.N = 2.5\n"), ParseError);
}

TEST(ParseScenario, ReportsLineOfBadInput) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_scenario(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("sequence.N = 3\n# ok\ngeometry.bogus = 1\n"), 3u);
  EXPECT_EQ(line_of("sequence.N = 3\nsequence.N = 4\n"), 2u);
  EXPECT_EQ(line_of("gw.h 1e-20\n"), 1u);
  EXPECT_EQ(line_of("\n = 4\n"), 2u);
  EXPECT_EQ(line_of("gw.h = abc\n"), 1u);
  EXPECT_EQ(line_of("analysis.mode = fast\n"), 1u);
  EXPECT_EQ(line_of("analysis.corner_locked = maybe\n"), 1u);
}

TEST(ParseScenario, CrossFieldValidation) {
  EXPECT_THROW(parse_scenario("geometry.x2 = 2e6\n"), ValidationError);
  EXPECT_THROW(parse_scenario("gw.h = 1e-2\n"), ValidationError);
  EXPECT_THROW(parse_scenario("sequence.T = 0.1\n"), ValidationError);
  EXPECT_THROW(parse_scenario("analysis.f_min_hz = 20\n"), ValidationError);
  EXPECT_THROW(parse_scenario("noise.delta_T_jitter = -1\n"), ValidationError);
}

TEST(SetScenarioValue, UnknownKeyThrows) {
  Scenario s;
  EXPECT_THROW(set_scenario_value(s, "nope", "1"), ValidationError);
  EXPECT_THROW(get_scenario_value(s, "nope"), ValidationError);
}
