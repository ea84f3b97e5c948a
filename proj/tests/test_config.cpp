#include <doctest.h>

#include <clocale>
#include <filesystem>
#include <string>

#include "ssmc/config.hpp"
#include "ssmc/error.hpp"
#include "ssmc/io.hpp"

using namespace ssmc;

namespace {

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("empty sections give the nominal defaults") {
  const Scenario sc = parse_config("[params]\n\n[controller]\n");
  CHECK(sc.params.l_f == 0.3e-3);
  CHECK(sc.params.c_f == 330e-6);
  CHECK(sc.vdc_initial == 290.0);
  CHECK(sc.controller.lambda == 4480.0);
  CHECK(sc.controller.h == 20000.0);
  CHECK(sc.compensator.band_pass.omega0 == 314.16);
  CHECK(sc.compensator.band_pass.zeta == 2.0);
  CHECK(sc == parse_config(""));
}

TEST_CASE("invariant violations cite their line") {
  const std::string text = "# comment\n[controller]\nh = 20000\nlambda = -1\n";
  CHECK(error_line(text) == 4);
  CHECK(error_text(text).find("lambda must be > 0") != std::string::npos);
}

TEST_CASE("duplicate keys cite the first occurrence") {
  const std::string text = "[controller]\nlambda = 4000\neta = 1e7\nlambda = 5000\n";
  CHECK(error_line(text) == 4);
  CHECK(error_text(text).find("first set at line 2") != std::string::npos);
}

TEST_CASE("unknown keys, sections and stray lines are rejected") {
  CHECK(error_line("[controller]\nlamda = 1\n") == 2);
  CHECK(error_line("[plant]\n") == 1);
  CHECK(error_line("lambda = 1\n") == 1);
  CHECK(error_line("[controller]\nlambda\n") == 2);
  CHECK(error_line("[controller]\nlambda = 4,5\n") == 2);
  CHECK(error_line("[controller]\nmode = pid\n") == 2);
}

TEST_CASE("event times outside the run are rejected at their line") {
  const std::string text = "[engine]\nduration = 0.1\n[events]\nevent = 0.05 vdc_set 300\nevent = 0.2 ref_scale 0.5\n";
  CHECK(error_line(text) == 5);
  CHECK(error_line("[vdc]\nstep = 0.1 -5\n") == 2);
  CHECK(error_line("[events]\nevent = 0.1 warp 9\n") == 2);
  CHECK(error_line("[events]\nevent = 0.1 load_set phasor 1\n") == 2);
}

TEST_CASE("program steps become events in file order") {
  const Scenario sc = parse_config(
      "[reference]\nstep = 0.2 0.5 0\n[vdc]\ninitial = 400\nstep = 0.2 250\n"
      "[load]\nkind = phasor\np = 1600\nq = 800\nstep = 0.3 resistive 12\n"
      "[events]\nevent = 0.3 mode_set ssmc\n");
  REQUIRE(sc.events.size() == 5);
  CHECK(std::get<RefScale>(sc.events[0].action).factor == 0.5);
  CHECK(std::get<RefPhase>(sc.events[1].action).radians == 0.0);
  CHECK(std::get<VdcSet>(sc.events[2].action).volts == 250.0);
  CHECK(std::get<LoadSet>(sc.events[3].action).load == Load::resistive(12));
  CHECK(std::get<ModeSet>(sc.events[4].action).mode == ControlMode::kSsmc);
  CHECK(sc.load.initial == Load::phasor_sink(1600, 800));
  CHECK(sc.reference.steps.empty());
}

TEST_CASE("effective configuration round-trips") {
  const Scenario sc = parse_config(
      "[params]\nl_f = 0.31e-3\n[controller]\nmode = ssmc\nt_di = 2e-6\neta = 1.2345678901234567e7\n"
      "[compensator]\ninput = s_raw\nsat_limit = 20000\n[reference]\namplitude = 183.847763\nphase = 0.1\n"
      "[load]\nkind = resistive\nresistance = 7.5\n[vdc]\ninitial = 333.3\n"
      "[events]\nevent = 0.01 ref_phase 1.5707963267948966\nevent = 0.02 load_set none\n"
      "[engine]\nduration = 0.05\nsubsteps_per_tick = 3\ndecimation = 2\nmetric_settle = 0.01\n");
  const std::string echo = effective_config(sc);
  const Scenario again = parse_config(echo);
  CHECK(again == sc);
  CHECK(effective_config(again) == echo);
}

TEST_CASE("every bundled preset parses and round-trips") {
  for (const auto& entry : std::filesystem::directory_iterator(SSMC_FIGURES_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    const Scenario sc = parse_config_file(entry.path());
    CHECK(parse_config(effective_config(sc)) == sc);
  }
}

TEST_CASE("numbers parse independently of the C locale") {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  // Not every container ships a comma-decimal locale; the check still runs.
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  CHECK(parse_number("0.5") == 0.5);
  CHECK(parse_number("1e-5") == 1e-5);
  CHECK(parse_number("+2.5") == 2.5);
  CHECK_THROWS_AS(parse_number("0,5"), ConfigError);
  CHECK_THROWS_AS(parse_number("1.0x"), ConfigError);
  CHECK(format_decimal(0.5) == "0.5000000000");
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("sweep overrides address section.key") {
  Scenario sc;
  set_config_value(sc, "vdc.initial", "180");
  CHECK(sc.vdc_initial == 180.0);
  set_config_value(sc, "controller.t_di", "2e-6");
  CHECK(sc.controller.t_di == 2e-6);
  CHECK_THROWS_AS(set_config_value(sc, "controller.mode", "smc"), ConfigError);
  CHECK_THROWS_AS(set_config_value(sc, "vdc.nope", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(sc, "controller.lambda", "-3"), ConfigError);
  CHECK(sc.controller.lambda == 4480.0);
  sc = Scenario{};
  set_config_value(sc, "params.v_n_rms", "120");
  CHECK(sc.load.v_n_rms == 120.0);
}

TEST_CASE("decimal formatting keeps ten significant digits without exponents") {
  CHECK(format_decimal(0.0) == "0");
  CHECK(format_decimal(290.0) == "290.0000000");
  CHECK(format_decimal(-1.5717e9) == "-1571700000");
  CHECK(format_decimal(1e-5) == "0.00001000000000");
  CHECK(format_decimal(123456.789012345) == "123456.7890");
  for (double v : {3.14159265358979, -2.2e-7, 7.77e12, 1.0 / 3.0}) {
    const std::string s = format_decimal(v);
    CHECK(s.find('e') == std::string::npos);
    CHECK(std::abs(std::stod(s) - v) <= 1e-9 * std::abs(v));
  }
  CHECK(format_decimal(std::numeric_limits<double>::quiet_NaN()) == "nan");
}
