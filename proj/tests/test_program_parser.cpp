#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "nvpol/errors.hpp"
#include "nvpol/program_parser.hpp"
#include "nvpol/register_params.hpp"
#include "nvpol/spin_model.hpp"
#include "program_corpus.hpp"

using namespace nvpol;

namespace {

const TransitionTable& transitions() {
  static const TransitionTable t = transition_frequencies(RegisterParams{});
  return t;
}

PulseProgram parse(const std::string& text) {
  return parse_pulse_program(text, testsupport::corpus_presets(),
                             transitions());
}

}  // namespace

TEST_CASE("every valid corpus program parses") {
  CHECK(testsupport::valid_programs().size() >= 20);
  for (const auto& vp : testsupport::valid_programs()) {
    CAPTURE(vp.name);
    CHECK_NOTHROW(parse(vp.text));
  }
}

TEST_CASE("every invalid corpus program is rejected with a position") {
  CHECK(testsupport::invalid_programs().size() >= 20);
  for (const auto& ip : testsupport::invalid_programs()) {
    CAPTURE(ip.name);
    CAPTURE(ip.text);
    try {
      parse(ip.text);
      FAIL("program accepted: " << ip.name);
    } catch (const ProgramError& ex) {
      CAPTURE(ex.what());
      CHECK(ex.line == ip.line);
      if (ip.column != 0) CHECK(ex.column == ip.column);
      // the position is also part of the message
      const std::string what = ex.what();
      CHECK(what.find("line " + std::to_string(ex.line)) != std::string::npos);
    }
  }
}

TEST_CASE("printing and reparsing is the identity") {
  for (const auto& vp : testsupport::valid_programs()) {
    CAPTURE(vp.name);
    const PulseProgram p1 = parse(vp.text);
    const std::string canon = print_pulse_program(p1);
    const PulseProgram p2 = parse(canon);
    CHECK(testsupport::programs_equal(p1.statements, p2.statements));
    // the canonical form is a fixed point of print
    CHECK(print_pulse_program(p2) == canon);
  }
}

TEST_CASE("canonical text forms") {
  CHECK(print_pulse_program(parse("laser 532nm 4us\n")) ==
        "laser 532nm 4000ns\n");
  CHECK(print_pulse_program(parse("laser 532 700ns\n")) ==
        "laser 532nm 700ns\n");
  CHECK(print_pulse_program(parse("mw pi ( 0 , 1 ) <-> ( 1 , 1 )\n")) ==
        "mw pi (0,+1)<->(+1,+1)\n");
  CHECK(print_pulse_program(parse("mw pi (-1,-1)<->(0,-1)\n")) ==
        "mw pi (-1,-1)<->(0,-1)\n");
  CHECK(print_pulse_program(parse("rf pi (+1,+1)<->(+1,0) fidelity 0.9\n")) ==
        "rf pi (+1,+1)<->(+1,0) fidelity 0.9\n");
  CHECK(print_pulse_program(parse("mw pi (0,-1)<->(-1,-1)\n")) ==
        "mw pi (0,-1)<->(-1,-1)\n");
  CHECK(print_pulse_program(parse("ramsey tau 4us step 10ns detuning 5 MHz\n"))
        == "ramsey tau 4000ns step 10ns detuning 5MHz\n");
  CHECK(print_pulse_program(parse("ramsey tau 1us step 10ns\n")) ==
        "ramsey tau 1000ns step 10ns\n");
  CHECK(print_pulse_program(
            parse("repeat 2 { laser 532nm 100ns repeat 2 { "
                  "mw pi (0,-1)<->(-1,-1) } }")) ==
        "repeat 2 {\n"
        "  laser 532nm 100ns\n"
        "  repeat 2 {\n"
        "    mw pi (0,-1)<->(-1,-1)\n"
        "  }\n"
        "}\n");
  CHECK(print_pulse_program(parse("")) == "");
}

TEST_CASE("parsed values land in the right fields") {
  SUBCASE("laser") {
    const PulseProgram p = parse("laser 594nm 0.5us\n");
    REQUIRE(p.statements.size() == 1);
    const auto* laser = std::get_if<LaserPulse>(&p.statements[0].node);
    REQUIRE(laser != nullptr);
    CHECK(laser->duration_ns == 500.0);
    CHECK(laser->rates.label == "594");
    CHECK(testsupport::rates_equal(laser->rates, preset_594()));
  }
  SUBCASE("swap with default fidelity") {
    const PulseProgram p = parse("mw pi (0,+1)<->(+1,+1)\n");
    const auto* swap = std::get_if<SwapPulse>(&p.statements[0].node);
    REQUIRE(swap != nullptr);
    CHECK(swap->kind == TransitionKind::MW);
    CHECK(swap->a == LevelLabel{0, +1});
    CHECK(swap->b == LevelLabel{+1, +1});
    CHECK_FALSE(swap->fidelity.has_value());
  }
  SUBCASE("swap with explicit fidelity") {
    const PulseProgram p = parse("rf pi (-1,-1)<->(-1,0) fidelity 0.85\n");
    const auto* swap = std::get_if<SwapPulse>(&p.statements[0].node);
    REQUIRE(swap != nullptr);
    CHECK(swap->kind == TransitionKind::RF);
    CHECK(*swap->fidelity == 0.85);
  }
  SUBCASE("ramsey") {
    const PulseProgram p = parse("ramsey tau 2us step 5ns detuning -3.5MHz\n");
    const auto* ram = std::get_if<RamseyReadout>(&p.statements[0].node);
    REQUIRE(ram != nullptr);
    CHECK(ram->tau_max_ns == 2000.0);
    CHECK(ram->tau_step_ns == 5.0);
    CHECK(*ram->detuning_mhz == -3.5);
  }
  SUBCASE("ramsey without detuning keeps the field empty") {
    const PulseProgram p = parse("ramsey tau 1us step 10ns\n");
    const auto* ram = std::get_if<RamseyReadout>(&p.statements[0].node);
    REQUIRE(ram != nullptr);
    CHECK_FALSE(ram->detuning_mhz.has_value());
  }
  SUBCASE("repeat") {
    const PulseProgram p = parse("repeat 7 { laser 520nm 9ns }\n");
    const auto* rep = std::get_if<RepeatBlock>(&p.statements[0].node);
    REQUIRE(rep != nullptr);
    CHECK(rep->count == 7);
    REQUIRE(rep->body.size() == 1);
    CHECK(std::holds_alternative<LaserPulse>(rep->body[0].node));
  }
}

TEST_CASE("wavelength labels resolve against the preset table") {
  auto presets = testsupport::corpus_presets();
  RateConstants custom;
  custom.k_s_per_ns = 0.02;
  custom.k_i_per_ns = 1e-4;
  custom.label = "custom";
  presets["custom"] = custom;

  const PulseProgram p =
      parse_pulse_program("laser custom 100ns\n", presets, transitions());
  const auto* laser = std::get_if<LaserPulse>(&p.statements[0].node);
  REQUIRE(laser != nullptr);
  CHECK(testsupport::rates_equal(laser->rates, custom));
  // a non-numeric label prints without the nm suffix and round-trips
  CHECK(print_pulse_program(p) == "laser custom 100ns\n");
  CHECK_NOTHROW(
      parse_pulse_program(print_pulse_program(p), presets, transitions()));
}
