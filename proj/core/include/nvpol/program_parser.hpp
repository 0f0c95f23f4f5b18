// Text form of pulse programs.
//
// Grammar (one statement per line, '#' starts a comment):
//
//   program    := { statement }
//   statement  := laser | pulse | ramsey | repeat
//   laser      := "laser" WAVELENGTH DURATION
//   pulse      := ("mw" | "rf") "pi" TRANSITION [ "fidelity" NUMBER ]
//   ramsey     := "ramsey" "tau" DURATION "step" DURATION
//                  [ "detuning" NUMBER "MHz" ]
//   repeat     := "repeat" INT "{" { statement } "}"
//   TRANSITION := "(" MS "," MI ")" "<->" "(" MS "," MI ")"
//   WAVELENGTH := "520nm" | "532nm" | "594nm" | <label in the preset table>
//   DURATION   := NUMBER ("ns" | "us")
//
// Repeat counts are 1..100 and blocks nest at most 2 deep. MW pulses must
// flip the electron projection only; RF pulses the nuclear projection only,
// and each must match one of the four driven transitions.
#pragma once

#include <map>
#include <string>
#include <string_view>

#include "nvpol/pulse_engine.hpp"

namespace nvpol {

// Parses program text, resolving wavelength labels against `presets` and
// checking transitions against the four-entry table. Parse and resolution
// problems throw ProgramError carrying 1-based line and column.
PulseProgram parse_pulse_program(std::string_view text,
                                 const std::map<std::string, RateConstants>& presets,
                                 const TransitionTable& transitions);

// Canonical text form: one statement per line, two-space indentation inside
// repeat blocks, durations in ns, optional clauses printed only when set.
// parse(print(p)) reproduces p exactly.
std::string print_pulse_program(const PulseProgram& program);

}  // namespace nvpol
