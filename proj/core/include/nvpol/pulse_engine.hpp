// Population-level pulse sequencing: laser repolarization segments, MW/RF
// pi-pulse population swaps, the four-swap transfer block, and execution of
// parsed pulse programs with a per-event state trace.
//
// Pulses act on populations only. A pi pulse of fidelity f on levels (a,b)
// performs a' = (1-f) a + f b, b' = f a + (1-f) b; coherences are assumed to
// have decayed between events, which is the regime the protocol runs in
// (pulses are separated by waiting or laser segments much longer than T2*).
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nvpol/rate_model.hpp"
#include "nvpol/spin_model.hpp"

namespace nvpol {

struct LaserPulse {
  RateConstants rates;
  double duration_ns = 0.0;
};

struct SwapPulse {
  LevelLabel a;
  LevelLabel b;
  TransitionKind kind = TransitionKind::MW;
  // Population exchange fraction in [0,1]; empty means "use the context
  // default for this pulse kind".
  std::optional<double> fidelity;
};

// Marks a readout point: populations are untouched, but program runners
// record the state so a Ramsey spectrum can be computed there.
struct RamseyReadout {
  double tau_max_ns = 0.0;
  double tau_step_ns = 0.0;
  std::optional<double> detuning_mhz;  // empty: context default
};

struct PulseStatement;

struct RepeatBlock {
  int count = 1;  // 1..100
  std::vector<PulseStatement> body;
};

struct PulseStatement {
  std::variant<LaserPulse, SwapPulse, RamseyReadout, RepeatBlock> node;
};

struct PulseProgram {
  std::vector<PulseStatement> statements;

  // Structural checks: repeat counts in [1,100], repeat nesting at most 2
  // deep, laser durations >= 0, swap fidelities in [0,1], Ramsey grids
  // well-formed. Throws std::invalid_argument.
  void validate() const;
};

// Defaults threaded through program execution.
struct ProtocolContext {
  RegisterParams params;
  double mw_fidelity = 0.95;
  double rf_fidelity = 0.95;
  double readout_detuning_mhz = 5.0;
  double integrator_step_ns = 0.1;
};

// Laser segment: RK4 integration of the rate equation.
PopulationVector apply_laser(const PopulationVector& state,
                             const RateConstants& rates, double duration_ns,
                             double step_ns = 0.1);

// Pi-pulse population swap with exchange fraction f in [0,1].
PopulationVector apply_swap(const PopulationVector& state, LevelLabel a,
                            LevelLabel b, double fidelity);

// The polarization-transfer block. Population is moved out of |0,-1> and
// |0,+1> into |-1,0> and |+1,0> by two MW swaps [ |0,-1><->|-1,-1>,
// |0,+1><->|+1,+1> ] followed by two RF swaps [ |-1,-1><->|-1,0>,
// |+1,+1><->|+1,0> ]. At fidelity 1 applied to electron_polarized_state()
// the result is exactly nuclear_polarized_state().
PopulationVector transfer_block(const PopulationVector& state,
                                double mw_fidelity, double rf_fidelity);
PopulationVector transfer_block(const PopulationVector& state,
                                double fidelity);

struct TraceEntry {
  int event_index = 0;      // 0-based, in execution order after unrolling
  std::string description;  // e.g. "laser 532 4000ns"
  bool is_readout = false;
  // Present on readout entries: the Ramsey grid requested at this point.
  std::optional<RamseyReadout> readout;
  PopulationVector state;   // state after the event
};

struct RunResult {
  std::vector<TraceEntry> trace;  // one entry per executed event
  PopulationVector final_state;
};

// Executes a validated program from `initial` (mixed_state() by default).
// Repeat blocks are unrolled. Errors thrown by an event are rethrown as
// std::runtime_error tagged with the event index and description.
RunResult run_program(const PulseProgram& program, const ProtocolContext& ctx,
                      const PopulationVector& initial);
RunResult run_program(const PulseProgram& program, const ProtocolContext& ctx);

// One initialization laser segment followed by `cycles` repetitions of
// [transfer block + repolarizing laser segment]. The building block of the
// sweep and optimizer routines.
PopulationVector run_polarization_cycles(const PopulationVector& initial,
                                         const RateConstants& laser_rates,
                                         double init_duration_ns,
                                         double repolarize_duration_ns,
                                         int cycles, double mw_fidelity,
                                         double rf_fidelity,
                                         double step_ns = 0.1);

}  // namespace nvpol
