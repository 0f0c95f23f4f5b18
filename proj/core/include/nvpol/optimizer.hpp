// Protocol exploration: polarization versus repolarization duration,
// polarization versus number of transfer cycles, constrained grid search
// over both, and the signal-versus-polarization tradeoff report.
#pragma once

#include <string>
#include <vector>

#include "nvpol/pulse_engine.hpp"
#include "nvpol/readout.hpp"

namespace nvpol {

// Fixed protocol surroundings for the sweeps: which laser drives the
// initialization and repolarization segments, how long initialization runs,
// and the pulse fidelities of the transfer block.
struct SweepContext {
  RateConstants laser;
  double init_duration_ns = 4000.0;
  double mw_fidelity = 1.0;
  double rf_fidelity = 1.0;
  int cycles = 1;                    // cycle count used by the duration sweep
  double integrator_step_ns = 0.1;
};

struct DurationSweepPoint {
  double duration_ns = 0.0;
  double amp_m1 = 0.0, amp_0 = 0.0, amp_p1 = 0.0;  // m_s = 0 populations
  double total = 0.0;        // amp_m1 + amp_0 + amp_p1
  double polarization = 0.0;
};

// Polarization after [init laser, then `cycles` x (transfer + repolarize)]
// as a function of the repolarization duration. Grid: min, min+step, ...,
// up to and including max (within half a step).
std::vector<DurationSweepPoint> sweep_polarization_vs_duration(
    const SweepContext& ctx, double min_ns, double max_ns, double step_ns);

struct CycleSweepPoint {
  int cycles = 0;
  double total = 0.0;
  double polarization = 0.0;
};

// Polarization after N transfer+repolarize cycles for N = n_min..n_max,
// with the repolarization duration fixed.
std::vector<CycleSweepPoint> sweep_polarization_vs_cycles(
    const SweepContext& ctx, double repolarize_duration_ns, int n_min,
    int n_max);

struct OptimizeResult {
  double duration_ns = 0.0;
  int cycles = 0;
  double polarization = 0.0;
  double total_signal = 0.0;  // m_s = 0 population sum at readout
};

// Exhaustive search over the duration grid x cycle range for the highest
// polarization subject to total_signal >= signal_min. Throws NumericFailure
// when no grid point satisfies the constraint.
OptimizeResult optimize_protocol(const SweepContext& ctx, double min_ns,
                                 double max_ns, double step_ns, int n_min,
                                 int n_max, double signal_min);

struct TradeoffReport {
  double signal_ratio = 0.0;        // total(candidate) / total(baseline)
  double polarization_gain = 0.0;   // p(candidate) - p(baseline), absolute
  double averaging_factor = 0.0;    // 1 / signal_ratio^2 - 1, extra averaging
                                    // needed to recover the SNR lost
};

// Compares two readout results, e.g. the plain protocol versus the one with
// an added repolarization stage.
TradeoffReport tradeoff_report(const PeakSet& baseline,
                               const PeakSet& candidate);

}  // namespace nvpol
