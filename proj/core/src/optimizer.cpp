#include "nvpol/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "nvpol/errors.hpp"

namespace nvpol {

namespace {

void check_grid(double min_ns, double max_ns, double step_ns) {
  if (!std::isfinite(min_ns) || !std::isfinite(max_ns) ||
      !std::isfinite(step_ns) || min_ns < 0.0 || step_ns <= 0.0 ||
      max_ns < min_ns) {
    throw std::invalid_argument("need 0 <= min <= max and step > 0");
  }
}

DurationSweepPoint point_from_state(double duration_ns,
                                    const PopulationVector& state) {
  DurationSweepPoint pt;
  pt.duration_ns = duration_ns;
  pt.amp_m1 = state[1];
  pt.amp_0 = state[2];
  pt.amp_p1 = state[0];
  pt.total = pt.amp_m1 + pt.amp_0 + pt.amp_p1;
  pt.polarization = polarization_of_state(state).value;
  return pt;
}

}  // namespace

std::vector<DurationSweepPoint> sweep_polarization_vs_duration(
    const SweepContext& ctx, double min_ns, double max_ns, double step_ns) {
  check_grid(min_ns, max_ns, step_ns);
  ctx.laser.validate();
  if (ctx.cycles < 1) {
    throw std::invalid_argument("duration sweep needs cycles >= 1");
  }

  const long n_steps =
      static_cast<long>(std::floor((max_ns - min_ns) / step_ns + 1e-9));
  std::vector<DurationSweepPoint> points;
  points.reserve(static_cast<std::size_t>(n_steps) + 1);
  for (long i = 0; i <= n_steps; ++i) {
    const double d = min_ns + static_cast<double>(i) * step_ns;
    const PopulationVector state = run_polarization_cycles(
        mixed_state(), ctx.laser, ctx.init_duration_ns, d, ctx.cycles,
        ctx.mw_fidelity, ctx.rf_fidelity, ctx.integrator_step_ns);
    points.push_back(point_from_state(d, state));
  }
  return points;
}

std::vector<CycleSweepPoint> sweep_polarization_vs_cycles(
    const SweepContext& ctx, double repolarize_duration_ns, int n_min,
    int n_max) {
  ctx.laser.validate();
  if (n_min < 0 || n_max < n_min) {
    throw std::invalid_argument("need 0 <= n_min <= n_max");
  }
  if (!std::isfinite(repolarize_duration_ns) || repolarize_duration_ns < 0.0) {
    throw std::invalid_argument("repolarize duration must be >= 0");
  }

  std::vector<CycleSweepPoint> points;
  points.reserve(static_cast<std::size_t>(n_max - n_min) + 1);
  // Incremental: the state after N cycles extends to N+1 with one more
  // transfer + repolarize round.
  PopulationVector state = apply_laser(mixed_state(), ctx.laser,
                                       ctx.init_duration_ns,
                                       ctx.integrator_step_ns);
  int done = 0;
  for (int n = n_min; n <= n_max; ++n) {
    for (; done < n; ++done) {
      state = transfer_block(state, ctx.mw_fidelity, ctx.rf_fidelity);
      state = apply_laser(state, ctx.laser, repolarize_duration_ns,
                          ctx.integrator_step_ns);
    }
    CycleSweepPoint pt;
    pt.cycles = n;
    pt.total = state[0] + state[1] + state[2];
    pt.polarization = polarization_of_state(state).value;
    points.push_back(pt);
  }
  return points;
}

OptimizeResult optimize_protocol(const SweepContext& ctx, double min_ns,
                                 double max_ns, double step_ns, int n_min,
                                 int n_max, double signal_min) {
  check_grid(min_ns, max_ns, step_ns);
  ctx.laser.validate();
  if (n_min < 1 || n_max < n_min) {
    throw std::invalid_argument("need 1 <= n_min <= n_max");
  }
  if (!std::isfinite(signal_min)) {
    throw std::invalid_argument("signal_min must be finite");
  }

  OptimizeResult best;
  bool found = false;
  const long n_steps =
      static_cast<long>(std::floor((max_ns - min_ns) / step_ns + 1e-9));
  for (long i = 0; i <= n_steps; ++i) {
    const double d = min_ns + static_cast<double>(i) * step_ns;
    PopulationVector state = apply_laser(mixed_state(), ctx.laser,
                                         ctx.init_duration_ns,
                                         ctx.integrator_step_ns);
    for (int n = 1; n <= n_max; ++n) {
      state = transfer_block(state, ctx.mw_fidelity, ctx.rf_fidelity);
      state = apply_laser(state, ctx.laser, d, ctx.integrator_step_ns);
      if (n < n_min) continue;
      const double total = state[0] + state[1] + state[2];
      if (total < signal_min) continue;
      const double p = polarization_of_state(state).value;
      if (!found || p > best.polarization) {
        best = OptimizeResult{d, n, p, total};
        found = true;
      }
    }
  }
  if (!found) {
    throw NumericFailure(
        "no protocol on the search grid reaches the requested minimum "
        "signal");
  }
  return best;
}

TradeoffReport tradeoff_report(const PeakSet& baseline,
                               const PeakSet& candidate) {
  const double tb =
      baseline.amplitudes[0] + baseline.amplitudes[1] + baseline.amplitudes[2];
  const double tc = candidate.amplitudes[0] + candidate.amplitudes[1] +
                    candidate.amplitudes[2];
  if (!(tb > 0.0) || !(tc > 0.0)) {
    throw std::invalid_argument(
        "both peak sets need a positive total to compare");
  }
  TradeoffReport rep;
  rep.signal_ratio = tc / tb;
  rep.polarization_gain = polarization_from_peaks(candidate).value -
                          polarization_from_peaks(baseline).value;
  rep.averaging_factor = 1.0 / (rep.signal_ratio * rep.signal_ratio) - 1.0;
  return rep;
}

}  // namespace nvpol
