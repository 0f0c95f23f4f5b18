#include "nvpol/pulse_engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace nvpol {

namespace {

void check_fidelity(double f) {
  if (!std::isfinite(f) || f < 0.0 || f > 1.0) {
    throw std::invalid_argument("pulse fidelity must be in [0,1]");
  }
}

void validate_statements(const std::vector<PulseStatement>& stmts,
                         int repeat_depth) {
  for (const PulseStatement& st : stmts) {
    if (const auto* laser = std::get_if<LaserPulse>(&st.node)) {
      laser->rates.validate();
      if (!std::isfinite(laser->duration_ns) || laser->duration_ns < 0.0) {
        throw std::invalid_argument("laser duration must be >= 0");
      }
    } else if (const auto* swap = std::get_if<SwapPulse>(&st.node)) {
      level_index(swap->a);
      level_index(swap->b);
      if (swap->a == swap->b) {
        throw std::invalid_argument("swap needs two distinct levels");
      }
      if (swap->kind == TransitionKind::MW &&
          (swap->a.mi != swap->b.mi || swap->a.ms == swap->b.ms)) {
        throw std::invalid_argument(
            "mw pulse must flip the electron projection only");
      }
      if (swap->kind == TransitionKind::RF &&
          (swap->a.ms != swap->b.ms || swap->a.mi == swap->b.mi)) {
        throw std::invalid_argument(
            "rf pulse must flip the nuclear projection only");
      }
      if (swap->fidelity) check_fidelity(*swap->fidelity);
    } else if (const auto* ram = std::get_if<RamseyReadout>(&st.node)) {
      if (!std::isfinite(ram->tau_step_ns) || ram->tau_step_ns <= 0.0 ||
          !std::isfinite(ram->tau_max_ns) ||
          ram->tau_max_ns < ram->tau_step_ns) {
        throw std::invalid_argument("ramsey needs tau_max >= tau_step > 0");
      }
      if (ram->detuning_mhz && !std::isfinite(*ram->detuning_mhz)) {
        throw std::invalid_argument("ramsey detuning must be finite");
      }
    } else if (const auto* rep = std::get_if<RepeatBlock>(&st.node)) {
      if (rep->count < 1 || rep->count > 100) {
        throw std::invalid_argument("repeat count must be in 1..100");
      }
      if (repeat_depth + 1 > 2) {
        throw std::invalid_argument("repeat blocks nest at most 2 deep");
      }
      if (rep->body.empty()) {
        throw std::invalid_argument("repeat block must not be empty");
      }
      validate_statements(rep->body, repeat_depth + 1);
    }
  }
}

}  // namespace

void PulseProgram::validate() const { validate_statements(statements, 0); }

PopulationVector apply_laser(const PopulationVector& state,
                             const RateConstants& rates, double duration_ns,
                             double step_ns) {
  return evolve_numeric(rates, state, duration_ns, step_ns);
}

PopulationVector apply_swap(const PopulationVector& state, LevelLabel a,
                            LevelLabel b, double fidelity) {
  check_fidelity(fidelity);
  const int i = level_index(a);
  const int j = level_index(b);
  if (i == j) {
    throw std::invalid_argument("swap needs two distinct levels");
  }
  PopulationVector out = state;
  out[i] = (1.0 - fidelity) * state[i] + fidelity * state[j];
  out[j] = fidelity * state[i] + (1.0 - fidelity) * state[j];
  return out;
}

PopulationVector transfer_block(const PopulationVector& state,
                                double mw_fidelity, double rf_fidelity) {
  PopulationVector p = state;
  p = apply_swap(p, {0, -1}, {-1, -1}, mw_fidelity);
  p = apply_swap(p, {0, +1}, {+1, +1}, mw_fidelity);
  p = apply_swap(p, {-1, -1}, {-1, 0}, rf_fidelity);
  p = apply_swap(p, {+1, +1}, {+1, 0}, rf_fidelity);
  return p;
}

PopulationVector transfer_block(const PopulationVector& state,
                                double fidelity) {
  return transfer_block(state, fidelity, fidelity);
}

namespace {

std::string pair_text(LevelLabel a, LevelLabel b) {
  return to_string(a) + "<->" + to_string(b);
}

class Executor {
 public:
  Executor(const ProtocolContext& ctx, PopulationVector state)
      : ctx_(ctx), state_(std::move(state)) {}

  void run(const std::vector<PulseStatement>& stmts) {
    for (const PulseStatement& st : stmts) {
      std::visit([this](const auto& node) { exec(node); }, st.node);
    }
  }

  RunResult take() && {
    RunResult r;
    r.trace = std::move(trace_);
    r.final_state = state_;
    return r;
  }

 private:
  void exec(const LaserPulse& e) {
    const std::string what =
        fmt::format("laser {} {}ns", e.rates.label.empty() ? "?" : e.rates.label,
                    e.duration_ns);
    guarded(what, [&] {
      state_ = apply_laser(state_, e.rates, e.duration_ns,
                           ctx_.integrator_step_ns);
    });
    push(what, false);
  }

  void exec(const SwapPulse& e) {
    const bool mw = e.kind == TransitionKind::MW;
    const double f =
        e.fidelity.value_or(mw ? ctx_.mw_fidelity : ctx_.rf_fidelity);
    const std::string what =
        fmt::format("{} pi {}", mw ? "mw" : "rf", pair_text(e.a, e.b));
    guarded(what, [&] { state_ = apply_swap(state_, e.a, e.b, f); });
    push(what, false);
  }

  void exec(const RamseyReadout& e) {
    push(fmt::format("ramsey tau {}ns step {}ns", e.tau_max_ns, e.tau_step_ns),
         true);
    trace_.back().readout = e;
  }

  void exec(const RepeatBlock& b) {
    for (int n = 0; n < b.count; ++n) run(b.body);
  }

  template <typename Fn>
  void guarded(const std::string& what, Fn&& fn) {
    try {
      fn();
    } catch (const std::exception& ex) {
      throw std::runtime_error(fmt::format("event {} ({}): {}", index_, what,
                                           ex.what()));
    }
  }

  void push(std::string what, bool is_readout) {
    TraceEntry entry;
    entry.event_index = index_++;
    entry.description = std::move(what);
    entry.is_readout = is_readout;
    entry.state = state_;
    trace_.push_back(std::move(entry));
  }

  const ProtocolContext& ctx_;
  PopulationVector state_;
  std::vector<TraceEntry> trace_;
  int index_ = 0;
};

}  // namespace

RunResult run_program(const PulseProgram& program, const ProtocolContext& ctx,
                      const PopulationVector& initial) {
  program.validate();
  ctx.params.validate();
  if (!is_population_vector(initial)) {
    throw std::invalid_argument("initial state is not a population vector");
  }
  Executor ex(ctx, initial);
  ex.run(program.statements);
  return std::move(ex).take();
}

RunResult run_program(const PulseProgram& program, const ProtocolContext& ctx) {
  return run_program(program, ctx, mixed_state());
}

PopulationVector run_polarization_cycles(const PopulationVector& initial,
                                         const RateConstants& laser_rates,
                                         double init_duration_ns,
                                         double repolarize_duration_ns,
                                         int cycles, double mw_fidelity,
                                         double rf_fidelity, double step_ns) {
  if (cycles < 0) {
    throw std::invalid_argument("cycle count must be >= 0");
  }
  PopulationVector state =
      apply_laser(initial, laser_rates, init_duration_ns, step_ns);
  for (int n = 0; n < cycles; ++n) {
    state = transfer_block(state, mw_fidelity, rf_fidelity);
    state = apply_laser(state, laser_rates, repolarize_duration_ns, step_ns);
  }
  return state;
}

}  // namespace nvpol
