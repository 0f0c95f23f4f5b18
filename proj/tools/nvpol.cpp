// nvpol: simulate, read out and fit the optical polarization protocol of the
// hybrid electron-nuclear spin register.
//
// Exit codes: 0 success, 1 usage, 2 malformed input (config, program or data
// files), 3 numeric failure (no convergence, no feasible protocol, broken
// self-consistency).
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nvpol/config.hpp"
#include "nvpol/dataset_io.hpp"
#include "nvpol/errors.hpp"
#include "nvpol/estimation.hpp"
#include "nvpol/manifest.hpp"
#include "nvpol/optimizer.hpp"
#include "nvpol/program_parser.hpp"
#include "nvpol/pulse_engine.hpp"
#include "nvpol/readout.hpp"
#include "nvpol/version.hpp"

namespace fs = std::filesystem;
using namespace nvpol;

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  return out;
}

Manifest make_manifest(const std::string& command_line,
                       const ConfigDocument* cfg) {
  Manifest m;
  m.tool = fmt::format("nvpol {}", kVersion);
  m.command = command_line;
  if (cfg) m.add("seed", fmt::format("{}", cfg->seed));
  return m;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) s += ' ';
    s += argv[i];
  }
  return s;
}

RamseySettings readout_settings(const ConfigDocument& cfg,
                                const RamseyReadout& r) {
  RamseySettings rs = cfg.readout;
  rs.tau_max_ns = r.tau_max_ns;
  rs.tau_step_ns = r.tau_step_ns;
  rs.detuning_mhz = r.detuning_mhz.value_or(cfg.readout.detuning_mhz);
  return rs;
}

void write_polarization_txt(const fs::path& path, const PeakSet& peaks,
                            const Polarization& pol) {
  auto out = open_out(path);
  out << "p = " << format_double(pol.value) << '\n'
      << "clamped = " << (pol.clamped ? 1 : 0) << '\n'
      << "amp_m1 = " << format_double(peaks.amplitudes[0]) << '\n'
      << "amp_0 = " << format_double(peaks.amplitudes[1]) << '\n'
      << "amp_p1 = " << format_double(peaks.amplitudes[2]) << '\n';
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

// Writes fid/spectrum/peaks/polarization files for one readout point.
Polarization write_readout_bundle(const fs::path& dir,
                                  const std::string& stem,
                                  const PopulationVector& state,
                                  const ConfigDocument& cfg,
                                  const RamseySettings& rs) {
  const FidTrace fid = simulate_fid(state, cfg.register_params, rs);
  const Spectrum sp = spectrum_of_fid(fid, rs.zero_pad_factor);
  const PeakSet peaks =
      peak_amplitudes(sp, fid.line_frequencies_mhz, rs.window_mhz);
  const Polarization pol = polarization_from_peaks(peaks);
  save_fid_csv(fid, dir / (stem + "_fid.csv"));
  save_spectrum_csv(sp, dir / (stem + "_spectrum.csv"));
  save_peaks_csv(peaks, dir / (stem + "_peaks.csv"));
  write_polarization_txt(dir / (stem + "_polarization.txt"), peaks, pol);
  return pol;
}

int cmd_simulate(const fs::path& program_path, const fs::path& config_path,
                 const fs::path& out_dir, const std::string& command_line) {
  const ConfigDocument cfg = load_config(config_path);
  const TransitionTable table = transition_frequencies(cfg.register_params);
  const std::string text = read_text_file(program_path);

  PulseProgram program;
  try {
    program = parse_pulse_program(text, cfg.rate_presets, table);
  } catch (const ProgramError& ex) {
    throw ProgramError(program_path.string() + ": " + ex.what(), ex.line,
                       ex.column);
  }

  ProtocolContext ctx;
  ctx.params = cfg.register_params;
  ctx.mw_fidelity = cfg.mw_fidelity;
  ctx.rf_fidelity = cfg.rf_fidelity;
  ctx.readout_detuning_mhz = cfg.readout.detuning_mhz;
  ctx.integrator_step_ns = cfg.integrator_step_ns;

  const RunResult res = run_program(program, ctx);

  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "trace.csv");
    out << "event,description,pop0,pop1,pop2,pop3,pop4,pop5,pop6,pop7,pop8,"
           "total\n";
    for (const TraceEntry& e : res.trace) {
      out << e.event_index << ",\"" << e.description << '"';
      for (int i = 0; i < kLevels; ++i) {
        out << ',' << format_double(e.state[i]);
      }
      out << ',' << format_double(e.state.sum()) << '\n';
    }
    out.flush();
    if (!out) throw DataError("write failed: trace.csv");
  }
  save_state(res.final_state, out_dir / "final_state.txt");

  int n_readout = 0;
  for (const TraceEntry& e : res.trace) {
    if (!e.is_readout || !e.readout) continue;
    ++n_readout;
    const std::string stem = fmt::format("readout{}", n_readout);
    const Polarization pol = write_readout_bundle(
        out_dir, stem, e.state, cfg, readout_settings(cfg, *e.readout));
    std::cout << fmt::format("{}: p = {}{}\n", stem, format_double(pol.value),
                             pol.clamped ? " (clamped)" : "");
  }

  Manifest m = make_manifest(command_line, &cfg);
  m.add_input("program", program_path);
  m.add_input("config", config_path);
  m.add("events", fmt::format("{}", res.trace.size()));
  m.add("readouts", fmt::format("{}", n_readout));
  write_manifest(m, out_dir);

  std::cout << fmt::format("simulate: {} events, final total population {}\n",
                           res.trace.size(),
                           format_double(res.final_state.sum()));
  return 0;
}

int cmd_spectrum(const fs::path& config_path, const fs::path& state_path,
                 const fs::path& out_dir, const std::string& command_line) {
  const ConfigDocument cfg = load_config(config_path);
  const PopulationVector state = load_state(state_path);

  fs::create_directories(out_dir);
  const Polarization pol =
      write_readout_bundle(out_dir, "readout", state, cfg, cfg.readout);

  Manifest m = make_manifest(command_line, &cfg);
  m.add_input("config", config_path);
  m.add_input("state", state_path);
  write_manifest(m, out_dir);

  std::cout << fmt::format("spectrum: p = {}{}\n", format_double(pol.value),
                           pol.clamped ? " (clamped)" : "");
  return 0;
}

int cmd_fit(const fs::path& data_path, const fs::path& config_path,
            const std::string& guess_label, bool fit_kp,
            const fs::path& out_dir, const std::string& command_line) {
  const ConfigDocument cfg = load_config(config_path);
  const DynamicsDataset data = load_dataset(data_path);

  const auto it = cfg.rate_presets.find(guess_label);
  if (it == cfg.rate_presets.end()) {
    throw ConfigError("no rate preset '" + guess_label +
                      "' to use as the initial guess");
  }
  // A guess that carries a loss channel implies the dataset has one, so k_p
  // joins the fit automatically; --fit-kp forces it for loss-free guesses.
  const bool fit_kp_eff = fit_kp || it->second.k_p_per_ns > 0.0;
  const FitResult fit = fit_rate_constants(data, it->second, fit_kp_eff);

  auto line = [](const std::string& key, const std::string& value) {
    return key + " = " + value + "\n";
  };
  std::string report;
  report += line("preset_guess", guess_label);
  report += line("k_s_per_ns", format_double(fit.rates.k_s_per_ns));
  report += line("t_s_ns", format_double(1.0 / fit.rates.k_s_per_ns));
  report += line("sigma_k_s_per_ns", format_double(fit.sigma[0]));
  report += line("k_i_per_ns", format_double(fit.rates.k_i_per_ns));
  report += line("t_i_ns", format_double(1.0 / fit.rates.k_i_per_ns));
  report += line("sigma_k_i_per_ns", format_double(fit.sigma[1]));
  report += line("k_p_per_ns", format_double(fit.rates.k_p_per_ns));
  if (fit.rates.k_p_per_ns > 0.0) {
    report += line("t_p_ns", format_double(1.0 / fit.rates.k_p_per_ns));
  }
  report += line("sigma_k_p_per_ns", format_double(fit.sigma[2]));
  report += line("scale", format_double(fit.scale));
  report += line("sigma_scale", format_double(fit.sigma[3]));
  report += line("residual_norm", format_double(fit.residual_norm));
  report += line("iterations", fmt::format("{}", fit.iterations));
  report += line("converged", fit.converged ? "1" : "0");
  std::cout << report;

  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "fit.csv");
    out << "k_s_per_ns,sigma_k_s,k_i_per_ns,sigma_k_i,k_p_per_ns,sigma_k_p,"
           "scale,sigma_scale,residual_norm,iterations,converged\n";
    out << format_double(fit.rates.k_s_per_ns) << ','
        << format_double(fit.sigma[0]) << ','
        << format_double(fit.rates.k_i_per_ns) << ','
        << format_double(fit.sigma[1]) << ','
        << format_double(fit.rates.k_p_per_ns) << ','
        << format_double(fit.sigma[2]) << ',' << format_double(fit.scale)
        << ',' << format_double(fit.sigma[3]) << ','
        << format_double(fit.residual_norm) << ',' << fit.iterations << ','
        << (fit.converged ? 1 : 0) << '\n';
    out.flush();
    if (!out) throw DataError("write failed: fit.csv");
  }

  Manifest m = make_manifest(command_line, &cfg);
  m.add_input("data", data_path);
  m.add_input("config", config_path);
  m.add("fit_kp", fit_kp_eff ? "1" : "0");
  write_manifest(m, out_dir);

  if (!fit.converged) {
    std::cerr << "fit did not converge within the iteration budget; "
                 "reporting the best point found\n";
    return 3;
  }
  return 0;
}

int cmd_sweep(const std::string& variable, const fs::path& config_path,
              const fs::path& out_dir, const std::string& command_line) {
  const ConfigDocument cfg = load_config(config_path);

  SweepContext ctx;
  ctx.laser = cfg.rate_presets.at(cfg.sweep.wavelength);
  ctx.init_duration_ns = cfg.sweep.init_duration_ns;
  ctx.mw_fidelity = cfg.mw_fidelity;
  ctx.rf_fidelity = cfg.rf_fidelity;
  ctx.cycles = cfg.sweep.cycles;
  ctx.integrator_step_ns = cfg.integrator_step_ns;

  fs::create_directories(out_dir);
  if (variable == "duration") {
    const auto points = sweep_polarization_vs_duration(
        ctx, cfg.sweep.duration_min_ns, cfg.sweep.duration_max_ns,
        cfg.sweep.duration_step_ns);
    save_duration_sweep_csv(points, out_dir / "sweep_duration.csv");
    std::cout << fmt::format("sweep: {} duration points written\n",
                             points.size());
  } else if (variable == "cycles") {
    const auto points = sweep_polarization_vs_cycles(
        ctx, cfg.sweep.repolarize_duration_ns, cfg.sweep.cycles_min,
        cfg.sweep.cycles_max);
    save_cycle_sweep_csv(points, out_dir / "sweep_cycles.csv");
    std::cout << fmt::format("sweep: {} cycle points written\n",
                             points.size());
  } else {
    throw CLI::ValidationError("--variable must be 'duration' or 'cycles'");
  }

  Manifest m = make_manifest(command_line, &cfg);
  m.add_input("config", config_path);
  m.add("variable", variable);
  write_manifest(m, out_dir);
  return 0;
}

int cmd_optimize(const fs::path& config_path, double signal_min,
                 const fs::path& out_dir, const std::string& command_line) {
  const ConfigDocument cfg = load_config(config_path);

  SweepContext ctx;
  ctx.laser = cfg.rate_presets.at(cfg.sweep.wavelength);
  ctx.init_duration_ns = cfg.sweep.init_duration_ns;
  ctx.mw_fidelity = cfg.mw_fidelity;
  ctx.rf_fidelity = cfg.rf_fidelity;
  ctx.integrator_step_ns = cfg.integrator_step_ns;

  const OptimizeResult best = optimize_protocol(
      ctx, cfg.sweep.duration_min_ns, cfg.sweep.duration_max_ns,
      cfg.sweep.duration_step_ns, std::max(1, cfg.sweep.cycles_min),
      cfg.sweep.cycles_max, signal_min);

  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "optimize.txt");
    out << "duration_ns = " << format_double(best.duration_ns) << '\n'
        << "cycles = " << best.cycles << '\n'
        << "polarization = " << format_double(best.polarization) << '\n'
        << "total_signal = " << format_double(best.total_signal) << '\n'
        << "signal_min = " << format_double(signal_min) << '\n';
    out.flush();
    if (!out) throw DataError("write failed: optimize.txt");
  }

  Manifest m = make_manifest(command_line, &cfg);
  m.add_input("config", config_path);
  m.add("signal_min", format_double(signal_min));
  write_manifest(m, out_dir);

  std::cout << fmt::format(
      "optimize: duration {} ns, {} cycles, p = {}, total = {}\n",
      format_double(best.duration_ns), best.cycles,
      format_double(best.polarization), format_double(best.total_signal));
  return 0;
}

int cmd_synth(const std::string& preset_label, double t_max_ns, int points,
              double noise, double scale, std::uint64_t seed,
              const fs::path& out_dir, const std::string& command_line) {
  const auto preset = rate_preset(preset_label);
  if (!preset) {
    throw ConfigError("unknown preset '" + preset_label +
                      "' (expected 520, 532 or 594)");
  }
  if (points < 6 || t_max_ns <= 0.0) {
    throw CLI::ValidationError("need --points >= 6 and --t-max > 0");
  }
  std::vector<double> durations(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    durations[static_cast<std::size_t>(i)] =
        t_max_ns * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  const DynamicsDataset data =
      synth_dataset(*preset, durations, noise, seed, scale);

  fs::create_directories(out_dir);
  save_dataset(data, out_dir / "dataset.csv");

  Manifest m = make_manifest(command_line, nullptr);
  m.add("seed", fmt::format("{}", seed));
  m.add("preset", preset_label);
  m.add("noise", format_double(noise));
  write_manifest(m, out_dir);

  std::cout << fmt::format("synth: {} rows written to {}\n", data.rows.size(),
                           (out_dir / "dataset.csv").string());
  return 0;
}

int cmd_selftest() {
  // Closed form versus RK4 across the presets and a k_s = 3 k_i pinch where
  // the closed form switches to its series branch.
  std::vector<RateConstants> cases = {preset_520(), preset_532(),
                                      preset_594()};
  for (double ratio : {0.999, 1.0, 1.001}) {
    RateConstants r;
    r.k_s_per_ns = 1.0 / 101.0;
    r.k_i_per_ns = ratio * r.k_s_per_ns / 3.0;
    r.label = fmt::format("ratio{}", ratio);
    cases.push_back(r);
  }

  double worst = 0.0;
  double worst_conservation = 0.0;
  for (const RateConstants& r : cases) {
    for (int i = 0; i <= 20; ++i) {
      const double t = 250.0 * i;
      const PopulationVector a = evolve_analytic(r, t);
      const PopulationVector n =
          evolve_numeric(r, nuclear_polarized_state(), t, 0.1);
      worst = std::max(worst, (a - n).cwiseAbs().maxCoeff());
      const double expected_total = std::exp(-r.k_p_per_ns * t);
      worst_conservation =
          std::max(worst_conservation, std::abs(a.sum() - expected_total));
      if (a.minCoeff() < -1e-15) {
        std::cout << "selftest: FAIL (negative population)\n";
        return 3;
      }
    }
  }

  std::cout << fmt::format(
      "selftest: max |analytic - rk4| = {:.3e}, max conservation residual = "
      "{:.3e}\n",
      worst, worst_conservation);
  if (worst < 1e-9 && worst_conservation < 1e-12) {
    std::cout << "selftest: PASS\n";
    return 0;
  }
  std::cout << "selftest: FAIL\n";
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid spin register polarization toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  const std::string command_line = join_args(argc, argv);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a pulse program");
  fs::path sim_program, sim_config, sim_out;
  sim->add_option("--program", sim_program, "pulse program file")->required();
  sim->add_option("--config", sim_config, "configuration file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();

  // spectrum
  auto* spec = app.add_subcommand("spectrum",
                                  "Ramsey readout of a population state");
  fs::path spc_config, spc_state, spc_out;
  spec->add_option("--config", spc_config, "configuration file")->required();
  spec->add_option("--state", spc_state, "population state file")->required();
  spec->add_option("--out", spc_out, "output directory")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit rate constants to a dataset");
  fs::path fit_data, fit_config, fit_out = ".";
  std::string fit_guess = "532";
  bool fit_kp = false;
  fit->add_option("--data", fit_data, "dataset CSV")->required();
  fit->add_option("--config", fit_config, "configuration file")->required();
  fit->add_option("--guess", fit_guess,
                  "rate preset used as the initial guess");
  fit->add_flag("--fit-kp", fit_kp, "also fit the uniform loss rate k_p");
  fit->add_option("--out", fit_out, "output directory (default: .)");

  // sweep
  auto* swp = app.add_subcommand("sweep", "sweep a protocol parameter");
  std::string swp_variable;
  fs::path swp_config, swp_out;
  swp->add_option("--variable", swp_variable, "'duration' or 'cycles'")
      ->required();
  swp->add_option("--config", swp_config, "configuration file")->required();
  swp->add_option("--out", swp_out, "output directory")->required();

  // optimize
  auto* opt = app.add_subcommand("optimize",
                                 "search the duration x cycles grid");
  fs::path opt_config, opt_out;
  double opt_signal_min = 0.0;
  opt->add_option("--config", opt_config, "configuration file")->required();
  opt->add_option("--signal-min", opt_signal_min,
                  "minimum total readout signal")
      ->required();
  opt->add_option("--out", opt_out, "output directory")->required();

  // synth
  auto* syn = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string syn_preset = "532";
  double syn_tmax = 3000.0, syn_noise = 0.0, syn_scale = 1.0;
  int syn_points = 40;
  std::uint64_t syn_seed = 1;
  fs::path syn_out;
  syn->add_option("--preset", syn_preset, "rate preset (520, 532, 594)");
  syn->add_option("--t-max", syn_tmax, "last duration in ns");
  syn->add_option("--points", syn_points, "number of rows");
  syn->add_option("--noise", syn_noise, "relative noise level");
  syn->add_option("--scale", syn_scale, "amplitude scale");
  syn->add_option("--seed", syn_seed, "RNG seed");
  syn->add_option("--out", syn_out, "output directory")->required();

  // selftest
  app.add_subcommand("selftest",
                     "check the closed-form solution against the integrator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_program, sim_config, sim_out, command_line);
    }
    if (spec->parsed()) {
      return cmd_spectrum(spc_config, spc_state, spc_out, command_line);
    }
    if (fit->parsed()) {
      return cmd_fit(fit_data, fit_config, fit_guess, fit_kp, fit_out,
                     command_line);
    }
    if (swp->parsed()) {
      return cmd_sweep(swp_variable, swp_config, swp_out, command_line);
    }
    if (opt->parsed()) {
      return cmd_optimize(opt_config, opt_signal_min, opt_out, command_line);
    }
    if (syn->parsed()) {
      return cmd_synth(syn_preset, syn_tmax, syn_points, syn_noise, syn_scale,
                       syn_seed, syn_out, command_line);
    }
    return cmd_selftest();
  } catch (const CLI::ValidationError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  } catch (const ParseFailure& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const NumericFailure& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  }
}
