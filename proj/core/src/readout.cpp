#include "nvpol/readout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "nvpol/errors.hpp"
#include "nvpol/spin_model.hpp"

namespace nvpol {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Phase of a line at f MHz after tau ns: 2 pi f tau * 1e-3.
double phase(double f_mhz, double tau_ns) {
  return kTwoPi * f_mhz * tau_ns * 1e-3;
}

std::size_t sample_count(double tau_max_ns, double tau_step_ns) {
  return static_cast<std::size_t>(
             std::floor(tau_max_ns / tau_step_ns + 1e-9)) +
         1;
}

// DFT of `signal` zero-padded to n * pad, bins 0..N/2 (one-sided).
// Naive O(n N) sum; the grids here are a few thousand points.
std::vector<std::complex<double>> dft_one_sided(
    const std::vector<double>& signal, int pad) {
  const std::size_t n = signal.size();
  const std::size_t n_padded = n * static_cast<std::size_t>(pad);
  const std::size_t n_bins = n_padded / 2 + 1;
  std::vector<std::complex<double>> out(n_bins);
  for (std::size_t q = 0; q < n_bins; ++q) {
    const double w = -kTwoPi * static_cast<double>(q) /
                     static_cast<double>(n_padded);
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double a = w * static_cast<double>(k);
      re += signal[k] * std::cos(a);
      im += signal[k] * std::sin(a);
    }
    out[q] = {re, im};
  }
  return out;
}

std::vector<double> template_fid(double f_mhz, double tau_step_ns,
                                 std::size_t n, double t2_star_ns) {
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k) * tau_step_ns;
    s[k] = std::cos(phase(f_mhz, tau)) * std::exp(-tau / t2_star_ns);
  }
  return s;
}

// Bin indices within window_mhz/2 of f_mhz. Throws when the window falls
// outside the spectral range.
std::vector<std::size_t> window_bins(const Spectrum& sp, double f_mhz,
                                     double window_mhz) {
  const double half = window_mhz / 2.0;
  if (f_mhz - half < -1e-12 || f_mhz + half > sp.frequency_mhz.back() + 1e-12) {
    throw std::invalid_argument(
        "analysis window extends outside the spectral range");
  }
  std::vector<std::size_t> bins;
  for (std::size_t q = 0; q < sp.frequency_mhz.size(); ++q) {
    if (std::abs(sp.frequency_mhz[q] - f_mhz) <= half) bins.push_back(q);
  }
  if (bins.empty()) {
    throw std::invalid_argument("analysis window contains no frequency bins");
  }
  return bins;
}

void check_windows(const std::array<double, 3>& lines, double window_mhz) {
  if (!(window_mhz > 0.0) || !std::isfinite(window_mhz)) {
    throw std::invalid_argument("window width must be > 0");
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(lines[static_cast<std::size_t>(i)] -
                   lines[static_cast<std::size_t>(j)]) < window_mhz) {
        throw std::invalid_argument(
            "line analysis windows overlap; shrink window_mhz or separate "
            "the lines");
      }
    }
  }
}

void check_spectrum(const Spectrum& sp) {
  if (sp.amplitude.empty() || sp.frequency_mhz.size() != sp.amplitude.size() ||
      sp.tau_step_ns <= 0.0 || sp.n_time_samples == 0 ||
      sp.zero_pad_factor < 1 || sp.t2_star_ns <= 0.0) {
    throw std::invalid_argument("spectrum is missing transform provenance");
  }
}

}  // namespace

void RamseySettings::validate() const {
  if (!std::isfinite(tau_step_ns) || tau_step_ns <= 0.0 ||
      !std::isfinite(tau_max_ns) || tau_max_ns <= 0.0) {
    throw std::invalid_argument("tau grid must be positive");
  }
  if (sample_count(tau_max_ns, tau_step_ns) < 10) {
    throw std::invalid_argument("tau grid needs at least 10 samples");
  }
  if (!std::isfinite(detuning_mhz)) {
    throw std::invalid_argument("detuning must be finite");
  }
  if (!std::isfinite(t2_star_ns) || t2_star_ns <= 0.0) {
    throw std::invalid_argument("t2_star_ns must be > 0");
  }
  if (zero_pad_factor < 1) {
    throw std::invalid_argument("zero_pad_factor must be >= 1");
  }
  if (!std::isfinite(window_mhz) || window_mhz <= 0.0) {
    throw std::invalid_argument("window_mhz must be > 0");
  }
}

FidTrace simulate_fid(const PopulationVector& state,
                      const RegisterParams& params,
                      const RamseySettings& settings) {
  settings.validate();
  if (!is_population_vector(state)) {
    throw std::invalid_argument("state is not a population vector");
  }

  const auto lab_lines = readout_line_frequencies(params);
  FidTrace fid;
  fid.tau_step_ns = settings.tau_step_ns;
  fid.t2_star_ns = settings.t2_star_ns;
  // Reference frequency sits on the mi = 0 line; each line lands at the
  // detuning plus its offset from that reference.
  for (int m = 0; m < 3; ++m) {
    fid.line_frequencies_mhz[static_cast<std::size_t>(m)] =
        settings.detuning_mhz + lab_lines[static_cast<std::size_t>(m)] -
        lab_lines[1];
  }
  fid.line_weights = {state[1], state[2], state[0]};  // mi = -1, 0, +1

  const std::size_t n = sample_count(settings.tau_max_ns, settings.tau_step_ns);
  fid.tau_ns.resize(n);
  fid.signal.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k) * settings.tau_step_ns;
    double s = 0.0;
    for (int m = 0; m < 3; ++m) {
      s += fid.line_weights[static_cast<std::size_t>(m)] *
           std::cos(phase(fid.line_frequencies_mhz[static_cast<std::size_t>(m)],
                          tau));
    }
    fid.tau_ns[k] = tau;
    fid.signal[k] = s * std::exp(-tau / settings.t2_star_ns);
  }
  return fid;
}

Spectrum spectrum_of_fid(const FidTrace& fid, int zero_pad_factor) {
  if (fid.signal.size() < 2 || fid.signal.size() != fid.tau_ns.size()) {
    throw std::invalid_argument("FID trace needs at least 2 samples");
  }
  if (fid.tau_step_ns <= 0.0 || fid.t2_star_ns <= 0.0) {
    throw std::invalid_argument("FID trace is missing its grid metadata");
  }
  if (zero_pad_factor < 1) {
    throw std::invalid_argument("zero_pad_factor must be >= 1");
  }

  Spectrum sp;
  sp.tau_step_ns = fid.tau_step_ns;
  sp.n_time_samples = fid.signal.size();
  sp.zero_pad_factor = zero_pad_factor;
  sp.t2_star_ns = fid.t2_star_ns;
  sp.amplitude = dft_one_sided(fid.signal, zero_pad_factor);

  const std::size_t n_padded =
      fid.signal.size() * static_cast<std::size_t>(zero_pad_factor);
  const double df_mhz = 1e3 / (static_cast<double>(n_padded) * fid.tau_step_ns);
  sp.frequency_mhz.resize(sp.amplitude.size());
  sp.magnitude.resize(sp.amplitude.size());
  for (std::size_t q = 0; q < sp.amplitude.size(); ++q) {
    sp.frequency_mhz[q] = df_mhz * static_cast<double>(q);
    sp.magnitude[q] = std::abs(sp.amplitude[q]);
  }
  return sp;
}

PeakSet peak_amplitudes(const Spectrum& spectrum,
                        const std::array<double, 3>& line_frequencies_mhz,
                        double window_mhz) {
  check_spectrum(spectrum);
  check_windows(line_frequencies_mhz, window_mhz);

  // Union of the window bins (windows are disjoint by construction).
  std::array<std::vector<std::size_t>, 3> bins;
  std::vector<std::size_t> all;
  for (int j = 0; j < 3; ++j) {
    bins[static_cast<std::size_t>(j)] = window_bins(
        spectrum, line_frequencies_mhz[static_cast<std::size_t>(j)],
        window_mhz);
    all.insert(all.end(), bins[static_cast<std::size_t>(j)].begin(),
               bins[static_cast<std::size_t>(j)].end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  // Unit-amplitude reference line per expected frequency, pushed through the
  // same sampling, padding and DFT as the data.
  std::array<std::vector<std::complex<double>>, 3> ref;
  for (int j = 0; j < 3; ++j) {
    ref[static_cast<std::size_t>(j)] = dft_one_sided(
        template_fid(line_frequencies_mhz[static_cast<std::size_t>(j)],
                     spectrum.tau_step_ns, spectrum.n_time_samples,
                     spectrum.t2_star_ns),
        spectrum.zero_pad_factor);
  }

  // Least squares on the selected bins, real and imaginary parts stacked.
  const std::size_t rows = 2 * all.size();
  Eigen::MatrixXd design(rows, 3);
  Eigen::VectorXd target(rows);
  for (std::size_t r = 0; r < all.size(); ++r) {
    const std::size_t q = all[r];
    target[static_cast<Eigen::Index>(2 * r)] = spectrum.amplitude[q].real();
    target[static_cast<Eigen::Index>(2 * r + 1)] = spectrum.amplitude[q].imag();
    for (int j = 0; j < 3; ++j) {
      design(static_cast<Eigen::Index>(2 * r), j) =
          ref[static_cast<std::size_t>(j)][q].real();
      design(static_cast<Eigen::Index>(2 * r + 1), j) =
          ref[static_cast<std::size_t>(j)][q].imag();
    }
  }
  const Eigen::Matrix3d normal = design.transpose() * design;
  const Eigen::Vector3d rhs = design.transpose() * target;
  Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
  if (ldlt.info() != Eigen::Success) {
    throw NumericFailure("line template system is singular");
  }
  const Eigen::Vector3d a = ldlt.solve(rhs);

  PeakSet peaks;
  for (int j = 0; j < 3; ++j) {
    // Populations are non-negative; tiny negative values are rounding dust.
    peaks.amplitudes[static_cast<std::size_t>(j)] = std::max(0.0, a[j]);
  }
  return peaks;
}

PeakSet integrated_peak_magnitudes(
    const Spectrum& spectrum, const std::array<double, 3>& line_frequencies_mhz,
    double window_mhz) {
  check_spectrum(spectrum);
  check_windows(line_frequencies_mhz, window_mhz);

  PeakSet peaks;
  for (int j = 0; j < 3; ++j) {
    const auto bins = window_bins(
        spectrum, line_frequencies_mhz[static_cast<std::size_t>(j)],
        window_mhz);
    const auto ref = dft_one_sided(
        template_fid(line_frequencies_mhz[static_cast<std::size_t>(j)],
                     spectrum.tau_step_ns, spectrum.n_time_samples,
                     spectrum.t2_star_ns),
        spectrum.zero_pad_factor);
    double data_sum = 0.0, ref_sum = 0.0;
    for (std::size_t q : bins) {
      data_sum += spectrum.magnitude[q];
      ref_sum += std::abs(ref[q]);
    }
    if (ref_sum <= 0.0) {
      throw NumericFailure("reference line has no weight in its window");
    }
    peaks.amplitudes[static_cast<std::size_t>(j)] = data_sum / ref_sum;
  }
  return peaks;
}

Polarization polarization_from_peaks(const PeakSet& peaks) {
  for (double a : peaks.amplitudes) {
    if (!std::isfinite(a)) {
      throw std::invalid_argument("line amplitudes must be finite");
    }
  }
  const double sum =
      peaks.amplitudes[0] + peaks.amplitudes[1] + peaks.amplitudes[2];
  if (!(sum > 0.0)) {
    throw std::invalid_argument(
        "line amplitudes sum to zero; polarization is undefined");
  }
  Polarization pol;
  pol.value = (3.0 * peaks.amplitudes[1] / sum - 1.0) / 2.0;
  if (pol.value < -0.5) {
    pol.value = -0.5;
    pol.clamped = true;
  } else if (pol.value > 1.0) {
    pol.value = 1.0;
    pol.clamped = true;
  }
  return pol;
}

Polarization polarization_of_state(const PopulationVector& state) {
  if (!is_population_vector(state)) {
    throw std::invalid_argument("state is not a population vector");
  }
  return polarization_from_peaks(PeakSet{{state[1], state[2], state[0]}});
}

}  // namespace nvpol
