// Ramsey readout of the nuclear populations: free-induction-decay synthesis,
// discrete Fourier spectra, per-line amplitude extraction, and the scalar
// polarization figure.
//
// The FID is measured on the m_s = 0 <-> -1 electron transition, so each
// nuclear projection mi contributes one line whose weight is the population
// of |0,mi>:
//
//   s(tau) = sum_mi P(|0,mi>) cos(2 pi f_mi tau) exp(-tau / T2*)
//
// with f_mi the offset of the |0,mi> <-> |-1,mi> line from the chosen
// reference frequency plus the deliberate detuning.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "nvpol/rate_model.hpp"
#include "nvpol/register_params.hpp"

namespace nvpol {

struct RamseySettings {
  double tau_max_ns = 4000.0;
  double tau_step_ns = 10.0;
  double detuning_mhz = 5.0;   // shifts all lines away from zero frequency
  double t2_star_ns = 10000.0;
  int zero_pad_factor = 4;     // >= 1; 1 means no padding
  double window_mhz = 1.0;     // full width of each line's analysis window

  void validate() const;  // throws std::invalid_argument
};

struct FidTrace {
  std::vector<double> tau_ns;   // uniform grid starting at 0
  std::vector<double> signal;
  double tau_step_ns = 0.0;
  double t2_star_ns = 0.0;
  std::array<double, 3> line_frequencies_mhz{};  // baseband, order mi=-1,0,+1
  std::array<double, 3> line_weights{};          // populations behind each line
};

// Synthesizes the FID for `state` with line positions taken from the spin
// model. The reference frequency is the mi = 0 line, so the three lines sit
// at detuning + (f_mi - f_0). Requires at least 10 samples.
FidTrace simulate_fid(const PopulationVector& state,
                      const RegisterParams& params,
                      const RamseySettings& settings);

struct Spectrum {
  std::vector<double> frequency_mhz;               // 0 .. Nyquist, uniform
  std::vector<double> magnitude;                   // |DFT| per bin
  std::vector<std::complex<double>> amplitude;     // complex DFT per bin
  // Provenance of the transform, needed to build matched line templates.
  double tau_step_ns = 0.0;
  std::size_t n_time_samples = 0;
  int zero_pad_factor = 1;
  double t2_star_ns = 0.0;
};

// One-sided DFT of the (optionally zero-padded) trace. Plain rectangular
// truncation, no apodization; Parseval's identity holds against the padded
// sequence. Frequency resolution after padding is
// 1 / (zero_pad_factor * n * tau_step).
Spectrum spectrum_of_fid(const FidTrace& fid, int zero_pad_factor = 4);

struct PeakSet {
  // Line amplitudes in readout order mi = -1, 0, +1. Arbitrary common scale;
  // only ratios matter downstream.
  std::array<double, 3> amplitudes{};
};

// Recovers the three line amplitudes from a spectrum by linear least squares
// against unit-amplitude reference lines pushed through the identical
// transform pipeline. Because the pipeline is linear in the populations this
// inverts it to rounding error when the line positions are right. Windows of
// full width window_mhz around each expected frequency select the bins used;
// windows must not overlap and must lie inside the spectral range.
PeakSet peak_amplitudes(const Spectrum& spectrum,
                        const std::array<double, 3>& line_frequencies_mhz,
                        double window_mhz);

// Simpler estimate: background-free integral of the magnitude over each
// window, normalized by the integral of a matched unit line. Biased by tail
// overlap between lines; kept as a cross-check.
PeakSet integrated_peak_magnitudes(const Spectrum& spectrum,
                                   const std::array<double, 3>& line_frequencies_mhz,
                                   double window_mhz);

struct Polarization {
  double value = 0.0;   // (3 a0/(a-+a0+a+) - 1)/2, clamped to [-1/2, 1]
  bool clamped = false;
};

// Nuclear polarization from line amplitudes. Throws std::invalid_argument
// when the amplitudes are all zero (or negative-sum), since the ratio is
// then undefined.
Polarization polarization_from_peaks(const PeakSet& peaks);

// Same figure taken directly from the m_s = 0 populations of a state.
Polarization polarization_of_state(const PopulationVector& state);

}  // namespace nvpol
