// Rate-constant estimation from laser-dynamics data.
//
// A dataset holds line amplitudes (proportional to the m_s = 0 populations,
// grouped by nuclear projection) versus laser pulse duration. Fitting runs a
// damped Gauss-Newton (Levenberg) iteration on log-parameters, so rates and
// the scale stay positive. The model curve is the closed-form rate-equation
// solution times a free scale.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nvpol/rate_model.hpp"

namespace nvpol {

struct DatasetRow {
  double duration_ns = 0.0;
  double amp_m1 = 0.0;  // line of mi = -1
  double amp_0 = 0.0;   // line of mi =  0
  double amp_p1 = 0.0;  // line of mi = +1
  std::optional<double> sigma;  // per-row noise level, all-or-none
};

struct DynamicsDataset {
  std::vector<DatasetRow> rows;

  bool has_sigma() const;
  // Durations strictly increasing and >= 0, amplitudes finite and >= 0,
  // sigma (when present) > 0 on every row, at least 6 rows for fitting.
  void validate() const;  // throws DataError
};

// Synthetic dataset: closed-form model amplitudes times `scale`, plus i.i.d.
// Gaussian noise of standard deviation noise_sigma * max(model), clamped at
// zero (amplitudes are magnitudes). Deterministic in `seed`; noise_sigma 0
// reproduces the model exactly. Durations must be strictly increasing.
DynamicsDataset synth_dataset(const RateConstants& rates,
                              std::span<const double> durations_ns,
                              double noise_sigma, std::uint64_t seed,
                              double scale = 1.0);

struct FitResult {
  RateConstants rates;      // fitted k_s, k_i (and k_p when fit_kp)
  double scale = 1.0;       // amplitude per unit population
  bool kp_fitted = false;
  // 1-sigma uncertainties in natural units, order (k_s, k_i, k_p, scale);
  // entries for parameters that were not fitted are 0.
  std::array<double, 4> sigma{};
  double residual_norm = 0.0;  // sqrt(sum of squared weighted residuals)
  int iterations = 0;
  bool converged = false;
};

// Weighted least squares over all 3 * rows residuals. Weights are 1/sigma
// when the dataset has sigma columns, 1 otherwise. Throws NumericFailure
// with a singular-Jacobian message when the data cannot constrain the fit
// (e.g. all amplitudes zero). Non-convergence within 200 iterations is not
// an error: the best point is returned with converged = false.
FitResult fit_rate_constants(const DynamicsDataset& data,
                             const RateConstants& initial_guess,
                             bool fit_kp = false);

struct ExpDecayFit {
  double amplitude = 0.0;
  double tau_ns = 0.0;        // infinite when no decay is detected
  double sigma_tau_ns = 0.0;
  bool decay_detected = true;
};

// Fits a * exp(-t / tau) to a total-signal trace. A trace whose sample
// spread is below 1e-12 of its mean is reported as "no decay": amplitude =
// mean, tau = +infinity, decay_detected = false.
ExpDecayFit fit_exp_decay(std::span<const double> durations_ns,
                          std::span<const double> totals);

}  // namespace nvpol
