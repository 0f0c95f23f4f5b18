#include "nvpol/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nvpol/errors.hpp"

namespace nvpol {

bool DynamicsDataset::has_sigma() const {
  return !rows.empty() && rows.front().sigma.has_value();
}

void DynamicsDataset::validate() const {
  if (rows.size() < 6) {
    throw DataError("dataset needs at least 6 rows");
  }
  const bool want_sigma = rows.front().sigma.has_value();
  double prev = -1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DatasetRow& r = rows[i];
    const std::string where = "dataset row " + std::to_string(i + 1) + ": ";
    if (!std::isfinite(r.duration_ns) || r.duration_ns < 0.0) {
      throw DataError(where + "duration must be finite and >= 0");
    }
    if (r.duration_ns <= prev) {
      throw DataError(where + "durations must be strictly increasing");
    }
    prev = r.duration_ns;
    for (double a : {r.amp_m1, r.amp_0, r.amp_p1}) {
      if (!std::isfinite(a) || a < 0.0) {
        throw DataError(where + "amplitudes must be finite and >= 0");
      }
    }
    if (r.sigma.has_value() != want_sigma) {
      throw DataError(where + "sigma must be present on every row or none");
    }
    if (r.sigma && (!std::isfinite(*r.sigma) || *r.sigma <= 0.0)) {
      throw DataError(where + "sigma must be finite and > 0");
    }
  }
}

DynamicsDataset synth_dataset(const RateConstants& rates,
                              std::span<const double> durations_ns,
                              double noise_sigma, std::uint64_t seed,
                              double scale) {
  rates.validate();
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) {
    throw std::invalid_argument("noise_sigma must be >= 0");
  }
  if (!std::isfinite(scale) || scale <= 0.0) {
    throw std::invalid_argument("scale must be > 0");
  }
  if (durations_ns.size() < 2) {
    throw std::invalid_argument("need at least 2 durations");
  }

  std::vector<std::array<double, 3>> model(durations_ns.size());
  double peak = 0.0;
  double prev = -1.0;
  for (std::size_t i = 0; i < durations_ns.size(); ++i) {
    const double t = durations_ns[i];
    if (!std::isfinite(t) || t < 0.0 || t <= prev) {
      throw std::invalid_argument(
          "durations must be finite, >= 0 and strictly increasing");
    }
    prev = t;
    const PopulationVector p = evolve_analytic(rates, t);
    model[i] = {scale * p[1], scale * p[2], scale * p[0]};
    for (double a : model[i]) peak = std::max(peak, a);
  }

  const double sigma_abs = noise_sigma * peak;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  DynamicsDataset data;
  data.rows.reserve(durations_ns.size());
  for (std::size_t i = 0; i < durations_ns.size(); ++i) {
    DatasetRow row;
    row.duration_ns = durations_ns[i];
    double amps[3];
    for (int j = 0; j < 3; ++j) {
      double a = model[i][static_cast<std::size_t>(j)];
      if (sigma_abs > 0.0) a += sigma_abs * gauss(rng);
      // Amplitudes are magnitudes; noise cannot push them below zero.
      amps[j] = std::max(0.0, a);
    }
    row.amp_m1 = amps[0];
    row.amp_0 = amps[1];
    row.amp_p1 = amps[2];
    if (sigma_abs > 0.0) row.sigma = sigma_abs;
    data.rows.push_back(row);
  }
  return data;
}

namespace {

struct LmOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-10;  // on the scaled gradient, see below
  double step_tol = 1e-12;
};

struct LmOutcome {
  Eigen::VectorXd theta;
  Eigen::VectorXd residual;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::MatrixXd fd_jacobian(const ResidualFn& fn, const Eigen::VectorXd& theta,
                            Eigen::Index m) {
  const Eigen::Index n = theta.size();
  Eigen::MatrixXd jac(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
    Eigen::VectorXd tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    jac.col(j) = (fn(tp) - fn(tm)) / (2.0 * h);
  }
  return jac;
}

// Damped Gauss-Newton with Marquardt scaling on log-parameters. Steps are
// only accepted when they reduce the cost, so the returned point is never
// worse than the start.
LmOutcome levenberg_fit(const ResidualFn& fn, Eigen::VectorXd theta,
                        const LmOptions& opt = {}) {
  LmOutcome out;
  out.residual = fn(theta);
  out.cost = out.residual.squaredNorm();
  const Eigen::Index m = out.residual.size();

  double lambda = 1e-3;
  for (out.iterations = 0; out.iterations < opt.max_iterations;
       ++out.iterations) {
    const Eigen::MatrixXd jac = fd_jacobian(fn, theta, m);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * out.residual;

    const double jtj_max = jtj.diagonal().maxCoeff();
    if (!(jtj_max > 0.0) || !std::isfinite(jtj_max)) {
      throw NumericFailure(
          "singular Jacobian: the residuals do not depend on the parameters "
          "(is the data all zero?)");
    }

    if (grad.cwiseAbs().maxCoeff() <=
        opt.gradient_tol * std::max(1.0, out.cost)) {
      out.converged = true;
      break;
    }

    bool stepped = false;
    while (lambda <= 1e14) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() +=
          lambda * (jtj.diagonal().array() + 1e-12 * jtj_max).matrix();
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      if (ldlt.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      Eigen::VectorXd delta = ldlt.solve(-grad);
      // Log-domain parameters make huge steps cheap to propose and useless
      // to take (e^40 of anything is noise); keep the direction, cap the
      // length.
      const double dmax = delta.cwiseAbs().maxCoeff();
      if (dmax > 4.0) delta *= 4.0 / dmax;
      const Eigen::VectorXd trial = theta + delta;
      // An overly aggressive step can push exp(theta) past the range the
      // model accepts; treat an evaluation failure like an uphill step.
      Eigen::VectorXd rt;
      double ct = std::numeric_limits<double>::infinity();
      try {
        rt = fn(trial);
        ct = rt.squaredNorm();
      } catch (const std::exception&) {
      }
      if (std::isfinite(ct) && ct < out.cost) {
        const double drop = out.cost - ct;
        theta = trial;
        out.residual = rt;
        out.cost = ct;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        // Declare convergence when the accepted step stops moving anything.
        if (delta.cwiseAbs().maxCoeff() <=
                opt.step_tol * (1.0 + theta.cwiseAbs().maxCoeff()) &&
            drop <= 1e-12 * std::max(1.0, out.cost)) {
          out.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No descent direction left; we are at a (numerical) stationary point.
      out.converged = grad.cwiseAbs().maxCoeff() <=
                      1e-6 * std::max(1.0, out.cost);
      break;
    }
    if (out.converged) break;
  }
  out.theta = std::move(theta);
  return out;
}

// Covariance of the fitted parameters: s^2 (J^T J)^-1 with
// s^2 = cost / (m - n). Returns zeros when the system is too small or the
// normal matrix cannot be inverted.
Eigen::VectorXd parameter_sigmas(const ResidualFn& fn,
                                 const Eigen::VectorXd& theta, double cost,
                                 Eigen::Index m) {
  const Eigen::Index n = theta.size();
  if (m <= n) return Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd jac = fd_jacobian(fn, theta, m);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(jtj);
  if (ldlt.info() != Eigen::Success) return Eigen::VectorXd::Zero(n);
  const double s2 = cost / static_cast<double>(m - n);
  const Eigen::MatrixXd cov = s2 * ldlt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd sig(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    sig[j] = cov(j, j) > 0.0 ? std::sqrt(cov(j, j)) : 0.0;
  }
  return sig;
}

}  // namespace

FitResult fit_rate_constants(const DynamicsDataset& data,
                             const RateConstants& initial_guess,
                             bool fit_kp) {
  data.validate();
  initial_guess.validate();

  double max_amp = 0.0;
  for (const DatasetRow& r : data.rows) {
    max_amp = std::max({max_amp, r.amp_m1, r.amp_0, r.amp_p1});
  }
  if (max_amp <= 0.0) {
    throw NumericFailure(
        "singular Jacobian: all amplitudes are zero, so the scale and rate "
        "constants are unconstrained");
  }

  const bool weighted = data.has_sigma();
  const Eigen::Index n_params = fit_kp ? 4 : 3;
  const double kp_fixed = initial_guess.k_p_per_ns;

  // theta = (ln k_s, ln k_i, ln scale [, ln k_p]); the log map keeps every
  // parameter positive without constraints.
  Eigen::VectorXd theta0(n_params);
  theta0[0] = std::log(initial_guess.k_s_per_ns);
  theta0[1] = std::log(std::max(initial_guess.k_i_per_ns, 1e-8));
  theta0[2] = std::log(3.0 * max_amp);  // model starts near 1/3 of full scale
  if (fit_kp) {
    // A guess without a decay channel says nothing about where to start k_p.
    // Seeding it at 1/(2 t_max) puts the decay time on the scale of the
    // measurement window, which is where a fittable k_p has to live anyway.
    double kp0 = kp_fixed;
    if (!(kp0 > 0.0)) kp0 = 0.5 / data.rows.back().duration_ns;
    theta0[3] = std::log(kp0);
  }

  auto unpack = [&](const Eigen::VectorXd& th) {
    RateConstants r;
    r.k_s_per_ns = std::exp(th[0]);
    r.k_i_per_ns = std::exp(th[1]);
    r.k_p_per_ns = fit_kp ? std::exp(th[3]) : kp_fixed;
    r.label = initial_guess.label;
    return r;
  };

  const ResidualFn residuals = [&](const Eigen::VectorXd& th) {
    const RateConstants r = unpack(th);
    const double scale = std::exp(th[2]);
    Eigen::VectorXd res(3 * static_cast<Eigen::Index>(data.rows.size()));
    Eigen::Index k = 0;
    for (const DatasetRow& row : data.rows) {
      const PopulationVector p = evolve_analytic(r, row.duration_ns);
      const double w = weighted ? 1.0 / *row.sigma : 1.0;
      res[k++] = w * (row.amp_m1 - scale * p[1]);
      res[k++] = w * (row.amp_0 - scale * p[2]);
      res[k++] = w * (row.amp_p1 - scale * p[0]);
    }
    return res;
  };

  const LmOutcome lm = levenberg_fit(residuals, theta0);

  FitResult fit;
  fit.rates = unpack(lm.theta);
  fit.scale = std::exp(lm.theta[2]);
  fit.kp_fitted = fit_kp;
  fit.residual_norm = std::sqrt(lm.cost);
  fit.iterations = lm.iterations;
  fit.converged = lm.converged;

  const Eigen::VectorXd sig =
      parameter_sigmas(residuals, lm.theta, lm.cost, lm.residual.size());
  // Delta method back to natural units: sigma_k = k * sigma_ln_k.
  fit.sigma[0] = fit.rates.k_s_per_ns * sig[0];
  fit.sigma[1] = fit.rates.k_i_per_ns * sig[1];
  fit.sigma[2] = fit_kp ? fit.rates.k_p_per_ns * sig[3] : 0.0;
  fit.sigma[3] = fit.scale * sig[2];
  return fit;
}

ExpDecayFit fit_exp_decay(std::span<const double> durations_ns,
                          std::span<const double> totals) {
  if (durations_ns.size() != totals.size() || durations_ns.size() < 3) {
    throw std::invalid_argument(
        "need matching duration/total arrays with at least 3 points");
  }
  double prev = -1.0;
  double mean = 0.0, lo = totals[0], hi = totals[0];
  for (std::size_t i = 0; i < durations_ns.size(); ++i) {
    if (!std::isfinite(durations_ns[i]) || durations_ns[i] < 0.0 ||
        durations_ns[i] <= prev) {
      throw std::invalid_argument(
          "durations must be finite, >= 0 and strictly increasing");
    }
    prev = durations_ns[i];
    if (!std::isfinite(totals[i]) || totals[i] < 0.0) {
      throw std::invalid_argument("totals must be finite and >= 0");
    }
    mean += totals[i];
    lo = std::min(lo, totals[i]);
    hi = std::max(hi, totals[i]);
  }
  mean /= static_cast<double>(totals.size());

  ExpDecayFit out;
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mean))) {
    // Flat trace: no decay to fit.
    out.amplitude = mean;
    out.tau_ns = std::numeric_limits<double>::infinity();
    out.sigma_tau_ns = 0.0;
    out.decay_detected = false;
    return out;
  }
  if (!(hi > 0.0)) {
    throw NumericFailure("totals are all zero; decay time is undefined");
  }

  // Starting point: amplitude from the first sample, tau from where the
  // trace first drops below amplitude/e (span if it never does).
  const double a0 = std::max(totals[0], 1e-6 * hi);
  double tau0 = durations_ns.back() - durations_ns.front();
  for (std::size_t i = 0; i < totals.size(); ++i) {
    if (totals[i] < a0 / std::numbers::e_v<double>) {
      if (durations_ns[i] > 0.0) tau0 = durations_ns[i];
      break;
    }
  }
  if (!(tau0 > 0.0)) tau0 = 1.0;

  Eigen::VectorXd theta0(2);
  theta0[0] = std::log(a0);
  theta0[1] = std::log(tau0);

  const ResidualFn residuals = [&](const Eigen::VectorXd& th) {
    const double a = std::exp(th[0]);
    const double tau = std::exp(th[1]);
    Eigen::VectorXd res(static_cast<Eigen::Index>(totals.size()));
    for (std::size_t i = 0; i < totals.size(); ++i) {
      res[static_cast<Eigen::Index>(i)] =
          totals[i] - a * std::exp(-durations_ns[i] / tau);
    }
    return res;
  };

  const LmOutcome lm = levenberg_fit(residuals, theta0);
  out.amplitude = std::exp(lm.theta[0]);
  out.tau_ns = std::exp(lm.theta[1]);
  out.decay_detected = true;
  const Eigen::VectorXd sig =
      parameter_sigmas(residuals, lm.theta, lm.cost, lm.residual.size());
  out.sigma_tau_ns = out.tau_ns * sig[1];
  return out;
}

}  // namespace nvpol
