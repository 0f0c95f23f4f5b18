#include "nvpol/rate_model.hpp"

#include <cmath>
#include <stdexcept>

namespace nvpol {

void RateConstants::validate() const {
  if (!std::isfinite(k_s_per_ns) || !std::isfinite(k_i_per_ns) ||
      !std::isfinite(k_p_per_ns)) {
    throw std::invalid_argument("rate constants must be finite");
  }
  if (k_s_per_ns <= 0.0) {
    throw std::invalid_argument("k_s_per_ns must be > 0");
  }
  if (k_i_per_ns < 0.0 || k_p_per_ns < 0.0) {
    throw std::invalid_argument("k_i_per_ns and k_p_per_ns must be >= 0");
  }
}

RateConstants preset_520() {
  return RateConstants{1.0 / 170.0, 1.0 / 6400.0, 0.0, "520"};
}

RateConstants preset_532() {
  return RateConstants{1.0 / 101.0, 1.0 / 8400.0, 0.0, "532"};
}

RateConstants preset_594() {
  return RateConstants{1.0 / 110.0, 1.0 / 16600.0, 1.0 / 20400.0, "594"};
}

std::optional<RateConstants> rate_preset(const std::string& label) {
  if (label == "520") return preset_520();
  if (label == "532") return preset_532();
  if (label == "594") return preset_594();
  return std::nullopt;
}

Matrix9 build_transition_matrix(const RateConstants& rates) {
  rates.validate();
  const double ks = rates.k_s_per_ns;
  const double ki = rates.k_i_per_ns;

  Matrix9 m = Matrix9::Zero();
  // Uniform exchange among the three m_s = 0 levels (indices 0..2).
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r != c) m(r, c) = ki;
    }
  }
  // Each m_s = +-1 level drains at k_s into the m_s = 0 level with the same
  // nuclear projection.
  for (int i = 3; i < kLevels; ++i) {
    const LevelLabel l = kBasis[static_cast<std::size_t>(i)];
    m(level_index({0, l.mi}), i) += ks;
  }
  // Balance each diagonal entry against its column so every column sums to
  // zero exactly and the generator conserves population bit for bit.
  for (int c = 0; c < kLevels; ++c) {
    double out = 0.0;
    for (int r = 0; r < kLevels; ++r) {
      if (r != c) out += m(r, c);
    }
    m(c, c) = -out;
  }
  return m;
}

PopulationVector mixed_state() {
  return PopulationVector::Constant(1.0 / 9.0);
}

PopulationVector electron_polarized_state() {
  PopulationVector p = PopulationVector::Zero();
  p[0] = p[1] = p[2] = 1.0 / 3.0;
  return p;
}

PopulationVector nuclear_polarized_state() {
  PopulationVector p = PopulationVector::Zero();
  p[2] = p[5] = p[8] = 1.0 / 3.0;
  return p;
}

PopulationVector evolve_analytic(const RateConstants& rates, double t_ns) {
  rates.validate();
  if (!std::isfinite(t_ns) || t_ns < 0.0) {
    throw std::invalid_argument("t_ns must be finite and >= 0");
  }
  const double ks = rates.k_s_per_ns;
  const double ki = rates.k_i_per_ns;

  const double u = std::exp(-ks * t_ns);   // survival of the m_s = +-1 levels
  const double s = 3.0 * ki - ks;
  const double r = s * t_ns;

  // e12: the |0,-1> and |0,+1> entries, e3: the |0,0> entry, both in units
  // of 1/3.
  double e12, e3;
  if (std::abs(r) >= 1e-6) {
    const double v = std::exp(-3.0 * ki * t_ns);
    e12 = 1.0 - (2.0 * ki / s) * u - ((ki - ks) / s) * v;
    e3 = 1.0 - (2.0 * (ki - ks) / s) * (u - v);
  } else {
    // Near 3 k_i = k_s the two terms above cancel; both entries reduce to
    // multiples of u * t * expm1(-r)/r, which this branch evaluates by the
    // series expm1(-r)/r = -1 + r/2 - r^2/6 + O(r^3). With |r| < 1e-6 the
    // truncation error is below 1e-19.
    const double g = -1.0 + r / 2.0 - r * r / 6.0;
    const double w = (s - 2.0 * ks) * t_ns * u * g;
    e12 = 1.0 - u - w / 3.0;
    e3 = 1.0 + 2.0 / 3.0 * w;
  }

  const double loss = std::exp(-rates.k_p_per_ns * t_ns);
  PopulationVector p;
  p << e12, e12, e3, 0.0, 0.0, u, 0.0, 0.0, u;
  return (loss / 3.0) * p;
}

PopulationVector evolve_numeric(const RateConstants& rates,
                                const PopulationVector& initial, double t_ns,
                                double step_ns) {
  rates.validate();
  if (!std::isfinite(t_ns) || t_ns < 0.0) {
    throw std::invalid_argument("t_ns must be finite and >= 0");
  }
  if (!std::isfinite(step_ns) || step_ns <= 0.0) {
    throw std::invalid_argument("step_ns must be finite and > 0");
  }
  if (!initial.allFinite()) {
    throw std::invalid_argument("initial populations must be finite");
  }

  Matrix9 gen = build_transition_matrix(rates);
  gen.diagonal().array() -= rates.k_p_per_ns;

  PopulationVector p = initial;
  for (long i = 0;; ++i) {
    // Recompute elapsed time as a product, not a running sum, so rounding
    // does not accumulate over long integrations.
    const double t0 = static_cast<double>(i) * step_ns;
    if (t0 >= t_ns) break;
    const double h = std::min(step_ns, t_ns - t0);
    const PopulationVector k1 = gen * p;
    const PopulationVector k2 = gen * (p + (0.5 * h) * k1);
    const PopulationVector k3 = gen * (p + (0.5 * h) * k2);
    const PopulationVector k4 = gen * (p + h * k3);
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return p;
}

PopulationVector steady_state(const RateConstants& rates,
                              const PopulationVector& initial) {
  rates.validate();
  if (!initial.allFinite()) {
    throw std::invalid_argument("initial populations must be finite");
  }
  if (rates.k_p_per_ns > 0.0) {
    return PopulationVector::Zero();
  }
  PopulationVector p = PopulationVector::Zero();
  if (rates.k_i_per_ns > 0.0) {
    const double third = initial.sum() / 3.0;
    p[0] = p[1] = p[2] = third;
    return p;
  }
  // No nuclear mixing: each m_s = +-1 level ends up in the m_s = 0 level
  // with its own nuclear projection.
  for (int i = 0; i < kLevels; ++i) {
    const LevelLabel l = kBasis[static_cast<std::size_t>(i)];
    p[level_index({0, l.mi})] += initial[i];
  }
  return p;
}

PopulationVector steady_state(const RateConstants& rates) {
  return steady_state(rates, nuclear_polarized_state());
}

bool is_population_vector(const PopulationVector& p, double tol) {
  if (!p.allFinite()) return false;
  if (p.minCoeff() < -tol) return false;
  return p.sum() <= 1.0 + tol;
}

double total_population(const PopulationVector& p) { return p.sum(); }

}  // namespace nvpol
