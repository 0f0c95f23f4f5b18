// Classical rate-equation model of optical repolarization.
//
// Under illumination the m_s = +-1 levels pump into the m_s = 0 level with
// the same nuclear projection at rate k_s, the three m_s = 0 levels mix at
// rate k_i (nuclear depolarization in the optical cycle), and k_p drains
// every level uniformly (ionization to NV0 under orange light). Populations
// are classical: the vector stays entrywise non-negative and its total decays
// exactly as exp(-k_p t).
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "nvpol/spin_model.hpp"

namespace nvpol {

using PopulationVector = Vector9;

struct RateConstants {
  double k_s_per_ns = 0.0;  // electron repolarization rate, > 0
  double k_i_per_ns = 0.0;  // nuclear depolarization rate, >= 0
  double k_p_per_ns = 0.0;  // uniform loss rate, >= 0
  std::string label;        // optional wavelength tag, e.g. "532"

  void validate() const;  // throws std::invalid_argument
};

// Measured excitation-wavelength presets (rates are inverse time constants):
//   520 nm: 1/k_s = 170 ns, 1/k_i = 6.4 us,  k_p = 0
//   532 nm: 1/k_s = 101 ns, 1/k_i = 8.4 us,  k_p = 0
//   594 nm: 1/k_s = 110 ns, 1/k_i = 16.6 us, 1/k_p = 20.4 us
RateConstants preset_520();
RateConstants preset_532();
RateConstants preset_594();

// Preset lookup by label ("520", "532", "594"); nullopt otherwise.
std::optional<RateConstants> rate_preset(const std::string& label);

// dP/dt = (M - k_p I) P with M = build_transition_matrix(rates).
// M has zero column sums: gains k_s from each m_s = +-1 level into the
// m_s = 0 level of equal mi, uniform mixing k_i among the m_s = 0 levels.
Matrix9 build_transition_matrix(const RateConstants& rates);

// Reference states.
PopulationVector mixed_state();               // 1/9 everywhere
PopulationVector electron_polarized_state();  // (1/3,1/3,1/3,0,...,0)
PopulationVector nuclear_polarized_state();   // (1/3)(0,0,1,0,0,1,0,0,1)

// Closed-form solution of the rate equation started from
// nuclear_polarized_state(), evaluated at t_ns >= 0. Uses a series limit
// branch when |(3 k_i - k_s) t| < 1e-6, so the expression stays finite and
// smooth through the removable singularity at 3 k_i = k_s.
PopulationVector evolve_analytic(const RateConstants& rates, double t_ns);

// Fixed-step classical Runge-Kutta (RK4) integration from an arbitrary
// initial vector. The final step is shortened so the endpoint lands exactly
// on t_ns. step_ns must be > 0; t_ns >= 0.
PopulationVector evolve_numeric(const RateConstants& rates,
                                const PopulationVector& initial,
                                double t_ns, double step_ns = 0.1);

// t -> infinity limit. k_p > 0 drains everything; k_i > 0 equalizes the
// m_s = 0 levels; k_i = 0 pumps each m_s = +-1 level into its nuclear
// partner without mixing.
PopulationVector steady_state(const RateConstants& rates,
                              const PopulationVector& initial);
PopulationVector steady_state(const RateConstants& rates);  // from nuclear_polarized_state()

// Helpers shared by tests and the command line tool.
bool is_population_vector(const PopulationVector& p, double tol = 1e-9);
double total_population(const PopulationVector& p);

}  // namespace nvpol
