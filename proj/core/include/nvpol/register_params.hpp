// Static parameters of the ground-state spin register.
// Units: frequencies in MHz, magnetic field in mT, gyromagnetic ratios in
// MHz/mT. Defaults describe an NV- center with the field aligned to the
// symmetry axis at 2.8 mT.
#pragma once

namespace nvpol {

struct RegisterParams {
  double d_mhz = 2870.0;       // zero-field splitting of the electron spin
  double p_mhz = -4.95;        // nuclear quadrupole splitting
  double a_par_mhz = -2.3;     // axial hyperfine coupling
  double a_perp_mhz = -2.6;    // transverse hyperfine coupling
  double b_mt = 2.8;           // static field along the symmetry axis
  double gamma_e_mhz_per_mt = 28.0250;   // electron gyromagnetic ratio
  double gamma_n_mhz_per_mt = 3.077e-3;  // 14N nuclear gyromagnetic ratio

  // Throws std::invalid_argument if any entry is non-finite or b_mt < 0.
  void validate() const;
};

}  // namespace nvpol
