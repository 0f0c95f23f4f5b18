// Secular spin Hamiltonian of the electron-14N register and the transition
// frequencies used by the polarization-transfer sequence.
//
// H = D Sz^2 + ge B Sz + gn B Iz + P Iz^2 + Apar Sz Iz
//     + Aperp (Sx Ix + Sy Iy)
//
// In the product basis of basis.hpp every matrix element is real, so the
// Hamiltonian is stored as a real symmetric 9x9 matrix (MHz).
#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "nvpol/basis.hpp"
#include "nvpol/register_params.hpp"

namespace nvpol {

using Matrix9 = Eigen::Matrix<double, 9, 9>;
using Vector9 = Eigen::Matrix<double, 9, 1>;

// Hamiltonian in MHz in the fixed basis order. Validates params.
Matrix9 build_hamiltonian(const RegisterParams& params);

struct Eigensystem {
  Vector9 values;   // ascending, MHz
  Matrix9 vectors;  // orthonormal columns, vectors.col(k) belongs to values[k]
};

// Dense symmetric diagonalization. Throws std::invalid_argument when the
// input is not symmetric (tolerance 1e-9 on the larger triangle residual).
Eigensystem eigensystem(const Matrix9& hamiltonian);

enum class TransitionKind { MW, RF };

struct Transition {
  LevelLabel lower;    // level with the smaller eigenvalue
  LevelLabel upper;
  double frequency_mhz = 0.0;  // upper minus lower, always > 0
  TransitionKind kind = TransitionKind::MW;
};

// The four transitions driven by the transfer sequence:
//   MW |0,-1> <-> |-1,-1>     MW |0,+1> <-> |+1,+1>
//   RF |-1,-1> <-> |-1,0>     RF |+1,+1> <-> |+1,0>
struct TransitionTable {
  std::array<Transition, 4> entries;

  // Lookup by unordered level pair. Throws std::invalid_argument when the
  // pair is not one of the four driven transitions.
  const Transition& find(LevelLabel a, LevelLabel b) const;

  const Transition& mw_lower() const { return entries[0]; }  // |0,-1>..|-1,-1>
  const Transition& mw_upper() const { return entries[1]; }  // |0,+1>..|+1,+1>
  const Transition& rf_lower() const { return entries[2]; }  // |-1,-1>..|-1,0>
  const Transition& rf_upper() const { return entries[3]; }  // |+1,+1>..|+1,0>
};

// Transition frequencies from the full eigensystem, with each eigenstate
// identified by its dominant product-basis component. Adding a multiple of
// the identity to H does not change any frequency.
TransitionTable transition_frequencies(const RegisterParams& params);
TransitionTable transition_table_from(const Matrix9& hamiltonian);

// Eigenvector column index for each basis label, matched by squared overlap.
// Throws NumericFailure when the association is ambiguous: some eigenvector
// has squared overlap below 0.6 with every product state, or two labels
// claim the same column. That happens near level anti-crossings, where the
// product-state labeling stops being meaningful.
std::array<int, kLevels> associate_levels(const Eigensystem& es);

// Frequencies of the |0,mi> <-> |-1,mi> lines for mi = -1, 0, +1, in that
// order. These set the positions of the free-induction-decay lines used by
// the readout module.
std::array<double, 3> readout_line_frequencies(const RegisterParams& params);

}  // namespace nvpol
