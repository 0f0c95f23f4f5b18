#include "nvpol/spin_model.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nvpol/errors.hpp"

namespace nvpol {

int level_index(LevelLabel label) {
  for (int i = 0; i < kLevels; ++i) {
    if (kBasis[i] == label) return i;
  }
  throw std::invalid_argument("no such level: ms=" + std::to_string(label.ms) +
                              ", mi=" + std::to_string(label.mi));
}

LevelLabel level_at(int index) {
  if (index < 0 || index >= kLevels) {
    throw std::out_of_range("level index " + std::to_string(index) +
                            " outside 0..8");
  }
  return kBasis[static_cast<std::size_t>(index)];
}

std::string to_string(LevelLabel label) {
  auto proj = [](int m) -> std::string {
    return m > 0 ? "+1" : (m < 0 ? "-1" : "0");
  };
  return "|" + proj(label.ms) + "," + proj(label.mi) + ">";
}

std::ostream& operator<<(std::ostream& os, LevelLabel label) {
  return os << to_string(label);
}

void RegisterParams::validate() const {
  const double entries[] = {d_mhz,     p_mhz, a_par_mhz,         a_perp_mhz,
                            b_mt,      gamma_e_mhz_per_mt,
                            gamma_n_mhz_per_mt};
  for (double v : entries) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("register parameter is not finite");
    }
  }
  if (b_mt < 0.0) {
    throw std::invalid_argument("b_mt must be >= 0");
  }
}

Matrix9 build_hamiltonian(const RegisterParams& params) {
  params.validate();
  const double ge_b = params.gamma_e_mhz_per_mt * params.b_mt;
  const double gn_b = params.gamma_n_mhz_per_mt * params.b_mt;

  Matrix9 h = Matrix9::Zero();
  for (int i = 0; i < kLevels; ++i) {
    const auto [ms, mi] = kBasis[static_cast<std::size_t>(i)];
    h(i, i) = params.d_mhz * ms * ms + ge_b * ms + gn_b * mi +
              params.p_mhz * mi * mi + params.a_par_mhz * ms * mi;
  }

  // Flip-flop part (Aperp/2)(S+I- + S-I+): couples |ms,mi> to |ms+1,mi-1>.
  // For S = I = 1 both ladder factors are sqrt(2), so the matrix element is
  // (Aperp/2) * 2 = Aperp for each of the four allowed pairs.
  for (int i = 0; i < kLevels; ++i) {
    const auto a = kBasis[static_cast<std::size_t>(i)];
    const LevelLabel b{a.ms + 1, a.mi - 1};
    if (b.ms > 1 || b.mi < -1) continue;
    const int j = level_index(b);
    h(i, j) = params.a_perp_mhz;
    h(j, i) = params.a_perp_mhz;
  }
  return h;
}

Eigensystem eigensystem(const Matrix9& hamiltonian) {
  if (!hamiltonian.allFinite()) {
    throw std::invalid_argument("hamiltonian has non-finite entries");
  }
  const double asym =
      (hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) {
    throw std::invalid_argument("hamiltonian is not symmetric, max |H-H^T| = " +
                                std::to_string(asym) + " MHz");
  }
  Eigen::SelfAdjointEigenSolver<Matrix9> solver(hamiltonian);
  if (solver.info() != Eigen::Success) {
    throw NumericFailure("eigendecomposition did not converge");
  }
  return Eigensystem{solver.eigenvalues(), solver.eigenvectors()};
}

std::array<int, kLevels> associate_levels(const Eigensystem& es) {
  std::array<int, kLevels> column{};
  std::array<bool, kLevels> taken{};
  for (int lbl = 0; lbl < kLevels; ++lbl) {
    int best = -1;
    double best_weight = -1.0;
    for (int k = 0; k < kLevels; ++k) {
      const double c = es.vectors(lbl, k);
      const double weight = c * c;
      if (weight > best_weight) {
        best_weight = weight;
        best = k;
      }
    }
    if (best_weight < 0.6) {
      throw NumericFailure(
          "eigenstate labeling is ambiguous for " +
          to_string(level_at(lbl)) + ": best squared overlap " +
          std::to_string(best_weight) +
          " < 0.6 (parameters are too close to a level anti-crossing)");
    }
    if (taken[static_cast<std::size_t>(best)]) {
      throw NumericFailure(
          "eigenstate labeling is ambiguous: two levels map to eigenvector " +
          std::to_string(best));
    }
    taken[static_cast<std::size_t>(best)] = true;
    column[static_cast<std::size_t>(lbl)] = best;
  }
  return column;
}

namespace {

double label_energy(const Eigensystem& es, const std::array<int, kLevels>& col,
                    LevelLabel l) {
  return es.values[col[static_cast<std::size_t>(level_index(l))]];
}

Transition make_transition(const Eigensystem& es,
                           const std::array<int, kLevels>& col, LevelLabel x,
                           LevelLabel y, TransitionKind kind) {
  const double ex = label_energy(es, col, x);
  const double ey = label_energy(es, col, y);
  Transition t;
  t.lower = ex <= ey ? x : y;
  t.upper = ex <= ey ? y : x;
  t.frequency_mhz = std::abs(ey - ex);
  t.kind = kind;
  return t;
}

}  // namespace

const Transition& TransitionTable::find(LevelLabel a, LevelLabel b) const {
  for (const Transition& t : entries) {
    if ((t.lower == a && t.upper == b) || (t.lower == b && t.upper == a)) {
      return t;
    }
  }
  throw std::invalid_argument("transition " + to_string(a) + " <-> " +
                              to_string(b) +
                              " is not one of the driven transitions");
}

TransitionTable transition_table_from(const Matrix9& hamiltonian) {
  const Eigensystem es = eigensystem(hamiltonian);
  const auto col = associate_levels(es);
  return TransitionTable{{
      make_transition(es, col, {0, -1}, {-1, -1}, TransitionKind::MW),
      make_transition(es, col, {0, +1}, {+1, +1}, TransitionKind::MW),
      make_transition(es, col, {-1, -1}, {-1, 0}, TransitionKind::RF),
      make_transition(es, col, {+1, +1}, {+1, 0}, TransitionKind::RF),
  }};
}

TransitionTable transition_frequencies(const RegisterParams& params) {
  return transition_table_from(build_hamiltonian(params));
}

std::array<double, 3> readout_line_frequencies(const RegisterParams& params) {
  const Eigensystem es = eigensystem(build_hamiltonian(params));
  const auto col = associate_levels(es);
  std::array<double, 3> f{};
  for (int mi = -1; mi <= 1; ++mi) {
    const double e0 = label_energy(es, col, {0, mi});
    const double em = label_energy(es, col, {-1, mi});
    f[static_cast<std::size_t>(mi + 1)] = std::abs(e0 - em);
  }
  return f;
}

}  // namespace nvpol
