#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "nvpol/rate_model.hpp"
#include "support.hpp"

using namespace nvpol;

TEST_CASE("rate constant validation") {
  RateConstants r{0.01, 0.001, 0.0, "x"};
  CHECK_NOTHROW(r.validate());
  r.k_s_per_ns = 0.0;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.k_s_per_ns = 0.01;
  r.k_i_per_ns = -1e-9;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.k_i_per_ns = std::nan("");
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("wavelength presets carry the measured time constants") {
  CHECK(preset_520().k_s_per_ns == 1.0 / 170.0);
  CHECK(preset_520().k_i_per_ns == 1.0 / 6400.0);
  CHECK(preset_520().k_p_per_ns == 0.0);
  CHECK(preset_532().k_s_per_ns == 1.0 / 101.0);
  CHECK(preset_532().k_i_per_ns == 1.0 / 8400.0);
  CHECK(preset_532().k_p_per_ns == 0.0);
  CHECK(preset_594().k_s_per_ns == 1.0 / 110.0);
  CHECK(preset_594().k_i_per_ns == 1.0 / 16600.0);
  CHECK(preset_594().k_p_per_ns == 1.0 / 20400.0);
  CHECK(preset_520().label == "520");
  CHECK(preset_532().label == "532");
  CHECK(preset_594().label == "594");

  CHECK(rate_preset("594").has_value());
  CHECK(rate_preset("594")->k_p_per_ns == 1.0 / 20400.0);
  CHECK_FALSE(rate_preset("999").has_value());
}

TEST_CASE("transition matrix matches a hand-written layout") {
  const double ks = 0.31, ki = 0.07;
  const Matrix9 m = build_transition_matrix({ks, ki, 0.0, ""});
  // row-major 9x9, written out from the model definition: k_i mixing block
  // on the m_s = 0 levels, k_s gains from each m_s = +-1 level into the
  // m_s = 0 level with the same nuclear projection.
  const double e[81] = {
      // |0,+1>   |0,-1>   |0,0>   |-1,-1> |-1,+1> |-1,0>  |+1,+1> |+1,-1> |+1,0>
      -2 * ki, ki,      ki,      0,   ks,  0,   ks,  0,   0,    // |0,+1>
      ki,      -2 * ki, ki,      ks,  0,   0,   0,   ks,  0,    // |0,-1>
      ki,      ki,      -2 * ki, 0,   0,   ks,  0,   0,   ks,   // |0,0>
      0,       0,       0,       -ks, 0,   0,   0,   0,   0,    // |-1,-1>
      0,       0,       0,       0,   -ks, 0,   0,   0,   0,    // |-1,+1>
      0,       0,       0,       0,   0,   -ks, 0,   0,   0,    // |-1,0>
      0,       0,       0,       0,   0,   0,   -ks, 0,   0,    // |+1,+1>
      0,       0,       0,       0,   0,   0,   0,   -ks, 0,    // |+1,-1>
      0,       0,       0,       0,   0,   0,   0,   0,   -ks,  // |+1,0>
  };
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(m(i, j) == e[9 * i + j]);
    }
  }
}

TEST_CASE("transition matrix columns sum to zero") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    RateConstants r{1e-3 + u(rng), u(rng) * 1e-3, u(rng) * 1e-4, ""};
    const Matrix9 m = build_transition_matrix(r);
    for (int j = 0; j < 9; ++j) {
      CHECK(m.col(j).sum() == 0.0);  // exact: built from balanced entries
    }
  }
}

TEST_CASE("reference states") {
  CHECK(is_population_vector(mixed_state()));
  CHECK(is_population_vector(electron_polarized_state()));
  CHECK(is_population_vector(nuclear_polarized_state()));
  CHECK(total_population(mixed_state()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nuclear_polarized_state()[2] == 1.0 / 3.0);
  CHECK(nuclear_polarized_state()[5] == 1.0 / 3.0);
  CHECK(nuclear_polarized_state()[8] == 1.0 / 3.0);
  CHECK(nuclear_polarized_state()[0] == 0.0);
  CHECK(electron_polarized_state()[0] == 1.0 / 3.0);
  CHECK(electron_polarized_state()[3] == 0.0);
}

TEST_CASE("closed form at t = 0 is the initial vector") {
  for (const RateConstants& r : {preset_520(), preset_532(), preset_594()}) {
    const PopulationVector p = evolve_analytic(r, 0.0);
    const PopulationVector p0 = nuclear_polarized_state();
    for (int i = 0; i < 9; ++i) CHECK(p[i] == p0[i]);
  }
}

TEST_CASE("closed form with k_i = 0") {
  const RateConstants r{1.0 / 101.0, 0.0, 0.0, ""};
  for (double t : {0.0, 50.0, 101.0, 500.0, 2000.0, 10000.0}) {
    const PopulationVector p = evolve_analytic(r, t);
    const double u = std::exp(-r.k_s_per_ns * t);
    CHECK(std::abs(p[2] - (1.0 - 2.0 / 3.0 * u)) < 1e-12);
    CHECK(p[0] == 0.0);  // no mixing, outer m_s = 0 levels stay empty
    CHECK(p[1] == 0.0);
    CHECK(std::abs(p[5] - u / 3.0) < 1e-15);
    CHECK(std::abs(p[8] - u / 3.0) < 1e-15);
    CHECK(p[3] == 0.0);
    CHECK(p[4] == 0.0);
    CHECK(p[6] == 0.0);
    CHECK(p[7] == 0.0);
  }
}

TEST_CASE("frozen points on the 532 and 594 curves") {
  // recorded from this model and cross-checked against the RK4 integrator
  // at the time of freezing
  const PopulationVector p = evolve_analytic(preset_532(), 500.0);
  CHECK(std::abs(p[2] - 0.900050320687) < 1e-9);
  CHECK(std::abs(p[0] - 0.047614871937) < 1e-9);
  CHECK(std::abs(p[1] - 0.047614871937) < 1e-9);

  // 594: at t = 1/k_p the total has decayed by exactly 1/e
  const PopulationVector q = evolve_analytic(preset_594(), 20400.0);
  CHECK(std::abs(total_population(q) - std::exp(-1.0)) < 1e-12);
}

TEST_CASE("closed form equals RK4 over presets and the degenerate ridge") {
  std::vector<RateConstants> sets = {preset_520(), preset_532(), preset_594()};
  for (double ratio : {0.999, 1.0, 1.001}) {
    RateConstants r{1.0 / 101.0, ratio * (1.0 / 101.0) / 3.0, 0.0, ""};
    sets.push_back(r);
  }
  double worst = 0.0;
  for (const RateConstants& r : sets) {
    for (double t = 0.0; t <= 5000.0; t += 250.0) {
      const PopulationVector a = evolve_analytic(r, t);
      const PopulationVector n =
          evolve_numeric(r, nuclear_polarized_state(), t, 0.1);
      worst = std::max(worst, (a - n).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("smooth through the removable point 3 k_i = k_s") {
  const double ks = 1.0 / 101.0;
  for (double t : {10.0, 500.0, 3000.0}) {
    const PopulationVector mid =
        evolve_analytic({ks, ks / 3.0, 0.0, ""}, t);
    const PopulationVector lo =
        evolve_analytic({ks, (ks / 3.0) * (1.0 - 1e-9), 0.0, ""}, t);
    const PopulationVector hi =
        evolve_analytic({ks, (ks / 3.0) * (1.0 + 1e-9), 0.0, ""}, t);
    CHECK((mid - lo).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((mid - hi).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("population stays conserved, non-negative and monotone") {
  for (const RateConstants& r : {preset_520(), preset_532()}) {
    double prev_outer = -1.0;
    for (double t = 0.0; t <= 10000.0; t += 100.0) {
      const PopulationVector p = evolve_analytic(r, t);
      CHECK(std::abs(total_population(p) - 1.0) < 1e-12);  // k_p = 0
      CHECK(p.minCoeff() >= 0.0);
      CHECK(p[0] == p[1]);  // symmetric outer lines
      CHECK(p[0] >= prev_outer);  // outer m_s = 0 population only grows
      prev_outer = p[0];
    }
  }
  // with loss the total tracks exp(-k_p t) exactly
  for (double t = 0.0; t <= 30000.0; t += 1000.0) {
    const PopulationVector p = evolve_analytic(preset_594(), t);
    CHECK(std::abs(total_population(p) -
                   std::exp(-preset_594().k_p_per_ns * t)) < 1e-12);
  }
}

TEST_CASE("numeric integrator basics") {
  const RateConstants r = preset_532();
  const PopulationVector p0 = mixed_state();

  const PopulationVector at0 = evolve_numeric(r, p0, 0.0);
  for (int i = 0; i < 9; ++i) CHECK(at0[i] == p0[i]);

  // a step larger than the interval is shortened to land on t exactly
  const PopulationVector big = evolve_numeric(r, p0, 5.0, 100.0);
  const PopulationVector fine = evolve_numeric(r, p0, 5.0, 0.05);
  CHECK((big - fine).cwiseAbs().maxCoeff() < 1e-8);

  // conservation from an arbitrary start with k_p = 0
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PopulationVector q;
  for (int i = 0; i < 9; ++i) q[i] = u(rng);
  q /= q.sum();
  const PopulationVector evolved = evolve_numeric(r, q, 3000.0, 0.1);
  CHECK(std::abs(total_population(evolved) - 1.0) < 1e-12);
  CHECK(evolved.minCoeff() >= 0.0);

  CHECK_THROWS_AS(evolve_numeric(r, p0, -1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(evolve_numeric(r, p0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(evolve_numeric(r, p0, 1.0, -0.5), std::invalid_argument);
  PopulationVector bad = p0;
  bad[3] = std::nan("");
  CHECK_THROWS_AS(evolve_numeric(r, bad, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("steady states") {
  // k_p > 0 drains everything
  const PopulationVector drained = steady_state(preset_594());
  CHECK(drained.cwiseAbs().maxCoeff() == 0.0);

  // k_i > 0 equalizes the m_s = 0 sector
  const PopulationVector mixed = steady_state(preset_532(), mixed_state());
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mixed[i] - 1.0 / 3.0) < 1e-12);
  for (int i = 3; i < 9; ++i) CHECK(mixed[i] == 0.0);

  // k_i = 0 pumps each m_s = +-1 level into its nuclear partner
  const RateConstants nomix{0.01, 0.0, 0.0, ""};
  PopulationVector p0 = PopulationVector::Zero();
  p0[3] = 0.5;  // |-1,-1> -> |0,-1>
  p0[8] = 0.25; // |+1,0>  -> |0,0>
  p0[0] = 0.25; // already in m_s = 0
  const PopulationVector s = steady_state(nomix, p0);
  CHECK(s[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s[2] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(s[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(total_population(s) - 1.0) < 1e-12);

  // the long-time limit of the actual evolution agrees
  const PopulationVector late =
      evolve_numeric(nomix, p0, 2000.0, 0.1);
  CHECK((late - s).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("population vector predicate") {
  CHECK(is_population_vector(mixed_state()));
  PopulationVector p = mixed_state();
  p[0] = -1e-6;
  CHECK_FALSE(is_population_vector(p));
  p = mixed_state();
  p[0] += 0.5;  // sum above 1
  CHECK_FALSE(is_population_vector(p));
  p = PopulationVector::Zero();
  CHECK(is_population_vector(p));  // all lost to ionization is legal
  p[0] = std::nan("");
  CHECK_FALSE(is_population_vector(p));
}
