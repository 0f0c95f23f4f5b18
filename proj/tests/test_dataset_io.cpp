#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "nvpol/dataset_io.hpp"
#include "nvpol/errors.hpp"
#include "nvpol/estimation.hpp"
#include "nvpol/rate_model.hpp"
#include "support.hpp"

using namespace nvpol;
using testsupport::read_file;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

void expect_data_error(const std::filesystem::path& path,
                       const std::string& text, const std::string& needle,
                       bool as_state = false) {
  write_file(path, text);
  try {
    if (as_state) {
      load_state(path);
    } else {
      load_dataset(path);
    }
    FAIL("expected DataError, needle: " << needle);
  } catch (const DataError& ex) {
    const std::string what = ex.what();
    CAPTURE(what);
    CAPTURE(needle);
    CHECK(what.find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("shortest round-trip number formatting") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(4000.0) == "4000");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  const std::vector<double> tricky = {1.0 / 3.0,    0.1,      1e-300,
                                      6.02214076e23, -0.0,     1.0 / 170.0,
                                      1.0 / 8400.0,  0.914915, 123456.789};
  for (double v : tricky) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("dataset round-trips exactly") {
  TempDir tmp;
  const auto durations = testsupport::linspace(0.0, 3000.0, 12);

  SUBCASE("with sigma") {
    const DynamicsDataset d = synth_dataset(preset_594(), durations, 0.02, 3);
    const auto path = tmp.path() / "data.csv";
    save_dataset(d, path);
    const DynamicsDataset back = load_dataset(path);
    REQUIRE(back.rows.size() == d.rows.size());
    CHECK(back.has_sigma());
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
      CHECK(back.rows[i].duration_ns == d.rows[i].duration_ns);
      CHECK(back.rows[i].amp_m1 == d.rows[i].amp_m1);
      CHECK(back.rows[i].amp_0 == d.rows[i].amp_0);
      CHECK(back.rows[i].amp_p1 == d.rows[i].amp_p1);
      CHECK(*back.rows[i].sigma == *d.rows[i].sigma);
    }
    // byte-stable: saving what was loaded reproduces the file
    const auto again = tmp.path() / "again.csv";
    save_dataset(back, again);
    CHECK(read_file(again) == read_file(path));
  }

  SUBCASE("without sigma") {
    const DynamicsDataset d = synth_dataset(preset_532(), durations, 0.0, 1);
    const auto path = tmp.path() / "data.csv";
    save_dataset(d, path);
    const std::string text = read_file(path);
    CHECK(text.rfind("duration_ns,amp_m1,amp_0,amp_p1\n", 0) == 0);
    const DynamicsDataset back = load_dataset(path);
    CHECK_FALSE(back.has_sigma());
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
      CHECK(back.rows[i].amp_0 == d.rows[i].amp_0);
    }
  }
}

TEST_CASE("dataset loader rejects malformed input with positions") {
  TempDir tmp;
  const auto p = tmp.path() / "bad.csv";
  expect_data_error(p, "", "empty dataset file");
  expect_data_error(p, "time,a,b,c\n1,2,3,4\n", ":1: expected header");
  expect_data_error(p, "duration_ns,amp_m1,amp_0,amp_p1\n", "no rows");
  expect_data_error(p, "duration_ns,amp_m1,amp_0,amp_p1\n1,2,3\n",
                    ":2: expected 4 fields, got 3");
  expect_data_error(p, "duration_ns,amp_m1,amp_0,amp_p1\n1,2,3,4,5\n",
                    ":2: expected 4 fields, got 5");
  expect_data_error(p, "duration_ns,amp_m1,amp_0,amp_p1\n0,1,1,1\nx,1,1,1\n",
                    ":3: not a number: 'x'");
  expect_data_error(p,
                    "duration_ns,amp_m1,amp_0,amp_p1,sigma\n0,1,1,1\n",
                    ":2: expected 5 fields, got 4");
  // well-formed CSV still has to satisfy the dataset invariants
  expect_data_error(p,
                    "duration_ns,amp_m1,amp_0,amp_p1\n"
                    "0,1,1,1\n100,1,1,1\n50,1,1,1\n"
                    "200,1,1,1\n300,1,1,1\n400,1,1,1\n",
                    "dataset row");
  CHECK_THROWS_AS(load_dataset(tmp.path() / "missing.csv"), DataError);
}

TEST_CASE("dataset loader tolerates blank lines and CRLF") {
  TempDir tmp;
  const auto p = tmp.path() / "data.csv";
  write_file(p,
             "duration_ns,amp_m1,amp_0,amp_p1\r\n"
             "0,0.1,0.2,0.1\r\n"
             "\r\n"
             "100, 0.1, 0.3, 0.1\r\n"
             "200,0.1,0.35,0.1\n"
             "300,0.1,0.38,0.1\n"
             "400,0.1,0.4,0.1\n"
             "500,0.1,0.41,0.1\n");
  const DynamicsDataset d = load_dataset(p);
  REQUIRE(d.rows.size() == 6);
  CHECK(d.rows[1].amp_0 == 0.3);
  CHECK(d.rows[1].duration_ns == 100.0);
}

TEST_CASE("state files round-trip exactly") {
  TempDir tmp;
  const auto p = tmp.path() / "state.txt";
  const PopulationVector s = evolve_analytic(preset_532(), 345.0);
  save_state(s, p);
  const PopulationVector back = load_state(p);
  for (int i = 0; i < kLevels; ++i) {
    CHECK(back[i] == s[i]);
  }
  // the written form is commented and one value per line
  const std::string text = read_file(p);
  CHECK(text.front() == '#');

  SUBCASE("free layout: one line, inline comment") {
    const auto q = tmp.path() / "inline.txt";
    write_file(q, "0.5 0.25 0.25 0 0 0 0 0 0 # all in ms=0\n");
    const PopulationVector v = load_state(q);
    CHECK(v[0] == 0.5);
    CHECK(v[2] == 0.25);
    CHECK(v[8] == 0.0);
  }
}

TEST_CASE("state loader rejects malformed input") {
  TempDir tmp;
  const auto p = tmp.path() / "state.txt";
  expect_data_error(p, "0.5 0.5\n", "expected 9 populations, got 2", true);
  expect_data_error(p, "0 0 0 0 0 0 0 0 0 0\n", "expected 9 populations",
                    true);
  expect_data_error(p, "0.5 x 0 0 0 0 0 0 0\n", "not a number: 'x'", true);
  expect_data_error(p, "-0.1 0.6 0.5 0 0 0 0 0 0\n", "populations", true);
  expect_data_error(p, "0.5 0.5 0.5 0 0 0 0 0 0\n", "populations", true);
  CHECK_THROWS_AS(load_state(tmp.path() / "missing.txt"), DataError);
}

TEST_CASE("table writers emit the documented headers and layout") {
  TempDir tmp;

  SUBCASE("fid") {
    FidTrace fid;
    fid.tau_ns = {0.0, 10.0};
    fid.signal = {1.0, 0.5};
    const auto p = tmp.path() / "fid.csv";
    save_fid_csv(fid, p);
    CHECK(read_file(p) == "tau_ns,signal\n0,1\n10,0.5\n");
  }

  SUBCASE("spectrum") {
    Spectrum sp;
    sp.frequency_mhz = {0.0, 0.25};
    sp.magnitude = {2.0, 1.5};
    const auto p = tmp.path() / "spec.csv";
    save_spectrum_csv(sp, p);
    CHECK(read_file(p) == "frequency_mhz,magnitude\n0,2\n0.25,1.5\n");
  }

  SUBCASE("peaks") {
    const PeakSet peaks{{0.1, 0.8, 0.2}};
    const auto p = tmp.path() / "peaks.csv";
    save_peaks_csv(peaks, p);
    CHECK(read_file(p) == "mi,amplitude\n-1,0.1\n0,0.8\n+1,0.2\n");
  }

  SUBCASE("duration sweep") {
    DurationSweepPoint pt;
    pt.duration_ns = 20.0;
    pt.amp_m1 = 0.1;
    pt.amp_0 = 0.7;
    pt.amp_p1 = 0.1;
    pt.total = 0.9;
    pt.polarization = 0.625;
    const auto p = tmp.path() / "sweep.csv";
    save_duration_sweep_csv({pt}, p);
    CHECK(read_file(p) ==
          "duration_ns,amp_m1,amp_0,amp_p1,total,polarization\n"
          "20,0.1,0.7,0.1,0.9,0.625\n");
  }

  SUBCASE("cycle sweep") {
    CycleSweepPoint pt;
    pt.cycles = 2;
    pt.total = 0.5;
    pt.polarization = 0.25;
    const auto p = tmp.path() / "cycles.csv";
    save_cycle_sweep_csv({pt}, p);
    CHECK(read_file(p) == "cycles,total,polarization\n2,0.5,0.25\n");
  }
}
