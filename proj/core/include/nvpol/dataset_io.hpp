// CSV and small text file formats: dynamics datasets, population state
// files, spectra, sweep tables. Loaders are strict and cite line numbers;
// writers emit byte-stable output (shortest round-trip float form, '\n'
// line ends, fixed column order).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nvpol/estimation.hpp"
#include "nvpol/optimizer.hpp"
#include "nvpol/readout.hpp"

namespace nvpol {

// Dataset CSV. Header "duration_ns,amp_m1,amp_0,amp_p1" with an optional
// trailing ",sigma" column; one row per duration.
DynamicsDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const DynamicsDataset& data,
                  const std::filesystem::path& path);

// Population state file: '#' comments and blank lines ignored, then exactly
// nine whitespace-separated numbers in basis order.
PopulationVector load_state(const std::filesystem::path& path);
void save_state(const PopulationVector& state,
                const std::filesystem::path& path);

void save_fid_csv(const FidTrace& fid, const std::filesystem::path& path);
void save_spectrum_csv(const Spectrum& spectrum,
                       const std::filesystem::path& path);
void save_peaks_csv(const PeakSet& peaks, const std::filesystem::path& path);
void save_duration_sweep_csv(const std::vector<DurationSweepPoint>& points,
                             const std::filesystem::path& path);
void save_cycle_sweep_csv(const std::vector<CycleSweepPoint>& points,
                          const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double (" %g on
// steroids"); used by every writer so outputs are reproducible bytewise.
std::string format_double(double value);

}  // namespace nvpol
