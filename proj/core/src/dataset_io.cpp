#include "nvpol/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "nvpol/errors.hpp"

namespace nvpol {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    lines.push_back(nl == std::string_view::npos ? text : text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text = text.substr(nl + 1);
  }
  return lines;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const std::size_t comma = line.find(',');
    fields.push_back(trim(
        comma == std::string_view::npos ? line : line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line = line.substr(comma + 1);
  }
  return fields;
}

double parse_field(const std::filesystem::path& path, std::size_t lineno,
                   std::string_view field) {
  double out = 0.0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw DataError(fmt::format("{}:{}: not a number: '{}'", path.string(),
                                lineno, std::string(field)));
  }
  return out;
}

}  // namespace

std::string format_double(double value) { return fmt::format("{}", value); }

DynamicsDataset load_dataset(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]).empty()) {
    throw DataError(path.string() + ": empty dataset file");
  }

  const std::string_view header = trim(lines[0]);
  bool with_sigma = false;
  if (header == "duration_ns,amp_m1,amp_0,amp_p1,sigma") {
    with_sigma = true;
  } else if (header != "duration_ns,amp_m1,amp_0,amp_p1") {
    throw DataError(path.string() +
                    ":1: expected header 'duration_ns,amp_m1,amp_0,amp_p1"
                    "[,sigma]'");
  }
  const std::size_t want = with_sigma ? 5 : 4;

  DynamicsDataset data;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != want) {
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}",
                                  path.string(), i + 1, want, fields.size()));
    }
    DatasetRow row;
    row.duration_ns = parse_field(path, i + 1, fields[0]);
    row.amp_m1 = parse_field(path, i + 1, fields[1]);
    row.amp_0 = parse_field(path, i + 1, fields[2]);
    row.amp_p1 = parse_field(path, i + 1, fields[3]);
    if (with_sigma) row.sigma = parse_field(path, i + 1, fields[4]);
    data.rows.push_back(row);
  }
  if (data.rows.empty()) {
    throw DataError(path.string() + ": dataset has a header but no rows");
  }
  data.validate();
  return data;
}

void save_dataset(const DynamicsDataset& data,
                  const std::filesystem::path& path) {
  data.validate();
  auto out = open_out(path);
  const bool with_sigma = data.has_sigma();
  out << "duration_ns,amp_m1,amp_0,amp_p1" << (with_sigma ? ",sigma" : "")
      << "\n";
  for (const DatasetRow& r : data.rows) {
    out << format_double(r.duration_ns) << ',' << format_double(r.amp_m1)
        << ',' << format_double(r.amp_0) << ',' << format_double(r.amp_p1);
    if (with_sigma) out << ',' << format_double(*r.sigma);
    out << '\n';
  }
  finish(out, path);
}

PopulationVector load_state(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<double> values;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::istringstream iss{std::string(line)};
    std::string tok;
    while (iss >> tok) {
      double v = 0.0;
      const char* end = tok.data() + tok.size();
      const auto res = std::from_chars(tok.data(), end, v);
      if (res.ec != std::errc{} || res.ptr != end) {
        throw DataError(fmt::format("{}:{}: not a number: '{}'",
                                    path.string(), i + 1, tok));
      }
      values.push_back(v);
    }
  }
  if (values.size() != kLevels) {
    throw DataError(fmt::format("{}: expected 9 populations, got {}",
                                path.string(), values.size()));
  }
  PopulationVector p;
  for (int i = 0; i < kLevels; ++i) p[i] = values[static_cast<std::size_t>(i)];
  if (!is_population_vector(p)) {
    throw DataError(path.string() +
                    ": populations must be >= 0 with total <= 1");
  }
  return p;
}

void save_state(const PopulationVector& state,
                const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# populations in basis order:\n"
      << "# |0,+1> |0,-1> |0,0> |-1,-1> |-1,+1> |-1,0> |+1,+1> |+1,-1> "
         "|+1,0>\n";
  for (int i = 0; i < kLevels; ++i) {
    out << format_double(state[i]) << '\n';
  }
  finish(out, path);
}

void save_fid_csv(const FidTrace& fid, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "tau_ns,signal\n";
  for (std::size_t k = 0; k < fid.tau_ns.size(); ++k) {
    out << format_double(fid.tau_ns[k]) << ',' << format_double(fid.signal[k])
        << '\n';
  }
  finish(out, path);
}

void save_spectrum_csv(const Spectrum& spectrum,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "frequency_mhz,magnitude\n";
  for (std::size_t q = 0; q < spectrum.frequency_mhz.size(); ++q) {
    out << format_double(spectrum.frequency_mhz[q]) << ','
        << format_double(spectrum.magnitude[q]) << '\n';
  }
  finish(out, path);
}

void save_peaks_csv(const PeakSet& peaks, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "mi,amplitude\n";
  const char* labels[3] = {"-1", "0", "+1"};
  for (int j = 0; j < 3; ++j) {
    out << labels[j] << ','
        << format_double(peaks.amplitudes[static_cast<std::size_t>(j)])
        << '\n';
  }
  finish(out, path);
}

void save_duration_sweep_csv(const std::vector<DurationSweepPoint>& points,
                             const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "duration_ns,amp_m1,amp_0,amp_p1,total,polarization\n";
  for (const DurationSweepPoint& pt : points) {
    out << format_double(pt.duration_ns) << ',' << format_double(pt.amp_m1)
        << ',' << format_double(pt.amp_0) << ',' << format_double(pt.amp_p1)
        << ',' << format_double(pt.total) << ','
        << format_double(pt.polarization) << '\n';
  }
  finish(out, path);
}

void save_cycle_sweep_csv(const std::vector<CycleSweepPoint>& points,
                          const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "cycles,total,polarization\n";
  for (const CycleSweepPoint& pt : points) {
    out << pt.cycles << ',' << format_double(pt.total) << ','
        << format_double(pt.polarization) << '\n';
  }
  finish(out, path);
}

}  // namespace nvpol
