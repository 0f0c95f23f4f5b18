#include "nvpol/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "nvpol/errors.hpp"

namespace nvpol {

namespace {

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

[[noreturn]] void fail(std::string_view origin, int line,
                       const std::string& what) {
  throw ConfigError(std::string(origin) + ":" + std::to_string(line) + ": " +
                    what);
}

double parse_double(std::string_view origin, int line, std::string_view key,
                    std::string_view value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out)) {
    fail(origin, line,
         "value for '" + std::string(key) + "' is not a finite number: '" +
             std::string(value) + "'");
  }
  return out;
}

long parse_int(std::string_view origin, int line, std::string_view key,
               std::string_view value) {
  long out = 0;
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    fail(origin, line,
         "value for '" + std::string(key) + "' is not an integer: '" +
             std::string(value) + "'");
  }
  return out;
}

std::uint64_t parse_u64(std::string_view origin, int line,
                        std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    fail(origin, line,
         "value for '" + std::string(key) +
             "' is not an unsigned integer: '" + std::string(value) + "'");
  }
  return out;
}

// Partially specified [rates.<label>] section, completed at end of parse.
struct PresetDraft {
  int line = 0;
  bool has_ks = false, has_ki = false;
  RateConstants rates;
};

}  // namespace

ConfigDocument ConfigDocument::defaults() {
  ConfigDocument doc;
  doc.rate_presets["520"] = preset_520();
  doc.rate_presets["532"] = preset_532();
  doc.rate_presets["594"] = preset_594();
  return doc;
}

void ConfigDocument::validate() const {
  try {
    register_params.validate();
    readout.validate();
    for (const auto& [label, rates] : rate_presets) {
      rates.validate();
    }
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("invalid configuration: ") + ex.what());
  }
  auto fail = [](const std::string& what) {
    throw ConfigError("invalid configuration: " + what);
  };
  if (!(mw_fidelity >= 0.0 && mw_fidelity <= 1.0) ||
      !(rf_fidelity >= 0.0 && rf_fidelity <= 1.0)) {
    fail("pulse fidelities must be in [0,1]");
  }
  if (!(integrator_step_ns > 0.0) || !(integrator_step_ns <= 100.0)) {
    fail("integrator_step_ns must be in (0, 100]");
  }
  if (!rate_presets.count(sweep.wavelength)) {
    fail("sweep wavelength '" + sweep.wavelength +
         "' has no rate preset; add a [rates." + sweep.wavelength +
         "] section");
  }
  if (sweep.init_duration_ns < 0.0 || sweep.repolarize_duration_ns < 0.0) {
    fail("sweep durations must be >= 0");
  }
  if (sweep.duration_step_ns <= 0.0 || sweep.duration_min_ns < 0.0 ||
      sweep.duration_max_ns < sweep.duration_min_ns) {
    fail("sweep duration grid must satisfy 0 <= min <= max, step > 0");
  }
  if (sweep.cycles < 1 || sweep.cycles > 100) {
    fail("sweep cycles must be in 1..100");
  }
  if (sweep.cycles_min < 0 || sweep.cycles_max < sweep.cycles_min ||
      sweep.cycles_max > 100) {
    fail("sweep cycle range must satisfy 0 <= min <= max <= 100");
  }
}

ConfigDocument parse_config(std::string_view text, std::string_view origin) {
  ConfigDocument doc = ConfigDocument::defaults();
  std::map<std::string, PresetDraft> drafts;

  std::string section;
  std::set<std::string> seen;
  int lineno = 0;

  std::string_view rest = text;
  while (!rest.empty() || lineno == 0) {
    const std::size_t nl = rest.find('\n');
    std::string_view raw =
        nl == std::string_view::npos ? rest : rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{}
                                        : rest.substr(nl + 1);
    ++lineno;

    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') {
      if (rest.empty() && nl == std::string_view::npos) break;
      continue;
    }

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        fail(origin, lineno, "malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      const bool is_rates = section.rfind("rates.", 0) == 0;
      if (is_rates) {
        const std::string label = section.substr(6);
        if (label.empty()) {
          fail(origin, lineno, "rates section needs a label: [rates.<label>]");
        }
        if (!drafts.count(label)) {
          drafts[label].line = lineno;
          drafts[label].rates.label = label;
        }
      } else if (section != "register" && section != "pulse" &&
                 section != "readout" && section != "sweep" &&
                 section != "run") {
        fail(origin, lineno, "unknown section [" + section + "]");
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(origin, lineno, "expected 'key = value' or a section header");
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, lineno, "empty key");
    if (value.empty()) fail(origin, lineno, "empty value for '" + key + "'");
    if (section.empty()) {
      fail(origin, lineno, "key '" + key + "' appears before any section");
    }
    if (!seen.insert(section + "." + key).second) {
      fail(origin, lineno, "duplicate key '" + key + "' in [" + section + "]");
    }

    auto num = [&] { return parse_double(origin, lineno, key, value); };

    if (section == "register") {
      RegisterParams& rp = doc.register_params;
      if (key == "d_mhz") rp.d_mhz = num();
      else if (key == "p_mhz") rp.p_mhz = num();
      else if (key == "a_par_mhz") rp.a_par_mhz = num();
      else if (key == "a_perp_mhz") rp.a_perp_mhz = num();
      else if (key == "b_mt") rp.b_mt = num();
      else if (key == "gamma_e_mhz_per_mt") rp.gamma_e_mhz_per_mt = num();
      else if (key == "gamma_n_mhz_per_mt") rp.gamma_n_mhz_per_mt = num();
      else fail(origin, lineno, "unknown key '" + key + "' in [register]");
    } else if (section == "pulse") {
      if (key == "mw_fidelity") doc.mw_fidelity = num();
      else if (key == "rf_fidelity") doc.rf_fidelity = num();
      else fail(origin, lineno, "unknown key '" + key + "' in [pulse]");
    } else if (section == "readout") {
      RamseySettings& rs = doc.readout;
      if (key == "tau_max_ns") rs.tau_max_ns = num();
      else if (key == "tau_step_ns") rs.tau_step_ns = num();
      else if (key == "detuning_mhz") rs.detuning_mhz = num();
      else if (key == "t2_star_ns") rs.t2_star_ns = num();
      else if (key == "zero_pad_factor")
        rs.zero_pad_factor = static_cast<int>(
            parse_int(origin, lineno, key, value));
      else if (key == "window_mhz") rs.window_mhz = num();
      else fail(origin, lineno, "unknown key '" + key + "' in [readout]");
    } else if (section == "sweep") {
      SweepConfig& sw = doc.sweep;
      if (key == "wavelength") sw.wavelength = std::string(value);
      else if (key == "init_duration_ns") sw.init_duration_ns = num();
      else if (key == "cycles")
        sw.cycles = static_cast<int>(parse_int(origin, lineno, key, value));
      else if (key == "repolarize_duration_ns")
        sw.repolarize_duration_ns = num();
      else if (key == "duration_min_ns") sw.duration_min_ns = num();
      else if (key == "duration_max_ns") sw.duration_max_ns = num();
      else if (key == "duration_step_ns") sw.duration_step_ns = num();
      else if (key == "cycles_min")
        sw.cycles_min = static_cast<int>(parse_int(origin, lineno, key, value));
      else if (key == "cycles_max")
        sw.cycles_max = static_cast<int>(parse_int(origin, lineno, key, value));
      else fail(origin, lineno, "unknown key '" + key + "' in [sweep]");
    } else if (section == "run") {
      if (key == "seed") doc.seed = parse_u64(origin, lineno, key, value);
      else if (key == "integrator_step_ns") doc.integrator_step_ns = num();
      else fail(origin, lineno, "unknown key '" + key + "' in [run]");
    } else {
      // [rates.<label>]
      PresetDraft& draft = drafts.at(section.substr(6));
      if (key == "k_s_per_ns") {
        draft.rates.k_s_per_ns = num();
        draft.has_ks = true;
      } else if (key == "k_i_per_ns") {
        draft.rates.k_i_per_ns = num();
        draft.has_ki = true;
      } else if (key == "k_p_per_ns") {
        draft.rates.k_p_per_ns = num();
      } else {
        fail(origin, lineno, "unknown key '" + key + "' in [" + section + "]");
      }
    }

    if (rest.empty() && nl == std::string_view::npos) break;
  }

  for (const auto& [label, draft] : drafts) {
    if (!draft.has_ks || !draft.has_ki) {
      fail(origin, draft.line,
           "[rates." + label + "] needs both k_s_per_ns and k_i_per_ns");
    }
    doc.rate_presets[label] = draft.rates;
  }

  doc.validate();
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace nvpol
