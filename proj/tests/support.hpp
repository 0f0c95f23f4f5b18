// Shared helpers for the test binaries: an independently constructed
// tensor-product Hamiltonian used as an oracle, process spawning for CLI
// checks, temp directories, and small numeric utilities.
#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>

#include "nvpol/basis.hpp"
#include "nvpol/register_params.hpp"
#include "nvpol/spin_model.hpp"

namespace testsupport {

// Builds the Hamiltonian from explicit spin-1 operator matrices and a
// Kronecker product, in a plain tensor-product ordering, then permutes into
// the library's level ordering. Shares no code with the library's
// per-element construction, so agreement is meaningful.
inline nvpol::Matrix9 kron_hamiltonian(const nvpol::RegisterParams& p) {
  using C = std::complex<double>;
  using M3 = Eigen::Matrix<C, 3, 3>;
  using M9 = Eigen::Matrix<C, 9, 9>;

  // Spin-1 operators in the |+1>, |0>, |-1> basis.
  M3 sz = M3::Zero(), sp = M3::Zero(), id = M3::Identity();
  sz(0, 0) = 1.0;
  sz(2, 2) = -1.0;
  const double r2 = std::sqrt(2.0);
  sp(0, 1) = r2;  // S+|0> = sqrt(2)|+1>
  sp(1, 2) = r2;  // S+|-1> = sqrt(2)|0>
  const M3 sm = sp.adjoint();
  const M3 sx = 0.5 * (sp + sm);
  const M3 sy = C(0.0, -0.5) * (sp - sm);

  auto kron = [](const M3& a, const M3& b) {
    M9 out;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
    return out;
  };

  const double b_par = p.b_mt;
  M9 h = p.d_mhz * kron(sz * sz, id) +
         p.gamma_e_mhz_per_mt * b_par * kron(sz, id) +
         p.gamma_n_mhz_per_mt * b_par * kron(id, sz) +
         p.p_mhz * kron(id, sz * sz) + p.a_par_mhz * kron(sz, sz) +
         p.a_perp_mhz * (kron(sx, sx) + kron(sy, sy));

  // Tensor index: 3*e + n with e,n = 0,1,2 for m = +1,0,-1.
  auto m_of = [](int idx) { return 1 - idx; };
  nvpol::Matrix9 out;
  double max_imag = 0.0;
  for (int e = 0; e < 3; ++e)
    for (int n = 0; n < 3; ++n)
      for (int e2 = 0; e2 < 3; ++e2)
        for (int n2 = 0; n2 < 3; ++n2) {
          const int row = nvpol::level_index({m_of(e), m_of(n)});
          const int col = nvpol::level_index({m_of(e2), m_of(n2)});
          const C v = h(3 * e + n, 3 * e2 + n2);
          max_imag = std::max(max_imag, std::abs(v.imag()));
          out(row, col) = v.real();
        }
  if (max_imag > 1e-12) {
    throw std::logic_error("tensor-product oracle has imaginary residue");
  }
  return out;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  }
  return v;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

inline CommandResult run_command(const std::string& command) {
  CommandResult res;
  const std::string full = command + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (pipe == nullptr) return res;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) {
    res.output.append(buf, got);
  }
  const int status = pclose(pipe);
  if (WIFEXITED(status)) {
    res.exit_code = WEXITSTATUS(status);
  }
  return res;
}

// Path of the installed CLI binary, passed in by the test harness.
inline std::string cli_path() {
  const char* env = std::getenv("NVPOL_CLI");
  return env != nullptr ? std::string(env) : std::string();
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::filesystem::path candidate =
          base / ("nvpol_test_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter.fetch_add(1)) + "_" +
                  std::to_string(rd() & 0xffff));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create temp directory");
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p,
                       const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testsupport
