// Run manifests: every CLI run writes a small key=value file recording the
// tool version, the subcommand and arguments, the content hash of each input
// file, and the RNG seed, so any output directory can be traced back to its
// exact inputs.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nvpol {

// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

// Hash of a file's contents. Throws DataError when unreadable.
std::uint64_t hash_file(const std::filesystem::path& path);

struct Manifest {
  std::string tool;     // "nvpol <version>"
  std::string command;  // subcommand plus arguments as invoked
  std::vector<std::pair<std::string, std::string>> entries;

  void add(std::string key, std::string value);
  // input.<name>.path and input.<name>.fnv1a64 entries for one input file.
  void add_input(const std::string& name, const std::filesystem::path& path);
};

// Writes "key = value" lines in insertion order to <dir>/manifest.txt.
void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& out_dir);

}  // namespace nvpol
