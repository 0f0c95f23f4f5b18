#include "nvpol/manifest.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "nvpol/errors.hpp"

namespace nvpol {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file for hashing: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

void Manifest::add(std::string key, std::string value) {
  entries.emplace_back(std::move(key), std::move(value));
}

void Manifest::add_input(const std::string& name,
                         const std::filesystem::path& path) {
  add("input." + name + ".path", path.string());
  add("input." + name + ".fnv1a64", fmt::format("{:016x}", hash_file(path)));
}

void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path path = out_dir / "manifest.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write manifest: " + path.string());
  }
  out << "tool = " << manifest.tool << '\n';
  out << "command = " << manifest.command << '\n';
  for (const auto& [key, value] : manifest.entries) {
    out << key << " = " << value << '\n';
  }
  out.flush();
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

}  // namespace nvpol
