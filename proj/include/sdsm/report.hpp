#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace sdsm {

// One CSV table.  Cells are preformatted strings; doubles go through
// fmt_double so output is locale-independent and round-trippable.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

std::string fmt_double(double v);   // %.17g
std::string fmt_int(long long v);

std::string sha256_hex(const std::string& data);

// Writes name.csv under dir; returns the path.
std::string write_csv(const std::string& dir, const Table& t);

// JSON manifest: config echo + hash, seed, width, per-table row counts and
// content hashes.  Written as manifest.json under dir.
struct Manifest {
  std::string config_text;
  std::uint64_t seed = 0;
  int width = 1;
  struct Entry {
    std::string file;
    long rows = 0;
    std::string sha256;
  };
  std::vector<Entry> entries;
};

std::string write_manifest(const std::string& dir, const Manifest& m);

}  // namespace sdsm
