#include "sdsm/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"

namespace sdsm {

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns.size())
    throw std::logic_error("table \"" + name + "\": row width " +
                           std::to_string(cells.size()) + " != " +
                           std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(cells));
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_int(long long v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%lld", v);
  return buf;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

std::string render_csv(const Table& t) {
  std::string s;
  for (size_t i = 0; i < t.columns.size(); ++i) {
    if (i) s.push_back(',');
    s += t.columns[i];
  }
  s.push_back('\n');
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) s.push_back(',');
      s += row[i];
    }
    s.push_back('\n');
  }
  return s;
}

void write_text(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::string write_csv(const std::string& dir, const Table& t) {
  std::filesystem::create_directories(dir);
  std::string path = dir + "/" + t.name + ".csv";
  write_text(path, render_csv(t));
  return path;
}

std::string write_manifest(const std::string& dir, const Manifest& m) {
  nlohmann::ordered_json j;
  j["config_sha256"] = sha256_hex(m.config_text);
  j["config"] = m.config_text;
  j["seed"] = m.seed;
  j["width"] = m.width;
  auto files = nlohmann::ordered_json::array();
  for (const auto& e : m.entries) {
    nlohmann::ordered_json f;
    f["file"] = e.file;
    f["rows"] = e.rows;
    f["sha256"] = e.sha256;
    files.push_back(std::move(f));
  }
  j["files"] = std::move(files);
  std::filesystem::create_directories(dir);
  std::string path = dir + "/manifest.json";
  write_text(path, j.dump(2) + "\n");
  return path;
}

}  // namespace sdsm
