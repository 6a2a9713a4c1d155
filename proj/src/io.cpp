//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <zlib.h>

#include "polycl/errors.hpp"
#include "polycl/smiles.hpp"

namespace polycl {

namespace fs = std::filesystem;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c: s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted)
    throw DataError("unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path &path, std::string_view bytes) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw DataError("write failed for " + path.string());
}

namespace {

// Lines without their terminator; a trailing CR is stripped.
std::vector<std::string> lines_of(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string where(const fs::path &path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::vector<std::string> read_corpus(const fs::path &path) {
  const auto lines = lines_of(read_file(path));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string s = trim(lines[i]);
    if (s.empty() || s[0] == '#')
      continue;
    try {
      parse(s);
    } catch (const DataError &e) {
      throw DataError(where(path, i + 1) + e.what());
    }
    out.push_back(s);
  }
  return out;
}

PropertyDataset read_dataset(const fs::path &path, std::string name) {
  const auto lines = lines_of(read_file(path));
  if (lines.empty() || trim(lines[0]) != "smiles,value")
    throw ConfigError(where(path, 1) + "expected header \"smiles,value\"");
  PropertyDataset ds;
  ds.name = name.empty() ? path.stem().string() : std::move(name);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty())
      continue;
    try {
      const auto fields = split_csv_line(lines[i]);
      if (fields.size() != 2)
        throw DataError("expected 2 fields, found "
                        + std::to_string(fields.size()));
      const std::string smi = trim(fields[0]);
      const std::string val = trim(fields[1]);
      parse(smi);
      double v = 0.0;
      const auto [ptr, ec] =
          std::from_chars(val.data(), val.data() + val.size(), v);
      if (ec != std::errc() || ptr != val.data() + val.size() || val.empty())
        throw DataError("value \"" + val + "\" is not a number");
      if (!std::isfinite(v))
        throw DataError("value is not finite");
      ds.records.push_back({ smi, v });
    } catch (const DataError &e) {
      throw DataError(where(path, i + 1) + e.what());
    }
  }
  return ds;
}

void write_dataset(std::ostream &os, const PropertyDataset &ds) {
  os << "smiles,value\n";
  for (const auto &r: ds.records)
    os << csv_field(r.smiles) << ',' << format_real(r.value) << '\n';
}

void write_embeddings(std::ostream &os, const std::vector<std::string> &smiles,
                      const Matrix &h) {
  os << "smiles";
  for (Eigen::Index c = 0; c < h.cols(); ++c)
    os << ",h" << c;
  os << '\n';
  for (std::size_t r = 0; r < smiles.size(); ++r) {
    os << csv_field(smiles[r]);
    for (Eigen::Index c = 0; c < h.cols(); ++c)
      os << ',' << format_real(h(static_cast<Eigen::Index>(r), c));
    os << '\n';
  }
}

void write_fold_report(std::ostream &os, const CrossValidationReport &rep,
                       bool header) {
  if (header)
    os << "dataset,fold,rmse,r2,best_epoch\n";
  for (const auto &f: rep.folds)
    os << csv_field(rep.dataset) << ',' << f.fold_index << ','
       << format_real(f.rmse) << ',' << format_real(f.r2) << ','
       << f.best_epoch << '\n';
  os << csv_field(rep.dataset) << ",mean," << format_real(rep.mean_rmse) << ','
     << format_real(rep.mean_r2) << ",\n";
}

void write_metric_report(std::ostream &os, const std::vector<MetricRow> &rows) {
  os << "model_tag,checkpoint,alignment,uniformity\n";
  for (const auto &r: rows)
    os << csv_field(r.model_tag) << ',' << csv_field(r.checkpoint) << ','
       << format_real(r.alignment) << ',' << format_real(r.uniformity) << '\n';
}

std::string fingerprint(std::string_view bytes) {
  const uLong crc = crc32(crc32(0L, Z_NULL, 0),
                          reinterpret_cast<const Bytef *>(bytes.data()),
                          static_cast<uInt>(bytes.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace polycl
