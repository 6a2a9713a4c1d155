//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_IO_HPP_
#define POLYCL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "polycl/encoder.hpp"
#include "polycl/transfer.hpp"

namespace polycl {

// Shortest text that round-trips a double (17 significant digits).
std::string format_real(double v);

// RFC-4180 field quoting, applied only when needed.
std::string csv_field(std::string_view s);

// Splits one CSV record (no embedded newlines). Throws DataError on an
// unterminated quote.
std::vector<std::string> split_csv_line(std::string_view line);

std::string read_file(const std::filesystem::path &path);
// Creates parent directories as needed.
void write_file(const std::filesystem::path &path, std::string_view bytes);

// One polymer SMILES per line; blank lines and lines starting with '#' are
// skipped. Every entry must parse; errors cite path:line. A missing file
// raises ConfigError.
std::vector<std::string> read_corpus(const std::filesystem::path &path);

// CSV with header "smiles,value". A wrong header raises ConfigError; bad
// rows raise DataError citing path:line.
PropertyDataset read_dataset(const std::filesystem::path &path,
                             std::string name = {});
void write_dataset(std::ostream &os, const PropertyDataset &ds);

// Header smiles,h0,...,h{d-1}; one row per input.
void write_embeddings(std::ostream &os, const std::vector<std::string> &smiles,
                      const Matrix &h);

// Header dataset,fold,rmse,r2,best_epoch; five fold rows then a summary row
// with fold "mean".
void write_fold_report(std::ostream &os, const CrossValidationReport &rep,
                       bool header = true);

struct MetricRow {
  std::string model_tag;
  std::string checkpoint;
  double alignment;
  double uniformity;
};

void write_metric_report(std::ostream &os, const std::vector<MetricRow> &rows);

// Hex CRC-32 of the bytes, used as a reproducibility fingerprint.
std::string fingerprint(std::string_view bytes);

}  // namespace polycl

#endif  // POLYCL_IO_HPP_
