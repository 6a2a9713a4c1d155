//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_CONFIG_HPP_
#define POLYCL_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "polycl/augment.hpp"
#include "polycl/contrastive.hpp"
#include "polycl/encoder.hpp"
#include "polycl/transfer.hpp"

namespace polycl {

struct PathsConfig {
  std::filesystem::path corpus;
  std::filesystem::path eval_corpus;
  std::vector<std::filesystem::path> datasets;
  std::filesystem::path out_dir = "out";
  std::filesystem::path vocab;  // empty: built-in table
};

struct SweepConfig {
  std::vector<AugmentationSpec> grid;
  int workers = 1;
};

// Run configuration read from strict JSON. Sections: seed (required),
// paths, encoder, contrastive, augmentation, transfer, sweep. Unknown keys
// and wrong types are rejected with their key path; relative paths resolve
// against the config file's directory.
struct RunConfig {
  std::uint64_t seed = 0;
  PathsConfig paths;
  EncoderConfig encoder;  // vocab_size is filled from the vocabulary
  ContrastiveConfig contrastive;
  AugmentationSpec augmentation { ExplicitMode::kEnumeration,
                                  ExplicitMode::kMasking, true, 0.10 };
  HeadConfig transfer;
  SweepConfig sweep;

  static RunConfig parse(std::string_view json_text,
                         const std::filesystem::path &base_dir = {});
  static RunConfig load(const std::filesystem::path &path);

  // Throws ConfigError naming the first referenced path that does not
  // exist.
  void check_paths() const;

  // Canonical JSON of the effective configuration.
  std::string to_json() const;
};

// Baseline, the ten explicit combinations (baseline among them) and
// implicit-only: eleven distinct specs, baseline first.
std::vector<AugmentationSpec> standard_sweep_grid(double ratio = 0.10);

}  // namespace polycl

#endif  // POLYCL_CONFIG_HPP_
