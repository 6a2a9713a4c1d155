//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_SWEEP_HPP_
#define POLYCL_SWEEP_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polycl/augment.hpp"
#include "polycl/contrastive.hpp"
#include "polycl/encoder.hpp"
#include "polycl/transfer.hpp"

namespace polycl {

struct SweepSetup {
  std::vector<std::string> corpus;
  std::vector<std::string> eval_corpus;  // empty: sampled from corpus
  std::vector<PropertyDataset> datasets;
  std::vector<AugmentationSpec> grid;
  EncoderConfig encoder;
  ContrastiveConfig contrastive;
  HeadConfig head;
  int workers = 1;
  // When set, each spec writes checkpoints and its train log to
  // out_dir/<spec tag>/.
  std::optional<std::filesystem::path> out_dir;
};

struct SweepCell {
  std::string spec_tag;
  std::string dataset;
  bool ok = false;
  std::string error;
  double mean_r2 = 0.0;
  double mean_rmse = 0.0;
  double delta_r2 = 0.0;  // versus the baseline cell of the same dataset
  std::string verdict;    // baseline | improved | degraded | tied | failed
  double alignment = 0.0;
  double uniformity = 0.0;
};

struct SweepTable {
  std::vector<SweepCell> cells;  // grid order, datasets inner

  // Header spec,dataset,mean_r2,mean_rmse,delta_r2,verdict,alignment,
  // uniformity,error.
  void write_csv(std::ostream &os) const;
  std::size_t failures() const;
};

// One pretraining run per spec (the no-augmentation baseline is prepended
// when missing), then frozen-encoder cross-validation on every dataset.
// Cells run on up to `workers` threads; failures are recorded per cell and
// the sweep continues. Throws ConfigError on an empty grid.
SweepTable run_sweep(const SweepSetup &setup, const Vocabulary &vocab);

}  // namespace polycl

#endif  // POLYCL_SWEEP_HPP_
