//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_PRETRAIN_HPP_
#define POLYCL_PRETRAIN_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "polycl/augment.hpp"
#include "polycl/contrastive.hpp"
#include "polycl/encoder.hpp"

namespace polycl {

struct MetricSnapshot {
  long step;
  double fraction;  // step / total steps
  double alignment;
  double uniformity;

  friend bool operator==(const MetricSnapshot &,
                         const MetricSnapshot &) = default;
};

struct TrainLog {
  long total_steps = 0;
  std::vector<double> step_loss;   // entry s-1 is the loss of step s
  std::vector<double> grad_norm;   // pre-clip global norm per step
  std::vector<int> step_epoch;     // 1-based epoch of each step
  std::vector<double> epoch_mean_loss;
  std::vector<MetricSnapshot> snapshots;

  // Columns step,epoch,loss,alignment,uniformity. Row 0 holds the
  // random-init metrics with an empty loss; metric cells are empty off the
  // snapshot schedule.
  void write_csv(std::ostream &os) const;
  std::string to_csv() const;

  friend bool operator==(const TrainLog &, const TrainLog &) = default;
};

// Steps at which metrics are recorded: every 2% of training for the first
// 20%, then every 20% (step 0 included). Steps are round(f * total),
// deduplicated.
std::vector<long> snapshot_steps(long total_steps);

// Optimizer steps a run will take: epochs * floor(corpus / batch) unless
// max_steps overrides it.
long planned_steps(std::size_t corpus_size, const ContrastiveConfig &cfg);

using CheckpointSink =
    std::function<void(const std::string &name, const EncoderParams &)>;

struct PretrainOptions {
  // Polymers for the metric snapshots; when empty a seeded sample of up to
  // eval_sample corpus entries is used.
  std::vector<std::string> eval_corpus;
  std::size_t eval_sample = 256;
  bool record_metrics = true;
  // Receives "ckpt_<step>" at every snapshot step, then "ckpt_best" (lowest
  // epoch-mean loss) and "ckpt_final".
  CheckpointSink sink;
};

struct PretrainResult {
  EncoderParams params;
  EncoderParams best_params;
  TrainLog log;
};

// Contrastive pretraining from a seeded random initialization. Each epoch
// visits a freshly shuffled corpus (mix64(seed, epoch, kShuffle)) in full
// batches; views for step s use batch seed mix64(seed, s, kViews). Throws
// DatasetTooSmall when the corpus cannot fill one batch.
PretrainResult pretrain(const std::vector<std::string> &corpus,
                        const AugmentationSpec &spec,
                        const EncoderConfig &enc_cfg,
                        const ContrastiveConfig &cfg, const Vocabulary &vocab,
                        const PretrainOptions &opts = {});

// The default sample used for metric snapshots.
std::vector<std::string> eval_sample(const std::vector<std::string> &corpus,
                                     std::size_t max_size, std::uint64_t seed);

}  // namespace polycl

#endif  // POLYCL_PRETRAIN_HPP_
