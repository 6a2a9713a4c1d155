//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "polycl/errors.hpp"
#include "polycl/io.hpp"
#include "polycl/metrics.hpp"
#include "polycl/rng.hpp"

namespace polycl {

void TrainLog::write_csv(std::ostream &os) const {
  os << "step,epoch,loss,alignment,uniformity\n";
  std::size_t snap = 0;
  for (long s = 0; s <= total_steps; ++s) {
    const MetricSnapshot *m = nullptr;
    if (snap < snapshots.size() && snapshots[snap].step == s)
      m = &snapshots[snap++];
    if (s == 0 && !m)
      continue;
    os << s << ',';
    if (s > 0) {
      const auto k = static_cast<std::size_t>(s - 1);
      os << step_epoch[k] << ',' << format_real(step_loss[k]);
    } else {
      os << "0,";
    }
    os << ',';
    if (m)
      os << format_real(m->alignment) << ',' << format_real(m->uniformity);
    else
      os << ',';
    os << '\n';
  }
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

std::vector<long> snapshot_steps(long total_steps) {
  std::vector<double> fractions;
  for (int k = 0; k <= 10; ++k)
    fractions.push_back(0.02 * k);
  for (int k = 2; k <= 5; ++k)
    fractions.push_back(0.2 * k);
  std::vector<long> out;
  for (double f: fractions) {
    const long s = std::lround(f * static_cast<double>(total_steps));
    if (out.empty() || out.back() != s)
      out.push_back(s);
  }
  return out;
}

long planned_steps(std::size_t corpus_size, const ContrastiveConfig &cfg) {
  if (cfg.max_steps > 0)
    return cfg.max_steps;
  const auto per_epoch =
      static_cast<long>(corpus_size / static_cast<std::size_t>(cfg.batch_size));
  return per_epoch * cfg.epochs;
}

std::vector<std::string> eval_sample(const std::vector<std::string> &corpus,
                                     std::size_t max_size, std::uint64_t seed) {
  std::vector<std::size_t> idx(corpus.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix64(seed, 0, SeedTag::kEvalSample));
  shuffle(idx, rng);
  idx.resize(std::min(max_size, idx.size()));
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  for (std::size_t i: idx)
    out.push_back(corpus[i]);
  return out;
}

PretrainResult pretrain(const std::vector<std::string> &corpus,
                        const AugmentationSpec &spec,
                        const EncoderConfig &enc_cfg,
                        const ContrastiveConfig &cfg, const Vocabulary &vocab,
                        const PretrainOptions &opts) {
  cfg.validate();
  spec.validate();
  enc_cfg.validate();
  if (corpus.empty())
    throw EmptySet("pretraining corpus is empty");
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  if (corpus.size() < batch)
    throw DatasetTooSmall("corpus of " + std::to_string(corpus.size())
                          + " polymers cannot fill a batch of "
                          + std::to_string(batch));

  const long total = planned_steps(corpus.size(), cfg);
  const std::size_t per_epoch = corpus.size() / batch;

  EncoderParams params = EncoderParams::init(enc_cfg, cfg.seed);
  ContrastiveTrainer trainer(params, cfg);

  const std::vector<std::string> eval_set =
      opts.eval_corpus.empty()
          ? eval_sample(corpus, opts.eval_sample, cfg.seed)
          : opts.eval_corpus;
  const std::vector<long> schedule = snapshot_steps(total);
  std::size_t next_snap = 0;

  PretrainResult result { params, params, {} };
  TrainLog &log = result.log;
  log.total_steps = total;

  auto maybe_snapshot = [&](long step) {
    if (next_snap >= schedule.size() || schedule[next_snap] != step)
      return;
    ++next_snap;
    if (opts.record_metrics) {
      const ReprMetrics m =
          evaluate_representation(eval_set, params, vocab, cfg.seed);
      log.snapshots.push_back(
          { step, total > 0 ? static_cast<double>(step) / total : 0.0,
            m.alignment, m.uniformity });
      spdlog::info("step {}/{}: alignment {:.6f} uniformity {:.6f}", step,
                   total, m.alignment, m.uniformity);
    }
    if (opts.sink)
      opts.sink("ckpt_" + std::to_string(step), params);
  };

  maybe_snapshot(0);

  double best_epoch_loss = std::numeric_limits<double>::infinity();
  long step = 0;
  std::vector<std::size_t> order(corpus.size());
  for (std::uint64_t epoch = 0; step < total; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix64(cfg.seed, epoch, SeedTag::kShuffle));
    shuffle(order, rng);

    double epoch_sum = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t b = 0; b < per_epoch && step < total; ++b) {
      std::vector<std::string> anchors;
      std::vector<std::size_t> ids;
      for (std::size_t k = b * batch; k < (b + 1) * batch; ++k) {
        ids.push_back(order[k]);
        anchors.push_back(corpus[order[k]]);
      }
      const auto pairs = make_pair_batch(
          anchors, spec,
          mix64(cfg.seed, static_cast<std::uint64_t>(step), SeedTag::kViews),
          ids);
      const StepResult r = trainer.train_step(pairs, params, spec, vocab);
      ++step;
      log.step_loss.push_back(r.loss);
      log.grad_norm.push_back(r.grad_norm);
      log.step_epoch.push_back(static_cast<int>(epoch + 1));
      epoch_sum += r.loss;
      ++epoch_steps;
      spdlog::debug("step {} loss {:.6f} grad-norm {:.4f}", step, r.loss,
                    r.grad_norm);
      maybe_snapshot(step);
    }
    const double mean = epoch_sum / static_cast<double>(epoch_steps);
    log.epoch_mean_loss.push_back(mean);
    spdlog::info("epoch {} mean loss {:.6f}", epoch + 1, mean);
    if (mean < best_epoch_loss) {
      best_epoch_loss = mean;
      result.best_params = params;
    }
  }

  result.params = params;
  if (opts.sink) {
    opts.sink("ckpt_best", result.best_params);
    opts.sink("ckpt_final", result.params);
  }
  return result;
}

}  // namespace polycl
