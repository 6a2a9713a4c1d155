//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_CONTRASTIVE_HPP_
#define POLYCL_CONTRASTIVE_HPP_

#include <cstdint>
#include <vector>

#include "polycl/augment.hpp"
#include "polycl/encoder.hpp"
#include "polycl/optim.hpp"

namespace polycl {

struct ContrastiveConfig {
  double temperature = 0.05;
  int batch_size = 32;
  int epochs = 10;
  // When positive, training stops after this many optimizer steps
  // (continuing into further epochs if needed).
  long max_steps = 0;
  double learning_rate = 1e-3;
  double max_grad_norm = 1.0;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;

  // Optimizer contract of the full-size run (learning rate 1e-5).
  static ContrastiveConfig large();
};

struct NtXentResult {
  double loss;
  Matrix grad;  // d(loss)/dz, same shape as z
};

// Normalized temperature-scaled cross entropy over 2N rows laid out as
// [i-views; j-views]: row a's positive is row (a + N) mod 2N and every other
// row is a negative. The loss is the mean over all 2N anchors of
//   -log( exp(sim(a, pos)/tau) / sum_{k != a} exp(sim(a, k)/tau) )
// with cosine similarity. Throws ZeroVector, NonPositiveTemperature.
NtXentResult nt_xent_loss(const Matrix &z, double temperature);

// Cosine similarity of the positive pair for every anchor pair.
std::vector<double> positive_cosines(const Matrix &z);

struct StepResult {
  double loss;
  double grad_norm;  // before clipping
};

// Holds the optimizer moments across steps.
class ContrastiveTrainer {
public:
  ContrastiveTrainer(const EncoderParams &params, const ContrastiveConfig &cfg);

  // Forward both branches, loss on projected z, backprop, clip the global
  // gradient norm, AdamW update. Throws NonFiniteLoss.
  StepResult train_step(const std::vector<PositivePair> &batch,
                        EncoderParams &params, const AugmentationSpec &spec,
                        const Vocabulary &vocab);

  const AdamW &optimizer() const noexcept { return opt_; }

private:
  ContrastiveConfig cfg_;
  AdamW opt_;
};

// Loss and parameter gradient for a batch of pairs without updating
// anything. Shared by the trainer and the gradient checks.
double contrastive_loss_and_grad(const std::vector<PositivePair> &batch,
                                 const EncoderParams &params,
                                 const AugmentationSpec &spec,
                                 const Vocabulary &vocab, double temperature,
                                 EncoderParams *grads);

}  // namespace polycl

#endif  // POLYCL_CONTRASTIVE_HPP_
