//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_ENCODER_HPP_
#define POLYCL_ENCODER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polycl/augment.hpp"
#include "polycl/tokenizer.hpp"

namespace polycl {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

struct EncoderConfig {
  int vocab_size = 0;
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_feedforward = 128;
  int max_len = 128;
  // Applied to attention probabilities and hidden-layer outputs whenever
  // dropout is active (the implicit augmentation).
  double dropout_ratio = 0.1;
  int projector_out = 32;

  void validate() const;

  // CPU-trainable default.
  static EncoderConfig desk(int vocab_size);

  // 600-wide representation projected to 128, single block. Used for shape
  // checks only.
  static EncoderConfig large(int vocab_size);

  friend bool operator==(const EncoderConfig &,
                         const EncoderConfig &) = default;
};

// Pre-norm transformer block. Matrices multiply row vectors from the right
// (x * W); biases and norm parameters are 1 x n.
struct BlockParams {
  Matrix ln1_gain, ln1_bias;
  Matrix w_qkv, b_qkv;  // d x 3d, columns [Q | K | V]
  Matrix w_out, b_out;
  Matrix ln2_gain, ln2_bias;
  Matrix w_ff1, b_ff1;
  Matrix w_ff2, b_ff2;
};

// z = W2 * relu(W1 * h + b1) + b2, hidden width d_model.
struct ProjectorParams {
  Matrix w1, b1;
  Matrix w2, b2;
};

struct EncoderParams {
  EncoderConfig config;
  Matrix token_embedding;     // vocab_size x d
  Matrix position_embedding;  // max_len x d
  std::vector<BlockParams> blocks;
  Matrix final_gain, final_bias;
  ProjectorParams projector;

  // Glorot-uniform weights (gain 1), zero biases, unit norm gains. Each
  // tensor draws from its own stream mix64(seed, tensor index, kInit).
  static EncoderParams init(const EncoderConfig &config, std::uint64_t seed);

  // Same shapes, all zeros. Used as a gradient accumulator.
  static EncoderParams zeros_like(const EncoderParams &other);

  // Every trainable tensor in declaration order (checkpoint order).
  std::vector<Matrix *> tensors();
  std::vector<const Matrix *> tensors() const;
  std::vector<std::string> tensor_names() const;

  std::size_t num_parameters() const;
};

// Token ids of a batch, each row [CLS] ids [SEP] followed by PAD. Positions
// at or beyond lengths[b] are padding and never enter the computation.
struct PaddedBatch {
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> ids;
  std::vector<int> lengths;

  int size() const noexcept { return static_cast<int>(lengths.size()); }
  std::span<const int> row(int b) const {
    return { ids.data() + static_cast<std::ptrdiff_t>(b) * ids.cols(),
             static_cast<std::size_t>(lengths[b]) };
  }
};

// Throws SequenceTooLong when a sequence plus CLS/SEP exceeds max_len.
PaddedBatch make_batch(const std::vector<TokenSequence> &seqs,
                       const Vocabulary &vocab, int max_len);

// Contextual embeddings, one (padded length x d_model) matrix per sequence;
// padding rows are zero. With dropout_active the masks for sequence b come
// from mix64(rng_seed, b, kDropout). Throws UnknownTokenId or
// SequenceTooLong on invalid input.
std::vector<Matrix> encode(const PaddedBatch &batch,
                           const EncoderParams &params, bool dropout_active,
                           std::uint64_t rng_seed);

RowVector pool_cls(const Matrix &contextual);

enum class ProjectorActivation : std::uint8_t { kRelu, kLinear };

RowVector project(const RowVector &h, const ProjectorParams &params,
                  ProjectorActivation act = ProjectorActivation::kRelu);

// Pooled h for every sequence with dropout off; rows follow input order.
Matrix embed(const std::vector<TokenSequence> &seqs,
             const EncoderParams &params, const Vocabulary &vocab);

struct PairOutput {
  RowVector h_i, h_j, z_i, z_j;
};

// Both branches through encoder, pooling and projector. Dropout follows
// spec.implicit_dropout with seeds mix64(pair.seed_i|j, 0, kDropout).
PairOutput forward_pair(const PositivePair &pair, const EncoderParams &params,
                        const AugmentationSpec &spec, const Vocabulary &vocab);

// ---- training path -------------------------------------------------------

struct SequenceCache;

// Forward state for a batch of sequences, retained for backpropagation.
class BatchTape {
public:
  BatchTape();
  ~BatchTape();
  BatchTape(BatchTape &&) noexcept;
  BatchTape &operator=(BatchTape &&) noexcept;

  const Matrix &h() const noexcept { return h_; }
  const Matrix &z() const noexcept { return z_; }

private:
  friend BatchTape forward_batch(const EncoderParams &,
                                 const std::vector<std::span<const int>> &,
                                 const std::vector<std::optional<std::uint64_t>> &);
  friend void backward_batch(const EncoderParams &, const BatchTape &,
                             const Matrix &, EncoderParams &);

  Matrix h_, z_;
  Matrix proj_pre_;  // H * W1 + b1
  Matrix proj_act_;  // relu(proj_pre_)
  std::vector<SequenceCache> caches_;
};

// Forward pass over unpadded id sequences ([CLS] ... [SEP]). dropout_seeds[b]
// enables dropout for sequence b when set.
BatchTape forward_batch(
    const EncoderParams &params,
    const std::vector<std::span<const int>> &sequences,
    const std::vector<std::optional<std::uint64_t>> &dropout_seeds);

// Accumulates d(loss)/d(params) into grads given d(loss)/dZ.
void backward_batch(const EncoderParams &params, const BatchTape &tape,
                    const Matrix &grad_z, EncoderParams &grads);

}  // namespace polycl

#endif  // POLYCL_ENCODER_HPP_
