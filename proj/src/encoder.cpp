//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/encoder.hpp"

#include <cmath>
#include <string>

#include "polycl/errors.hpp"
#include "polycl/rng.hpp"

namespace polycl {

namespace {

constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Matrix xhat;
  Eigen::VectorXd rstd;
};

Matrix layer_norm(const Matrix &x, const Matrix &gain, const Matrix &bias,
                  LayerNormCache &cache) {
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  Eigen::VectorXd var = centered.rowwise().squaredNorm() / static_cast<double>(d);
  cache.rstd = (var.array() + kLayerNormEps).rsqrt().matrix();
  cache.xhat = centered.array().colwise() * cache.rstd.array();
  Matrix out = cache.xhat.array().rowwise() * gain.row(0).array();
  out.rowwise() += bias.row(0);
  return out;
}

Matrix layer_norm_backward(const Matrix &grad_out, const LayerNormCache &cache,
                           const Matrix &gain, Matrix &grad_gain,
                           Matrix &grad_bias) {
  grad_gain.row(0) += (grad_out.array() * cache.xhat.array()).colwise().sum().matrix();
  grad_bias.row(0) += grad_out.colwise().sum();
  const Matrix gxhat = grad_out.array().rowwise() * gain.row(0).array();
  const double inv_d = 1.0 / static_cast<double>(gxhat.cols());
  const Eigen::VectorXd mean_g = gxhat.rowwise().sum() * inv_d;
  const Eigen::VectorXd mean_gx =
      (gxhat.array() * cache.xhat.array()).rowwise().sum().matrix() * inv_d;
  Matrix dx = gxhat;
  dx.colwise() -= mean_g;
  dx -= (cache.xhat.array().colwise() * mean_gx.array()).matrix();
  dx.array().colwise() *= cache.rstd.array();
  return dx;
}

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) * 0.5 * M_2_SQRTPI * M_SQRT1_2;
  return cdf + x * pdf;
}

// Inverted-dropout mask: 0 with probability p, 1/(1-p) otherwise.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng &rng) {
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = uniform_unit(rng) < p ? 0.0 : keep;
  return m;
}

void glorot(Matrix &w, Rng &rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      w(r, c) = (2.0 * uniform_unit(rng) - 1.0) * a;
}

}  // namespace

struct BlockCache {
  Matrix x_in;
  LayerNormCache ln1;
  Matrix a;    // ln1 output
  Matrix qkv;
  std::vector<Matrix> probs;       // per head, before dropout
  std::vector<Matrix> prob_masks;  // per head, empty when dropout is off
  Matrix concat;                   // per-head outputs, L x d
  Matrix attn_mask;
  Matrix x_mid;
  LayerNormCache ln2;
  Matrix b;  // ln2 output
  Matrix f1;
  Matrix g;
  Matrix ff_mask;
};

struct SequenceCache {
  std::vector<int> ids;
  Matrix embed_mask;
  std::vector<BlockCache> blocks;
  LayerNormCache final_ln;
  bool dropout = false;
};

void EncoderConfig::validate() const {
  auto fail = [](const std::string &msg) {
    throw ConfigError("encoder config: " + msg);
  };
  if (vocab_size <= kNumSpecialTokens)
    fail("vocab_size must exceed the 5 reserved ids");
  if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_feedforward <= 0
      || projector_out <= 0)
    fail("dimensions must be positive");
  if (d_model % n_heads != 0)
    fail("d_model must be divisible by n_heads");
  if (max_len < 3)
    fail("max_len must leave room for [CLS] token [SEP]");
  if (!(dropout_ratio >= 0.0 && dropout_ratio < 1.0))
    fail("dropout_ratio must be in [0, 1)");
}

EncoderConfig EncoderConfig::desk(int vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  return c;
}

EncoderConfig EncoderConfig::large(int vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.d_model = 600;
  c.n_layers = 1;
  c.n_heads = 12;
  c.d_feedforward = 2400;
  c.max_len = 128;
  c.projector_out = 128;
  return c;
}

EncoderParams EncoderParams::init(const EncoderConfig &config,
                                  std::uint64_t seed) {
  config.validate();
  const int d = config.d_model;
  EncoderParams p;
  p.config = config;
  p.token_embedding = Matrix::Zero(config.vocab_size, d);
  p.position_embedding = Matrix::Zero(config.max_len, d);
  p.blocks.resize(config.n_layers);
  for (auto &b: p.blocks) {
    b.ln1_gain = Matrix::Ones(1, d);
    b.ln1_bias = Matrix::Zero(1, d);
    b.w_qkv = Matrix::Zero(d, 3 * d);
    b.b_qkv = Matrix::Zero(1, 3 * d);
    b.w_out = Matrix::Zero(d, d);
    b.b_out = Matrix::Zero(1, d);
    b.ln2_gain = Matrix::Ones(1, d);
    b.ln2_bias = Matrix::Zero(1, d);
    b.w_ff1 = Matrix::Zero(d, config.d_feedforward);
    b.b_ff1 = Matrix::Zero(1, config.d_feedforward);
    b.w_ff2 = Matrix::Zero(config.d_feedforward, d);
    b.b_ff2 = Matrix::Zero(1, d);
  }
  p.final_gain = Matrix::Ones(1, d);
  p.final_bias = Matrix::Zero(1, d);
  p.projector.w1 = Matrix::Zero(d, d);
  p.projector.b1 = Matrix::Zero(1, d);
  p.projector.w2 = Matrix::Zero(d, config.projector_out);
  p.projector.b2 = Matrix::Zero(1, config.projector_out);

  // Weight matrices are every tensor with more than one row.
  auto ts = p.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i]->rows() > 1) {
      Rng rng(mix64(seed, i, SeedTag::kInit));
      glorot(*ts[i], rng);
    }
  }
  return p;
}

EncoderParams EncoderParams::zeros_like(const EncoderParams &other) {
  EncoderParams p = other;
  for (Matrix *t: p.tensors())
    t->setZero();
  return p;
}

std::vector<Matrix *> EncoderParams::tensors() {
  std::vector<Matrix *> out { &token_embedding, &position_embedding };
  for (auto &b: blocks) {
    for (Matrix *m: { &b.ln1_gain, &b.ln1_bias, &b.w_qkv, &b.b_qkv, &b.w_out,
                      &b.b_out, &b.ln2_gain, &b.ln2_bias, &b.w_ff1, &b.b_ff1,
                      &b.w_ff2, &b.b_ff2 })
      out.push_back(m);
  }
  for (Matrix *m: { &final_gain, &final_bias, &projector.w1, &projector.b1,
                    &projector.w2, &projector.b2 })
    out.push_back(m);
  return out;
}

std::vector<const Matrix *> EncoderParams::tensors() const {
  auto mut = const_cast<EncoderParams *>(this)->tensors();
  return { mut.begin(), mut.end() };
}

std::vector<std::string> EncoderParams::tensor_names() const {
  std::vector<std::string> out { "token_embedding", "position_embedding" };
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const std::string pre = "block" + std::to_string(l) + ".";
    for (const char *n: { "ln1_gain", "ln1_bias", "w_qkv", "b_qkv", "w_out",
                          "b_out", "ln2_gain", "ln2_bias", "w_ff1", "b_ff1",
                          "w_ff2", "b_ff2" })
      out.push_back(pre + n);
  }
  for (const char *n: { "final_gain", "final_bias", "projector.w1",
                        "projector.b1", "projector.w2", "projector.b2" })
    out.emplace_back(n);
  return out;
}

std::size_t EncoderParams::num_parameters() const {
  std::size_t n = 0;
  for (const Matrix *t: tensors())
    n += static_cast<std::size_t>(t->size());
  return n;
}

PaddedBatch make_batch(const std::vector<TokenSequence> &seqs,
                       const Vocabulary &vocab, int max_len) {
  PaddedBatch batch;
  int longest = 0;
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const int len = static_cast<int>(seqs[b].size()) + 2;
    if (len > max_len)
      throw SequenceTooLong("sequence " + std::to_string(b) + " has "
                            + std::to_string(len)
                            + " positions including [CLS]/[SEP]; max_len is "
                            + std::to_string(max_len));
    batch.lengths.push_back(len);
    longest = std::max(longest, len);
  }
  batch.ids.setConstant(static_cast<Eigen::Index>(seqs.size()), longest,
                        static_cast<int>(Special::kPad));
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const auto r = static_cast<Eigen::Index>(b);
    batch.ids(r, 0) = static_cast<int>(Special::kCls);
    Eigen::Index c = 1;
    for (const Token &t: seqs[b])
      batch.ids(r, c++) = vocab.id(t);
    batch.ids(r, c) = static_cast<int>(Special::kSep);
  }
  return batch;
}

namespace {

void check_ids(const EncoderParams &params, std::span<const int> ids) {
  if (ids.empty())
    throw DataError("empty id sequence");
  if (static_cast<int>(ids.size()) > params.config.max_len)
    throw SequenceTooLong("sequence of " + std::to_string(ids.size())
                          + " positions exceeds max_len "
                          + std::to_string(params.config.max_len));
  for (int id: ids)
    if (id < 0 || id >= params.config.vocab_size)
      throw UnknownTokenId("token id " + std::to_string(id)
                           + " outside vocabulary of size "
                           + std::to_string(params.config.vocab_size));
}

// Runs one unpadded sequence; returns the final-norm output (L x d).
Matrix forward_sequence(const EncoderParams &params, std::span<const int> ids,
                        std::optional<std::uint64_t> dropout_seed,
                        SequenceCache &cache) {
  check_ids(params, ids);
  const auto &cfg = params.config;
  const Eigen::Index len = static_cast<Eigen::Index>(ids.size());
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double p = cfg.dropout_ratio;
  const bool drop = dropout_seed.has_value() && p > 0.0;
  Rng rng(dropout_seed.value_or(0));

  cache.ids.assign(ids.begin(), ids.end());
  cache.dropout = drop;

  Matrix x(len, d);
  for (Eigen::Index t = 0; t < len; ++t)
    x.row(t) = params.token_embedding.row(ids[t])
               + params.position_embedding.row(t);
  if (drop) {
    cache.embed_mask = dropout_mask(len, d, p, rng);
    x.array() *= cache.embed_mask.array();
  }

  cache.blocks.resize(params.blocks.size());
  for (std::size_t l = 0; l < params.blocks.size(); ++l) {
    const BlockParams &bp = params.blocks[l];
    BlockCache &bc = cache.blocks[l];
    bc.x_in = x;

    bc.a = layer_norm(x, bp.ln1_gain, bp.ln1_bias, bc.ln1);
    bc.qkv = bc.a * bp.w_qkv;
    bc.qkv.rowwise() += bp.b_qkv.row(0);

    bc.concat.resize(len, d);
    bc.probs.resize(heads);
    bc.prob_masks.assign(drop ? heads : 0, Matrix());
    for (int h = 0; h < heads; ++h) {
      const auto q = bc.qkv.middleCols(h * dh, dh);
      const auto k = bc.qkv.middleCols(d + h * dh, dh);
      const auto v = bc.qkv.middleCols(2 * d + h * dh, dh);
      Matrix s = (q * k.transpose()) * scale;
      for (Eigen::Index r = 0; r < len; ++r) {
        const double m = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - m).exp().matrix();
        s.row(r) /= s.row(r).sum();
      }
      bc.probs[h] = s;
      if (drop) {
        bc.prob_masks[h] = dropout_mask(len, len, p, rng);
        s.array() *= bc.prob_masks[h].array();
      }
      bc.concat.middleCols(h * dh, dh) = s * v;
    }
    Matrix attn = bc.concat * bp.w_out;
    attn.rowwise() += bp.b_out.row(0);
    if (drop) {
      bc.attn_mask = dropout_mask(len, d, p, rng);
      attn.array() *= bc.attn_mask.array();
    }
    x += attn;
    bc.x_mid = x;

    bc.b = layer_norm(x, bp.ln2_gain, bp.ln2_bias, bc.ln2);
    bc.f1 = bc.b * bp.w_ff1;
    bc.f1.rowwise() += bp.b_ff1.row(0);
    bc.g = bc.f1.unaryExpr(&gelu);
    Matrix f2 = bc.g * bp.w_ff2;
    f2.rowwise() += bp.b_ff2.row(0);
    if (drop) {
      bc.ff_mask = dropout_mask(len, d, p, rng);
      f2.array() *= bc.ff_mask.array();
    }
    x += f2;
  }

  return layer_norm(x, params.final_gain, params.final_bias, cache.final_ln);
}

void backward_sequence(const EncoderParams &params, const SequenceCache &cache,
                       const Matrix &grad_out, EncoderParams &grads) {
  const auto &cfg = params.config;
  const Eigen::Index len = static_cast<Eigen::Index>(cache.ids.size());
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix dx = layer_norm_backward(grad_out, cache.final_ln, params.final_gain,
                                  grads.final_gain, grads.final_bias);

  for (std::size_t li = params.blocks.size(); li-- > 0;) {
    const BlockParams &bp = params.blocks[li];
    BlockParams &gp = grads.blocks[li];
    const BlockCache &bc = cache.blocks[li];

    // x_out = x_mid + drop(g * W2 + b2)
    Matrix df2 = dx;
    if (cache.dropout)
      df2.array() *= bc.ff_mask.array();
    gp.w_ff2.noalias() += bc.g.transpose() * df2;
    gp.b_ff2.row(0) += df2.colwise().sum();
    Matrix df1 = df2 * bp.w_ff2.transpose();
    df1.array() *= bc.f1.unaryExpr(&gelu_grad).array();
    gp.w_ff1.noalias() += bc.b.transpose() * df1;
    gp.b_ff1.row(0) += df1.colwise().sum();
    const Matrix db = df1 * bp.w_ff1.transpose();
    dx += layer_norm_backward(db, bc.ln2, bp.ln2_gain, gp.ln2_gain,
                              gp.ln2_bias);

    // x_mid = x_in + drop(concat * Wo + bo)
    Matrix dattn = dx;
    if (cache.dropout)
      dattn.array() *= bc.attn_mask.array();
    gp.w_out.noalias() += bc.concat.transpose() * dattn;
    gp.b_out.row(0) += dattn.colwise().sum();
    const Matrix dconcat = dattn * bp.w_out.transpose();

    Matrix dqkv(len, 3 * d);
    for (int h = 0; h < heads; ++h) {
      const auto q = bc.qkv.middleCols(h * dh, dh);
      const auto k = bc.qkv.middleCols(d + h * dh, dh);
      const auto v = bc.qkv.middleCols(2 * d + h * dh, dh);
      const auto dout = dconcat.middleCols(h * dh, dh);
      const Matrix &probs = bc.probs[h];

      Matrix used = probs;
      if (cache.dropout)
        used.array() *= bc.prob_masks[h].array();
      dqkv.middleCols(2 * d + h * dh, dh) = used.transpose() * dout;

      Matrix dp = dout * v.transpose();
      if (cache.dropout)
        dp.array() *= bc.prob_masks[h].array();
      const Eigen::VectorXd row_dot =
          (dp.array() * probs.array()).rowwise().sum().matrix();
      Matrix ds = probs.array() * (dp.colwise() - row_dot).array();
      ds *= scale;
      dqkv.middleCols(h * dh, dh) = ds * k;
      dqkv.middleCols(d + h * dh, dh) = ds.transpose() * q;
    }
    gp.w_qkv.noalias() += bc.a.transpose() * dqkv;
    gp.b_qkv.row(0) += dqkv.colwise().sum();
    const Matrix da = dqkv * bp.w_qkv.transpose();
    dx += layer_norm_backward(da, bc.ln1, bp.ln1_gain, gp.ln1_gain,
                              gp.ln1_bias);
  }

  if (cache.dropout)
    dx.array() *= cache.embed_mask.array();
  for (Eigen::Index t = 0; t < len; ++t) {
    grads.token_embedding.row(cache.ids[t]) += dx.row(t);
    grads.position_embedding.row(t) += dx.row(t);
  }
}

Matrix project_rows(const ProjectorParams &pp, const Matrix &h, Matrix *pre_out,
                    Matrix *act_out, ProjectorActivation act) {
  Matrix pre = h * pp.w1;
  pre.rowwise() += pp.b1.row(0);
  Matrix hidden = act == ProjectorActivation::kRelu ? Matrix(pre.cwiseMax(0.0))
                                                    : pre;
  Matrix z = hidden * pp.w2;
  z.rowwise() += pp.b2.row(0);
  if (pre_out)
    *pre_out = std::move(pre);
  if (act_out)
    *act_out = std::move(hidden);
  return z;
}

}  // namespace

std::vector<Matrix> encode(const PaddedBatch &batch,
                           const EncoderParams &params, bool dropout_active,
                           std::uint64_t rng_seed) {
  std::vector<Matrix> out;
  out.reserve(batch.size());
  for (int b = 0; b < batch.size(); ++b) {
    if (batch.lengths[b] > params.config.max_len)
      throw SequenceTooLong("sequence " + std::to_string(b)
                            + " exceeds max_len");
    std::optional<std::uint64_t> seed;
    if (dropout_active)
      seed = mix64(rng_seed, static_cast<std::uint64_t>(b), SeedTag::kDropout);
    SequenceCache cache;
    Matrix y = forward_sequence(params, batch.row(b), seed, cache);
    Matrix full = Matrix::Zero(batch.ids.cols(), params.config.d_model);
    full.topRows(y.rows()) = y;
    out.push_back(std::move(full));
  }
  return out;
}

RowVector pool_cls(const Matrix &contextual) {
  if (contextual.rows() == 0)
    throw DataError("cannot pool an empty sequence");
  return contextual.row(0);
}

RowVector project(const RowVector &h, const ProjectorParams &params,
                  ProjectorActivation act) {
  if (!h.allFinite())
    throw NumericError("projector input is not finite");
  return project_rows(params, h, nullptr, nullptr, act).row(0);
}

Matrix embed(const std::vector<TokenSequence> &seqs,
             const EncoderParams &params, const Vocabulary &vocab) {
  const int d = params.config.d_model;
  Matrix out(static_cast<Eigen::Index>(seqs.size()), d);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const PaddedBatch one = make_batch({ seqs[i] }, vocab,
                                       params.config.max_len);
    SequenceCache cache;
    out.row(static_cast<Eigen::Index>(i)) =
        forward_sequence(params, one.row(0), std::nullopt, cache).row(0);
  }
  return out;
}

PairOutput forward_pair(const PositivePair &pair, const EncoderParams &params,
                        const AugmentationSpec &spec, const Vocabulary &vocab) {
  const PaddedBatch batch =
      make_batch({ pair.view_i, pair.view_j }, vocab, params.config.max_len);
  std::optional<std::uint64_t> seed_i, seed_j;
  if (spec.implicit_dropout) {
    seed_i = mix64(pair.seed_i, 0, SeedTag::kDropout);
    seed_j = mix64(pair.seed_j, 0, SeedTag::kDropout);
  }
  const BatchTape tape =
      forward_batch(params, { batch.row(0), batch.row(1) }, { seed_i, seed_j });
  return { tape.h().row(0), tape.h().row(1), tape.z().row(0),
           tape.z().row(1) };
}

BatchTape::BatchTape() = default;
BatchTape::~BatchTape() = default;
BatchTape::BatchTape(BatchTape &&) noexcept = default;
BatchTape &BatchTape::operator=(BatchTape &&) noexcept = default;

BatchTape forward_batch(
    const EncoderParams &params,
    const std::vector<std::span<const int>> &sequences,
    const std::vector<std::optional<std::uint64_t>> &dropout_seeds) {
  if (sequences.size() != dropout_seeds.size())
    throw DataError("one dropout seed slot per sequence is required");
  BatchTape tape;
  const auto n = static_cast<Eigen::Index>(sequences.size());
  tape.h_.resize(n, params.config.d_model);
  tape.caches_.resize(sequences.size());
  for (std::size_t b = 0; b < sequences.size(); ++b) {
    const Matrix y = forward_sequence(params, sequences[b], dropout_seeds[b],
                                      tape.caches_[b]);
    tape.h_.row(static_cast<Eigen::Index>(b)) = y.row(0);
  }
  tape.z_ = project_rows(params.projector, tape.h_, &tape.proj_pre_,
                         &tape.proj_act_, ProjectorActivation::kRelu);
  return tape;
}

void backward_batch(const EncoderParams &params, const BatchTape &tape,
                    const Matrix &grad_z, EncoderParams &grads) {
  const ProjectorParams &pp = params.projector;
  ProjectorParams &gp = grads.projector;
  gp.w2.noalias() += tape.proj_act_.transpose() * grad_z;
  gp.b2.row(0) += grad_z.colwise().sum();
  Matrix dpre = grad_z * pp.w2.transpose();
  dpre.array() *= (tape.proj_pre_.array() > 0.0).cast<double>();
  gp.w1.noalias() += tape.h_.transpose() * dpre;
  gp.b1.row(0) += dpre.colwise().sum();
  const Matrix dh = dpre * pp.w1.transpose();

  for (std::size_t b = 0; b < tape.caches_.size(); ++b) {
    const SequenceCache &cache = tape.caches_[b];
    Matrix grad_out = Matrix::Zero(static_cast<Eigen::Index>(cache.ids.size()),
                                   params.config.d_model);
    grad_out.row(0) = dh.row(static_cast<Eigen::Index>(b));
    backward_sequence(params, cache, grad_out, grads);
  }
}

}  // namespace polycl
