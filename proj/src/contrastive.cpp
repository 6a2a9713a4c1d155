//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/contrastive.hpp"

#include <cmath>
#include <optional>
#include <span>

#include "polycl/errors.hpp"
#include "polycl/rng.hpp"

namespace polycl {

void ContrastiveConfig::validate() const {
  auto fail = [](const std::string &msg) {
    throw ConfigError("contrastive config: " + msg);
  };
  if (!(temperature > 0.0))
    fail("temperature must be positive");
  if (batch_size < 1)
    fail("batch_size must be at least 1");
  if (epochs < 0)
    fail("epochs must be non-negative");
  if (max_steps < 0)
    fail("max_steps must be non-negative");
  if (!(learning_rate >= 0.0))
    fail("learning_rate must be non-negative");
  if (!(max_grad_norm > 0.0))
    fail("max_grad_norm must be positive");
  if (!(weight_decay >= 0.0))
    fail("weight_decay must be non-negative");
}

ContrastiveConfig ContrastiveConfig::large() {
  ContrastiveConfig c;
  c.learning_rate = 1e-5;
  return c;
}

NtXentResult nt_xent_loss(const Matrix &z, double temperature) {
  if (!(temperature > 0.0))
    throw NonPositiveTemperature("temperature must be positive");
  const Eigen::Index m = z.rows();
  if (m < 2 || m % 2 != 0)
    throw DataError("contrastive loss needs 2N rows with N >= 1");
  const Eigen::Index half = m / 2;

  const Eigen::VectorXd norms = z.rowwise().norm();
  for (Eigen::Index a = 0; a < m; ++a)
    if (!(norms(a) >= 1e-12))
      throw ZeroVector("latent row " + std::to_string(a) + " has zero norm");

  const Matrix u = z.array().colwise() / norms.array();
  const Matrix sim = u * u.transpose();

  // grad_sim(a, k) = d(loss)/d(sim(a, k)), accumulated per anchor row.
  Matrix grad_sim = Matrix::Zero(m, m);
  double total = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::Index pos = (a + half) % m;
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k)
      if (k != a)
        mx = std::max(mx, sim(a, k) / temperature);
    double denom = 0.0;
    for (Eigen::Index k = 0; k < m; ++k)
      if (k != a)
        denom += std::exp(sim(a, k) / temperature - mx);
    total += -sim(a, pos) / temperature + mx + std::log(denom);

    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == a)
        continue;
      const double softmax = std::exp(sim(a, k) / temperature - mx) / denom;
      grad_sim(a, k) += softmax / temperature;
    }
    grad_sim(a, pos) -= 1.0 / temperature;
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  grad_sim *= inv_m;

  // sim = u u^T  =>  dL/du = (G + G^T) u
  const Matrix grad_u = (grad_sim + grad_sim.transpose()) * u;
  // u = z / |z|  =>  dL/dz = (dL/du - u <u, dL/du>) / |z|
  const Eigen::VectorXd proj = (grad_u.array() * u.array()).rowwise().sum();
  Matrix grad_z = grad_u - (u.array().colwise() * proj.array()).matrix();
  grad_z.array().colwise() /= norms.array();

  return { total * inv_m, std::move(grad_z) };
}

std::vector<double> positive_cosines(const Matrix &z) {
  const Eigen::Index half = z.rows() / 2;
  std::vector<double> out;
  for (Eigen::Index a = 0; a < half; ++a) {
    const double nu = z.row(a).norm();
    const double nv = z.row(a + half).norm();
    if (nu < 1e-12 || nv < 1e-12)
      throw ZeroVector("latent row has zero norm");
    out.push_back(z.row(a).dot(z.row(a + half)) / (nu * nv));
  }
  return out;
}

double contrastive_loss_and_grad(const std::vector<PositivePair> &batch,
                                 const EncoderParams &params,
                                 const AugmentationSpec &spec,
                                 const Vocabulary &vocab, double temperature,
                                 EncoderParams *grads) {
  if (batch.empty())
    throw DataError("training batch is empty");
  const auto n = batch.size();

  std::vector<TokenSequence> views;
  views.reserve(2 * n);
  for (const auto &p: batch)
    views.push_back(p.view_i);
  for (const auto &p: batch)
    views.push_back(p.view_j);
  const PaddedBatch padded = make_batch(views, vocab, params.config.max_len);

  std::vector<std::span<const int>> rows;
  std::vector<std::optional<std::uint64_t>> seeds(2 * n);
  for (int b = 0; b < padded.size(); ++b)
    rows.push_back(padded.row(b));
  if (spec.implicit_dropout) {
    for (std::size_t k = 0; k < n; ++k) {
      seeds[k] = mix64(batch[k].seed_i, 0, SeedTag::kDropout);
      seeds[k + n] = mix64(batch[k].seed_j, 0, SeedTag::kDropout);
    }
  }

  const BatchTape tape = forward_batch(params, rows, seeds);
  NtXentResult res = nt_xent_loss(tape.z(), temperature);
  if (!std::isfinite(res.loss))
    throw NonFiniteLoss("contrastive loss is not finite");
  if (grads)
    backward_batch(params, tape, res.grad, *grads);
  return res.loss;
}

ContrastiveTrainer::ContrastiveTrainer(const EncoderParams &params,
                                       const ContrastiveConfig &cfg)
    : cfg_(cfg),
      opt_(params.tensors(),
           AdamWOptions { cfg.learning_rate, cfg.weight_decay }) {
  cfg_.validate();
}

StepResult ContrastiveTrainer::train_step(
    const std::vector<PositivePair> &batch, EncoderParams &params,
    const AugmentationSpec &spec, const Vocabulary &vocab) {
  EncoderParams grads = EncoderParams::zeros_like(params);
  const double loss = contrastive_loss_and_grad(
      batch, params, spec, vocab, cfg_.temperature, &grads);
  const double norm = clip_grad_norm(grads.tensors(), cfg_.max_grad_norm);
  if (!std::isfinite(norm))
    throw NonFiniteLoss("gradient norm is not finite");
  const auto &cg = grads;
  opt_.step(params.tensors(), cg.tensors());
  return { loss, norm };
}

}  // namespace polycl
