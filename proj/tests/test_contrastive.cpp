//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "polycl/contrastive.hpp"
#include "polycl/errors.hpp"
#include "polycl/optim.hpp"
#include "polycl/rng.hpp"
#include "polycl/synth.hpp"

using namespace polycl;

namespace {

std::vector<std::vector<double>> rows_of(const Matrix &z) {
  std::vector<std::vector<double>> out(z.rows(), std::vector<double>(z.cols()));
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    for (Eigen::Index c = 0; c < z.cols(); ++c)
      out[r][c] = z(r, c);
  return out;
}

Matrix random_z(Rng &rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix z(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      z(r, c) = 2 * uniform_unit(rng) - 1;
  return z;
}

}  // namespace

TEST_CASE("single pair has zero loss") {
  Matrix z(2, 3);
  z << 1, 2, 3, -1, 0.5, 2;
  const auto r = nt_xent_loss(z, 0.05);
  CHECK(r.loss == 0.0);
  CHECK(r.grad.isZero(0.0));
}

TEST_CASE("two pairs hand case") {
  // Pairs (a, a') and (b, b') with a = a' = e1, b = b' = e2; rows laid out
  // [i-views; j-views].
  Matrix z(4, 2);
  z << 1, 0, 0, 1, 1, 0, 0, 1;
  const double expect = -std::log(std::exp(1.0) / (std::exp(1.0) + 2.0));
  CHECK(std::abs(nt_xent_loss(z, 1.0).loss - expect) <= 1e-12);
  CHECK(std::abs(nt_xent_loss(z, 1.0).loss - 0.551445) <= 1e-6);
  CHECK(std::abs(oracle::nt_xent_naive(rows_of(z), 1.0) - expect) <= 1e-12);
  CHECK(std::abs(nt_xent_loss(3.0 * z, 1.0).loss - expect) <= 1e-12);
}

TEST_CASE("loss matches naive evaluation and finite differences") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + uniform_index(rng, 4));
    const auto d = static_cast<Eigen::Index>(2 + uniform_index(rng, 7));
    const double tau = 0.05 + uniform_unit(rng);
    Matrix z = random_z(rng, 2 * n, d);
    const auto r = nt_xent_loss(z, tau);
    CHECK(std::abs(r.loss - oracle::nt_xent_naive(rows_of(z), tau)) <= 1e-10);
    Matrix fd(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double keep = z(i, j);
        z(i, j) = keep + 1e-5;
        const double up = oracle::nt_xent_naive(rows_of(z), tau);
        z(i, j) = keep - 1e-5;
        const double down = oracle::nt_xent_naive(rows_of(z), tau);
        z(i, j) = keep;
        fd(i, j) = (up - down) / 2e-5;
      }
    const double denom = std::max({ r.grad.norm(), fd.norm(), 1e-12 });
    CHECK((r.grad - fd).norm() / denom <= 1e-4);
  }
}

TEST_CASE("loss invariances") {
  Rng rng(5);
  Matrix z = random_z(rng, 8, 5);
  const double base = nt_xent_loss(z, 0.2).loss;

  Matrix scaled = z;
  for (Eigen::Index r = 0; r < scaled.rows(); ++r)
    scaled.row(r) *= 0.5 + 3 * uniform_unit(rng);
  CHECK(std::abs(nt_xent_loss(scaled, 0.2).loss - base) <= 1e-12);

  // Permute pair order consistently in both halves.
  const int perm[] = { 2, 0, 3, 1 };
  Matrix permuted(8, 5);
  for (int k = 0; k < 4; ++k) {
    permuted.row(k) = z.row(perm[k]);
    permuted.row(k + 4) = z.row(perm[k] + 4);
  }
  CHECK(std::abs(nt_xent_loss(permuted, 0.2).loss - base) <= 1e-12);

  // Large temperature: every anchor tends to log(2N - 1).
  const Matrix unit = z.rowwise().normalized();
  CHECK(std::abs(nt_xent_loss(unit, 1e6).loss - std::log(7.0)) <= 1e-6);
}

TEST_CASE("loss errors") {
  Matrix z = Matrix::Ones(4, 3);
  CHECK_THROWS_AS(nt_xent_loss(z, 0.0), NonPositiveTemperature);
  CHECK_THROWS_AS(nt_xent_loss(z, -1.0), NonPositiveTemperature);
  z.row(2).setZero();
  CHECK_THROWS_AS(nt_xent_loss(z, 0.1), ZeroVector);
  CHECK_THROWS_AS(nt_xent_loss(Matrix::Ones(3, 2), 0.1), DataError);
}

TEST_CASE("clipping") {
  Eigen::MatrixXd a(1, 2), b(2, 1);
  a << 3, 0;
  b << 0, 4;
  CHECK(global_norm({ &a, &b }) == 5.0);
  const double pre = clip_grad_norm({ &a, &b }, 1.0);
  CHECK(pre == 5.0);
  CHECK(std::abs(global_norm({ &a, &b }) - 1.0) <= 1e-9);
  const double again = clip_grad_norm({ &a, &b }, 2.0);
  CHECK(std::abs(again - 1.0) <= 1e-9);
  CHECK(std::abs(global_norm({ &a, &b }) - 1.0) <= 1e-9);

  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Eigen::MatrixXd g = random_z(rng, 3, 4) * (uniform_unit(rng) * 100);
    const double mx = 0.01 + uniform_unit(rng) * 5;
    clip_grad_norm({ &g }, mx);
    CHECK(global_norm({ &g }) <= mx + 1e-9);
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(clip_grad_norm({ &g }, 0.0), ConfigError);
}

TEST_CASE("AdamW update rule") {
  // One step from zero moments moves each weight by -lr * sign(g) (up to
  // eps), plus the decoupled decay term.
  Eigen::MatrixXd w(1, 3), g(1, 3);
  w << 1.0, -2.0, 0.5;
  g << 0.3, -4.0, 0.0;
  AdamW opt({ &w }, AdamWOptions { 0.1, 0.01 });
  const Eigen::MatrixXd before = w;
  opt.step({ &w }, { &g });
  for (int k = 0; k < 3; ++k) {
    const double decayed = before(0, k) - 0.1 * 0.01 * before(0, k);
    const double mhat = g(0, k);
    const double vhat = g(0, k) * g(0, k);
    CHECK(std::abs(w(0, k) - (decayed - 0.1 * mhat / (std::sqrt(vhat) + 1e-8))) <= 1e-15);
  }
  CHECK(opt.steps() == 1);
}

TEST_CASE("train_step") {
  const auto &vocab = Vocabulary::builtin();
  EncoderConfig ec = EncoderConfig::desk(vocab.size());
  ec.d_model = 16;
  ec.n_heads = 2;
  ec.d_feedforward = 16;
  ec.projector_out = 8;
  ec.max_len = 64;
  AugmentationSpec spec { ExplicitMode::kEnumeration, ExplicitMode::kMasking, true, 0.1 };
  const auto batch = make_pair_batch(synth_polymers(6, 2), spec, 4);

  SUBCASE("zero learning rate leaves parameters unchanged") {
    EncoderParams p = EncoderParams::init(ec, 1);
    const EncoderParams before = p;
    ContrastiveConfig cfg;
    cfg.learning_rate = 0.0;
    ContrastiveTrainer trainer(p, cfg);
    const auto r = trainer.train_step(batch, p, spec, vocab);
    CHECK(r.loss > 0);
    CHECK(std::isfinite(r.grad_norm));
    const auto a = p.tensors();
    const auto b = before.tensors();
    for (std::size_t k = 0; k < a.size(); ++k)
      CHECK(*a[k] == *b[k]);
  }

  SUBCASE("determinism") {
    EncoderParams p1 = EncoderParams::init(ec, 1), p2 = EncoderParams::init(ec, 1);
    ContrastiveConfig cfg;
    ContrastiveTrainer t1(p1, cfg), t2(p2, cfg);
    for (int s = 0; s < 3; ++s) {
      const auto r1 = t1.train_step(batch, p1, spec, vocab);
      const auto r2 = t2.train_step(batch, p2, spec, vocab);
      CHECK(r1.loss == r2.loss);
    }
    const auto a = p1.tensors();
    const auto b = p2.tensors();
    for (std::size_t k = 0; k < a.size(); ++k)
      CHECK(*a[k] == *b[k]);
  }

  SUBCASE("identical views give unit positive cosine") {
    EncoderParams p = EncoderParams::init(ec, 1);
    AugmentationSpec base;
    const auto same = make_pair_batch(synth_polymers(6, 2), base, 4);
    std::vector<std::span<const int>> rows;
    std::vector<TokenSequence> views;
    for (const auto &q: same)
      views.push_back(q.view_i);
    for (const auto &q: same)
      views.push_back(q.view_j);
    const auto padded = make_batch(views, vocab, ec.max_len);
    for (int b = 0; b < padded.size(); ++b)
      rows.push_back(padded.row(b));
    const auto tape = forward_batch(p, rows, std::vector<std::optional<std::uint64_t>>(rows.size()));
    for (double c: positive_cosines(tape.z()))
      CHECK(std::abs(c - 1.0) <= 1e-15);
  }

  SUBCASE("config validation") {
    ContrastiveConfig cfg;
    cfg.temperature = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_grad_norm = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(ContrastiveConfig::large().learning_rate == 1e-5);
    CHECK(ContrastiveConfig {}.temperature == 0.05);
    CHECK(ContrastiveConfig {}.epochs == 10);
  }
}
