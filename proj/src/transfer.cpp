//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/transfer.hpp"

#include <cmath>
#include <numeric>

#include "polycl/errors.hpp"
#include "polycl/optim.hpp"
#include "polycl/rng.hpp"
#include "polycl/smiles.hpp"

namespace polycl {

// ---- dataset ---------------------------------------------------------------

void PropertyDataset::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      parse(records[i].smiles);
    } catch (const DataError &e) {
      throw DataError("dataset " + name + " row " + std::to_string(i + 1)
                      + ": " + e.what());
    }
    if (!std::isfinite(records[i].value))
      throw DataError("dataset " + name + " row " + std::to_string(i + 1)
                      + ": value is not finite");
  }
}

std::vector<std::string> PropertyDataset::smiles() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto &r: records)
    out.push_back(r.smiles);
  return out;
}

Eigen::VectorXd PropertyDataset::values() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = records[i].value;
  return out;
}

void HeadConfig::validate() const {
  auto fail = [](const std::string &msg) {
    throw ConfigError("transfer config: " + msg);
  };
  if (max_epochs < 1)
    fail("max_epochs must be at least 1");
  if (early_stop_start < 1 || patience < 1)
    fail("early stopping start and patience must be at least 1");
  if (!(learning_rate >= 0.0) || !(weight_decay >= 0.0))
    fail("learning_rate and weight_decay must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0))
    fail("dropout must lie in [0, 1)");
  if (full_batch_limit < 1 || minibatch_size < 1)
    fail("batch sizes must be at least 1");
  if (folds < 2)
    fail("folds must be at least 2");
}

// ---- head ------------------------------------------------------------------

HeadParams HeadParams::init(int input_dim, std::uint64_t seed) {
  HeadParams h;
  h.w1.resize(input_dim, input_dim);
  h.b1.resize(1, input_dim);
  h.w2.resize(input_dim, 1);
  h.b2.resize(1, 1);
  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), the usual
  // default for dense layers; noticeably faster to fit than Glorot here.
  Matrix *tensors[] = { &h.w1, &h.b1, &h.w2, &h.b2 };
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (std::uint64_t i = 0; i < 4; ++i) {
    Rng rng(mix64(seed, i, SeedTag::kHead));
    Matrix &w = *tensors[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = (2.0 * uniform_unit(rng) - 1.0) * bound;
  }
  return h;
}

Matrix HeadParams::standardize(const Matrix &x) const {
  if (feature_mean.size() == 0)
    return x;
  return x.rowwise() - feature_mean;
}

std::vector<Matrix *> HeadParams::tensors() { return { &w1, &b1, &w2, &b2 }; }
std::vector<const Matrix *> HeadParams::tensors() const {
  return { &w1, &b1, &w2, &b2 };
}

namespace {

Eigen::VectorXd predict_standardized(const HeadParams &head, const Matrix &x) {
  Matrix a = x * head.w1;
  a.rowwise() += head.b1.row(0);
  return (a.cwiseMax(0.0) * head.w2).col(0).array() + head.b2(0, 0);
}

Matrix rows_of(const Matrix &x, const std::vector<std::size_t> &idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::VectorXd entries_of(const Eigen::VectorXd &y,
                           const std::vector<std::size_t> &idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

Eigen::VectorXd predict(const HeadParams &head, const Matrix &x) {
  return (predict_standardized(head, head.standardize(x)).array()
              * head.target_scale
          + head.target_mean)
      .matrix();
}

double head_loss_and_grad(const HeadParams &head, const Matrix &x,
                          const Eigen::VectorXd &y, double dropout,
                          std::optional<std::uint64_t> dropout_seed,
                          HeadParams *grads) {
  const Eigen::Index n = x.rows();
  if (n == 0 || y.size() != n)
    throw DataError("head: features and targets differ in length");
  Matrix a = x * head.w1;
  a.rowwise() += head.b1.row(0);
  Matrix h = a.cwiseMax(0.0);
  Matrix mask;
  if (dropout_seed && dropout > 0.0) {
    Rng rng(*dropout_seed);
    const double keep = 1.0 / (1.0 - dropout);
    mask.resize(h.rows(), h.cols());
    for (Eigen::Index r = 0; r < mask.rows(); ++r)
      for (Eigen::Index c = 0; c < mask.cols(); ++c)
        mask(r, c) = uniform_unit(rng) < dropout ? 0.0 : keep;
    h.array() *= mask.array();
  }
  const Eigen::VectorXd yhat = (h * head.w2).col(0).array() + head.b2(0, 0);
  const Eigen::VectorXd err = yhat - y;
  const double loss = err.squaredNorm() / static_cast<double>(n);
  if (!grads)
    return loss;

  const Eigen::VectorXd g = err * (2.0 / static_cast<double>(n));
  grads->w2 += h.transpose() * g;
  grads->b2(0, 0) += g.sum();
  Matrix gh = g * head.w2.transpose();
  if (mask.size() > 0)
    gh.array() *= mask.array();
  gh.array() *= (a.array() > 0.0).cast<double>();
  grads->w1 += x.transpose() * gh;
  grads->b1 += gh.colwise().sum();
  return loss;
}

bool EarlyStopping::update(int epoch, double val_score) {
  if (epoch < start_)
    return false;
  if (best_epoch_ == 0 || val_score < best_) {
    best_ = val_score;
    best_epoch_ = epoch;
  }
  return epoch - best_epoch_ >= patience_;
}

HeadFit train_head(const Matrix &x_train, const Eigen::VectorXd &y_train,
                   const Matrix &x_val, const Eigen::VectorXd &y_val,
                   const HeadConfig &cfg, std::uint64_t seed) {
  cfg.validate();
  if (x_train.rows() < 2 || x_val.rows() < 1)
    throw DatasetTooSmall("head training needs at least 2 training rows and 1 "
                          "validation row");
  if (x_train.cols() != x_val.cols())
    throw DataError("head: train and validation feature widths differ");

  HeadParams head = HeadParams::init(static_cast<int>(x_train.cols()), seed);
  head.target_mean = y_train.mean();
  const double sd = std::sqrt(
      (y_train.array() - head.target_mean).square().mean());
  head.target_scale = sd > 1e-12 ? sd : 1.0;
  const Eigen::VectorXd y_std =
      (y_train.array() - head.target_mean) / head.target_scale;
  if (cfg.center_features)
    head.feature_mean = x_train.colwise().mean();
  const Matrix x_std = head.standardize(x_train);

  AdamW opt(static_cast<const HeadParams &>(head).tensors(),
            AdamWOptions { cfg.learning_rate, cfg.weight_decay });
  EarlyStopping stopper(cfg.early_stop_start, cfg.patience);

  const auto n = static_cast<std::size_t>(x_train.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const bool full_batch = n <= static_cast<std::size_t>(cfg.full_batch_limit);

  HeadFit fit;
  fit.params = head;
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const std::uint64_t epoch_seed =
        mix64(seed, static_cast<std::uint64_t>(epoch), SeedTag::kDropout);
    auto run_batch = [&](const Matrix &xb, const Eigen::VectorXd &yb,
                         std::uint64_t batch_seed) {
      HeadParams grads = head;
      for (Matrix *t: grads.tensors())
        t->setZero();
      const double loss = head_loss_and_grad(head, xb, yb, cfg.dropout,
                                             batch_seed, &grads);
      if (!std::isfinite(loss))
        throw NonFiniteLoss("head loss is not finite at epoch "
                            + std::to_string(epoch));
      const auto &cg = grads;
      opt.step(head.tensors(), cg.tensors());
    };

    if (full_batch) {
      run_batch(x_std, y_std, epoch_seed);
    } else {
      Rng rng(mix64(seed, static_cast<std::uint64_t>(epoch),
                    SeedTag::kShuffle));
      shuffle(order, rng);
      const auto bs = static_cast<std::size_t>(cfg.minibatch_size);
      for (std::size_t start = 0, b = 0; start < n; start += bs, ++b) {
        const std::vector<std::size_t> idx(
            order.begin() + static_cast<std::ptrdiff_t>(start),
            order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + bs)));
        run_batch(rows_of(x_std, idx), entries_of(y_std, idx),
                  mix64(epoch_seed, b, SeedTag::kDropout));
      }
    }

    const double val = rmse(y_val, predict(head, x_val));
    if (!std::isfinite(val))
      throw NonFiniteLoss("validation RMSE is not finite at epoch "
                          + std::to_string(epoch));
    fit.val_rmse.push_back(val);
    fit.report.epochs_run = epoch;
    if (val < best) {
      best = val;
      fit.params = head;
      fit.report.best_epoch = epoch;
    }
    if (stopper.update(epoch, val))
      break;
  }

  const Eigen::VectorXd yhat = predict(fit.params, x_val);
  fit.report.rmse = rmse(y_val, yhat);
  fit.report.r2 = r_squared(y_val, yhat);
  return fit;
}

// ---- metrics ---------------------------------------------------------------

double rmse(const Eigen::VectorXd &y, const Eigen::VectorXd &yhat) {
  if (y.size() != yhat.size() || y.size() == 0)
    throw DataError("rmse: lengths differ or are empty");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

double r_squared(const Eigen::VectorXd &y, const Eigen::VectorXd &yhat) {
  if (y.size() != yhat.size() || y.size() < 2)
    throw DataError("r_squared: needs two or more paired values");
  const double ss_tot = (y.array() - y.mean()).square().sum();
  if (!(ss_tot > 0.0))
    throw ConstantTarget("r_squared: target is constant");
  return 1.0 - (y - yhat).squaredNorm() / ss_tot;
}

// ---- cross-validation ------------------------------------------------------

Matrix extract_features(const std::vector<std::string> &smiles,
                        const EncoderParams &params, const Vocabulary &vocab) {
  std::vector<TokenSequence> seqs;
  seqs.reserve(smiles.size());
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    try {
      parse(smiles[i]);
      seqs.push_back(tokenize(smiles[i]));
    } catch (const DataError &e) {
      throw DataError("row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return embed(seqs, params, vocab);
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int k,
                                                      std::uint64_t seed) {
  if (k < 2 || n < static_cast<std::size_t>(k))
    throw DatasetTooSmall("cannot split " + std::to_string(n) + " rows into "
                          + std::to_string(k) + " folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix64(seed, 0, SeedTag::kFolds));
  shuffle(perm, rng);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  const auto kk = static_cast<std::size_t>(k);
  for (std::size_t f = 0; f < kk; ++f)
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(f * n / kk),
                    perm.begin() + static_cast<std::ptrdiff_t>((f + 1) * n / kk));
  return folds;
}

CrossValidationReport cross_validate_features(const std::string &name,
                                              const Matrix &features,
                                              const Eigen::VectorXd &targets,
                                              const HeadConfig &cfg,
                                              std::uint64_t seed) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n < 2 * static_cast<std::size_t>(cfg.folds))
    throw DatasetTooSmall("dataset " + name + " has " + std::to_string(n)
                          + " records; need at least "
                          + std::to_string(2 * cfg.folds));
  const auto folds = kfold_partition(n, cfg.folds, seed);

  CrossValidationReport rep;
  rep.dataset = name;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f)
        train.insert(train.end(), folds[g].begin(), folds[g].end());
    HeadFit fit = train_head(rows_of(features, train), entries_of(targets, train),
                             rows_of(features, folds[f]),
                             entries_of(targets, folds[f]), cfg,
                             mix64(seed, f, SeedTag::kHead));
    fit.report.fold_index = static_cast<int>(f);
    rep.folds.push_back(fit.report);
    rep.mean_rmse += fit.report.rmse;
    rep.mean_r2 += fit.report.r2;
  }
  rep.mean_rmse /= static_cast<double>(folds.size());
  rep.mean_r2 /= static_cast<double>(folds.size());
  return rep;
}

CrossValidationReport cross_validate(const PropertyDataset &ds,
                                     const EncoderParams &params,
                                     const Vocabulary &vocab,
                                     const HeadConfig &cfg,
                                     std::uint64_t seed) {
  const Matrix x = extract_features(ds.smiles(), params, vocab);
  return cross_validate_features(ds.name, x, ds.values(), cfg, seed);
}

}  // namespace polycl
