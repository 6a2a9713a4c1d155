//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_TRANSFER_HPP_
#define POLYCL_TRANSFER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polycl/encoder.hpp"

namespace polycl {

struct PropertyRecord {
  std::string smiles;
  double value;
};

struct PropertyDataset {
  std::string name;
  std::vector<PropertyRecord> records;

  // Every SMILES parses and every value is finite; errors name the row.
  void validate() const;
  std::vector<std::string> smiles() const;
  Eigen::VectorXd values() const;
};

struct HeadConfig {
  int max_epochs = 500;
  // The early-stopping monitor only looks at epochs >= start_epoch.
  int early_stop_start = 50;
  int patience = 50;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double dropout = 0.1;
  // Full-batch updates up to this many rows, mini-batches above it.
  int full_batch_limit = 4096;
  int minibatch_size = 256;
  int folds = 5;
  // Subtract the training-fold feature mean before the head.
  bool center_features = true;

  void validate() const;
};

// y = relu(x W1 + b1) W2 + b2 on standardized targets; hidden width equals
// the input width.
struct HeadParams {
  Matrix w1, b1, w2, b2;
  // Training-fold statistics: features are centered on the way in,
  // predictions un-standardized on the way out. An empty feature mean means
  // no centering.
  RowVector feature_mean;
  double target_mean = 0.0;
  double target_scale = 1.0;

  Matrix standardize(const Matrix &x) const;

  static HeadParams init(int input_dim, std::uint64_t seed);
  std::vector<Matrix *> tensors();
  std::vector<const Matrix *> tensors() const;
};

struct FoldReport {
  int fold_index = 0;
  double rmse = 0.0;
  double r2 = 0.0;
  int best_epoch = 0;  // 1-based epoch whose parameters were kept
  int epochs_run = 0;
};

struct CrossValidationReport {
  std::string dataset;
  std::vector<FoldReport> folds;
  double mean_rmse = 0.0;
  double mean_r2 = 0.0;
};

// Patience counter that starts watching at start_epoch. Epochs are 1-based.
class EarlyStopping {
public:
  EarlyStopping(int start_epoch, int patience)
      : start_(start_epoch), patience_(patience) {}

  // Records the validation score for `epoch`; returns true when training
  // should stop after this epoch.
  bool update(int epoch, double val_score);

  int monitored_best_epoch() const noexcept { return best_epoch_; }

private:
  int start_;
  int patience_;
  int best_epoch_ = 0;
  double best_ = 0.0;
};

// [CLS]-pooled h per SMILES with dropout off. Parse errors name the row.
Matrix extract_features(const std::vector<std::string> &smiles,
                        const EncoderParams &params, const Vocabulary &vocab);

// Throws ConstantTarget when y has zero variance.
double r_squared(const Eigen::VectorXd &y, const Eigen::VectorXd &yhat);
double rmse(const Eigen::VectorXd &y, const Eigen::VectorXd &yhat);

// Predictions in the original target units (dropout off).
Eigen::VectorXd predict(const HeadParams &head, const Matrix &x);

// Mean squared error on standardized targets (x already standardized) and
// its gradient. dropout_seed
// enables inverted dropout on the hidden layer when set.
double head_loss_and_grad(const HeadParams &head, const Matrix &x,
                          const Eigen::VectorXd &y_standardized,
                          double dropout, std::optional<std::uint64_t>
                              dropout_seed,
                          HeadParams *grads);

struct HeadFit {
  HeadParams params;
  FoldReport report;
  std::vector<double> val_rmse;  // per epoch
};

// Trains on (x_train, y_train) and keeps the parameters of the epoch with
// the lowest validation RMSE. Throws NonFiniteLoss.
HeadFit train_head(const Matrix &x_train, const Eigen::VectorXd &y_train,
                   const Matrix &x_val, const Eigen::VectorXd &y_val,
                   const HeadConfig &cfg, std::uint64_t seed);

// Seed-shuffled split of 0..n-1 into k near-equal folds.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int k,
                                                      std::uint64_t seed);

CrossValidationReport cross_validate_features(const std::string &name,
                                              const Matrix &features,
                                              const Eigen::VectorXd &targets,
                                              const HeadConfig &cfg,
                                              std::uint64_t seed);

// Frozen-encoder transfer: features once, then k-fold head training.
// Throws DatasetTooSmall below 2k records.
CrossValidationReport cross_validate(const PropertyDataset &ds,
                                     const EncoderParams &params,
                                     const Vocabulary &vocab,
                                     const HeadConfig &cfg, std::uint64_t seed);

}  // namespace polycl

#endif  // POLYCL_TRANSFER_HPP_
