//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_OPTIM_HPP_
#define POLYCL_OPTIM_HPP_

#include <vector>

#include <Eigen/Dense>

namespace polycl {

struct AdamWOptions {
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with decoupled weight decay:
//   p <- p - lr * wd * p
//   p <- p - lr * mhat / (sqrt(vhat) + eps)
class AdamW {
public:
  AdamW(const std::vector<const Eigen::MatrixXd *> &shapes,
        AdamWOptions options);

  void step(const std::vector<Eigen::MatrixXd *> &params,
            const std::vector<const Eigen::MatrixXd *> &grads);

  long steps() const noexcept { return t_; }
  const AdamWOptions &options() const noexcept { return options_; }

private:
  AdamWOptions options_;
  std::vector<Eigen::MatrixXd> m_, v_;
  long t_ = 0;
};

double global_norm(const std::vector<const Eigen::MatrixXd *> &grads);

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(const std::vector<Eigen::MatrixXd *> &grads,
                      double max_norm);

}  // namespace polycl

#endif  // POLYCL_OPTIM_HPP_
