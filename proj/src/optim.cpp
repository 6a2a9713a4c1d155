//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/optim.hpp"

#include <cmath>

#include "polycl/errors.hpp"

namespace polycl {

AdamW::AdamW(const std::vector<const Eigen::MatrixXd *> &shapes,
             AdamWOptions options)
    : options_(options) {
  for (const auto *s: shapes) {
    m_.push_back(Eigen::MatrixXd::Zero(s->rows(), s->cols()));
    v_.push_back(Eigen::MatrixXd::Zero(s->rows(), s->cols()));
  }
}

void AdamW::step(const std::vector<Eigen::MatrixXd *> &params,
                 const std::vector<const Eigen::MatrixXd *> &grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw Error("optimizer tensor count mismatch");
  ++t_;
  const auto &o = options_;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd &p = *params[i];
    const Eigen::MatrixXd &g = *grads[i];
    m_[i] = o.beta1 * m_[i] + (1.0 - o.beta1) * g;
    v_[i] = o.beta2 * v_[i] + (1.0 - o.beta2) * g.cwiseProduct(g);
    if (o.weight_decay != 0.0)
      p *= 1.0 - o.learning_rate * o.weight_decay;
    p.array() -= o.learning_rate * (m_[i].array() / bc1)
                 / ((v_[i].array() / bc2).sqrt() + o.eps);
  }
}

double global_norm(const std::vector<const Eigen::MatrixXd *> &grads) {
  double s = 0.0;
  for (const auto *g: grads)
    s += g->squaredNorm();
  return std::sqrt(s);
}

double clip_grad_norm(const std::vector<Eigen::MatrixXd *> &grads,
                      double max_norm) {
  if (!(max_norm > 0.0))
    throw ConfigError("max_grad_norm must be positive");
  const double norm =
      global_norm(std::vector<const Eigen::MatrixXd *>(grads.begin(),
                                                       grads.end()));
  if (norm > max_norm) {
    const double coef = max_norm / norm;
    for (auto *g: grads)
      *g *= coef;
  }
  return norm;
}

}  // namespace polycl
