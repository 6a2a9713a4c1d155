//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

// Central finite-difference check of the full contrastive pipeline
// (embeddings -> blocks -> [CLS] -> projector -> loss), shared by the unit
// tests and the acceptance binary.

#ifndef POLYCL_TESTS_GRADCHECK_HPP_
#define POLYCL_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "polycl/contrastive.hpp"
#include "polycl/rng.hpp"

namespace polycl::gradcheck {

struct GroupResult {
  std::string name;
  double rel_error;
  double analytic_norm;
};

// For every tensor, compares analytic and central-difference derivatives on
// `per_tensor` sampled entries and reports ||a - fd|| / max(||a||, ||fd||)
// over the sample. Embedding rows are sampled among the rows the batch
// actually touches.
inline std::vector<GroupResult>
check_pipeline(EncoderParams params, const std::vector<PositivePair> &batch,
               const AugmentationSpec &spec, const Vocabulary &vocab,
               double temperature, int per_tensor, double step,
               std::uint64_t seed) {
  EncoderParams grads = EncoderParams::zeros_like(params);
  contrastive_loss_and_grad(batch, params, spec, vocab, temperature, &grads);

  std::set<int> used_ids;
  int max_len = 0;
  for (const auto &p: batch) {
    for (const auto *v: { &p.view_i, &p.view_j }) {
      for (int id: vocab.encode(*v))
        used_ids.insert(id);
      max_len = std::max(max_len, static_cast<int>(v->size()) + 2);
    }
  }
  used_ids.insert(static_cast<int>(Special::kCls));
  used_ids.insert(static_cast<int>(Special::kSep));
  const std::vector<int> id_rows(used_ids.begin(), used_ids.end());

  const auto names = params.tensor_names();
  auto tensors = params.tensors();
  const auto gts = static_cast<const EncoderParams &>(grads).tensors();
  Rng rng(seed);
  std::vector<GroupResult> out;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    Matrix &w = *tensors[t];
    double diff2 = 0, a2 = 0, f2 = 0;
    for (int s = 0; s < per_tensor; ++s) {
      Eigen::Index r;
      if (t == 0)
        r = id_rows[uniform_index(rng, id_rows.size())];
      else if (t == 1)
        r = static_cast<Eigen::Index>(uniform_index(rng, max_len));
      else
        r = static_cast<Eigen::Index>(uniform_index(rng, w.rows()));
      const auto c = static_cast<Eigen::Index>(uniform_index(rng, w.cols()));
      const double keep = w(r, c);
      w(r, c) = keep + step;
      const double up =
          contrastive_loss_and_grad(batch, params, spec, vocab, temperature, nullptr);
      w(r, c) = keep - step;
      const double down =
          contrastive_loss_and_grad(batch, params, spec, vocab, temperature, nullptr);
      w(r, c) = keep;
      const double fd = (up - down) / (2 * step);
      const double an = (*gts[t])(r, c);
      diff2 += (an - fd) * (an - fd);
      a2 += an * an;
      f2 += fd * fd;
    }
    const double denom = std::max({ std::sqrt(a2), std::sqrt(f2), 1e-10 });
    out.push_back({ names[t], std::sqrt(diff2) / denom, std::sqrt(a2) });
  }
  return out;
}

}  // namespace polycl::gradcheck

#endif  // POLYCL_TESTS_GRADCHECK_HPP_
