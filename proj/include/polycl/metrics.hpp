//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_METRICS_HPP_
#define POLYCL_METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "polycl/encoder.hpp"

namespace polycl {

// Throws ZeroVector when either norm is below 1e-12.
double cosine_similarity(const RowVector &u, const RowVector &v);

// Rows scaled to unit L2 norm. Throws ZeroVector.
Matrix normalize_rows(const Matrix &x);

// Positive pairs as two row-aligned matrices plus the sample used for
// uniformity.
struct EvalPairSet {
  Matrix first;   // f(x), one row per pair
  Matrix second;  // f(x+)
  Matrix all_embeddings;
};

// Mean squared Euclidean distance between unit-normalized pair members.
// Throws EmptySet.
double alignment_loss(const Matrix &first, const Matrix &second);
inline double alignment_loss(const EvalPairSet &pairs) {
  return alignment_loss(pairs.first, pairs.second);
}

// log of the mean of exp(-2 |x - y|^2) over unordered distinct row pairs,
// rows unit-normalized first. Throws TooFewPoints.
double uniformity_loss(const Matrix &embeddings);

struct ReprMetrics {
  double alignment;
  double uniformity;
};

// Each polymer is paired with one enumerated variant (seed mix64(seed, i,
// kEvalPairs)); both are embedded with dropout off and pooled at [CLS],
// without the projector. Uniformity runs over the original embeddings.
EvalPairSet build_eval_pairs(const std::vector<std::string> &corpus,
                             const EncoderParams &params,
                             const Vocabulary &vocab, std::uint64_t seed);

ReprMetrics evaluate_representation(const std::vector<std::string> &corpus,
                                    const EncoderParams &params,
                                    const Vocabulary &vocab,
                                    std::uint64_t seed);

}  // namespace polycl

#endif  // POLYCL_METRICS_HPP_
