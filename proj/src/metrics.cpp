//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polycl/errors.hpp"
#include "polycl/rng.hpp"
#include "polycl/smiles.hpp"

namespace polycl {

namespace {
constexpr double kMinNorm = 1e-12;
}

double cosine_similarity(const RowVector &u, const RowVector &v) {
  if (u.size() != v.size())
    throw DataError("cosine_similarity: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu >= kMinNorm) || !(nv >= kMinNorm))
    throw ZeroVector("cosine_similarity: zero-norm vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

Matrix normalize_rows(const Matrix &x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double n = x.row(r).norm();
    if (!(n >= kMinNorm))
      throw ZeroVector("embedding row " + std::to_string(r) + " has zero norm");
    out.row(r) = x.row(r) / n;
  }
  return out;
}

double alignment_loss(const Matrix &first, const Matrix &second) {
  if (first.rows() == 0)
    throw EmptySet("alignment needs at least one pair");
  if (first.rows() != second.rows() || first.cols() != second.cols())
    throw DataError("alignment: pair matrices differ in shape");
  const Matrix a = normalize_rows(first);
  const Matrix b = normalize_rows(second);
  double sum = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    sum += (a.row(r) - b.row(r)).squaredNorm();
  return sum / static_cast<double>(a.rows());
}

double uniformity_loss(const Matrix &embeddings) {
  const Eigen::Index n = embeddings.rows();
  if (n < 2)
    throw TooFewPoints("uniformity needs at least two embeddings");
  const Matrix u = normalize_rows(embeddings);

  // log-mean-exp in fixed index order.
  std::vector<double> e;
  e.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = -2.0 * (u.row(i) - u.row(j)).squaredNorm();
      e.push_back(v);
      mx = std::max(mx, v);
    }
  double sum = 0.0;
  for (double v: e)
    sum += std::exp(v - mx);
  return mx + std::log(sum / static_cast<double>(e.size()));
}

EvalPairSet build_eval_pairs(const std::vector<std::string> &corpus,
                             const EncoderParams &params,
                             const Vocabulary &vocab, std::uint64_t seed) {
  if (corpus.empty())
    throw EmptySet("evaluation corpus is empty");
  std::vector<TokenSequence> originals, variants;
  originals.reserve(corpus.size());
  variants.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    originals.push_back(tokenize(corpus[i]));
    variants.push_back(tokenize(enumerate_random(
        parse(corpus[i]), mix64(seed, i, SeedTag::kEvalPairs))));
  }
  EvalPairSet out;
  out.first = embed(originals, params, vocab);
  out.second = embed(variants, params, vocab);
  out.all_embeddings = out.first;
  return out;
}

ReprMetrics evaluate_representation(const std::vector<std::string> &corpus,
                                    const EncoderParams &params,
                                    const Vocabulary &vocab,
                                    std::uint64_t seed) {
  const EvalPairSet pairs = build_eval_pairs(corpus, params, vocab, seed);
  return { alignment_loss(pairs), uniformity_loss(pairs.all_embeddings) };
}

}  // namespace polycl
