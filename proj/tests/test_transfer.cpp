//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "polycl/checkpoint.hpp"
#include "polycl/errors.hpp"
#include "polycl/rng.hpp"
#include "polycl/synth.hpp"
#include "polycl/transfer.hpp"

using namespace polycl;

namespace {

const Vocabulary &vocab() { return Vocabulary::builtin(); }

EncoderParams encoder(std::uint64_t seed = 1) {
  return EncoderParams::init(EncoderConfig::desk(vocab().size()), seed);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x: v)
    out(k++) = x;
  return out;
}

}  // namespace

TEST_CASE("regression metrics") {
  const auto y = vec({ 0, 1, 2 });
  CHECK(r_squared(y, y) == 1.0);
  CHECK(rmse(y, y) == 0.0);
  CHECK(r_squared(y, vec({ 1, 1, 1 })) == 0.0);
  CHECK(std::abs(rmse(y, vec({ 0, 1, 1 })) - std::sqrt(1.0 / 3.0)) <= 1e-15);
  CHECK(std::abs(rmse(y, vec({ 0, 1, 1 })) - 0.5774) <= 1e-4);
  CHECK(r_squared(y, vec({ 0, 1, 1 })) == 0.5);
  CHECK_THROWS_AS(r_squared(vec({ 2, 2, 2 }), vec({ 1, 2, 3 })), ConstantTarget);
  CHECK(r_squared(y, vec({ 5, -3, 9 })) <= 1.0);
}

TEST_CASE("fold partition") {
  const auto folds = kfold_partition(100, 5, 3);
  std::set<std::size_t> seen;
  for (const auto &f: folds) {
    CHECK(f.size() == 20);
    for (auto i: f)
      CHECK(seen.insert(i).second);
  }
  CHECK(seen.size() == 100);
  CHECK(kfold_partition(100, 5, 3) == folds);
  CHECK(kfold_partition(100, 5, 4) != folds);

  for (std::size_t n = 10; n < 60; ++n) {
    const auto p = kfold_partition(n, 5, n);
    std::size_t lo = n, hi = 0, total = 0;
    std::set<std::size_t> all;
    for (const auto &f: p) {
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      total += f.size();
      all.insert(f.begin(), f.end());
    }
    CHECK(hi - lo <= 1);
    CHECK(total == n);
    CHECK(all.size() == n);
  }
}

TEST_CASE("early stopping") {
  SUBCASE("worsening from the activation epoch") {
    EarlyStopping es(50, 50);
    int stopped = 0;
    for (int e = 1; e <= 500 && !stopped; ++e) {
      const double score = e < 50 ? 10.0 - 0.1 * e : 1.0 + 0.01 * e;
      if (es.update(e, score))
        stopped = e;
    }
    CHECK(stopped == 100);
    CHECK(es.monitored_best_epoch() == 50);
  }
  SUBCASE("improvement resets patience") {
    EarlyStopping es(50, 50);
    int stopped = 0;
    for (int e = 1; e <= 500 && !stopped; ++e)
      if (es.update(e, e <= 120 ? 1000.0 - e : 2000.0 + e))
        stopped = e;
    CHECK(stopped == 170);
  }
  SUBCASE("never stops while improving") {
    EarlyStopping es(50, 50);
    for (int e = 1; e <= 500; ++e)
      CHECK_FALSE(es.update(e, 1.0 / e));
  }
}

TEST_CASE("head gradient matches finite differences") {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const int n = 3 + static_cast<int>(uniform_index(rng, 6));
    const int d = 2 + static_cast<int>(uniform_index(rng, 5));
    Matrix x = Matrix::Random(n, d);
    Eigen::VectorXd y = Eigen::VectorXd::Random(n);
    HeadParams h = HeadParams::init(d, rng());
    h.b1 = Matrix::Random(1, d) * 0.1;
    HeadParams g = h;
    for (Matrix *m: g.tensors())
      m->setZero();
    const std::uint64_t seed = rng();
    head_loss_and_grad(h, x, y, 0.1, seed, &g);
    double diff2 = 0, norm2 = 0;
    auto ht = h.tensors();
    auto gt = g.tensors();
    for (std::size_t k = 0; k < ht.size(); ++k)
      for (Eigen::Index i = 0; i < ht[k]->size(); ++i) {
        double &w = ht[k]->data()[i];
        const double keep = w;
        w = keep + 1e-6;
        const double up = head_loss_and_grad(h, x, y, 0.1, seed, nullptr);
        w = keep - 1e-6;
        const double down = head_loss_and_grad(h, x, y, 0.1, seed, nullptr);
        w = keep;
        const double fd = (up - down) / 2e-6;
        diff2 += std::pow(fd - gt[k]->data()[i], 2);
        norm2 += fd * fd;
      }
    CHECK(std::sqrt(diff2 / std::max(norm2, 1e-24)) <= 1e-4);
  }
}

TEST_CASE("zero learning rate keeps the first epoch") {
  Rng rng(2);
  Matrix x = Matrix::Random(40, 6);
  Eigen::VectorXd y = x.col(0) * 2 + x.col(3);
  HeadConfig cfg;
  cfg.learning_rate = 0.0;
  const auto fit = train_head(x.topRows(30), y.head(30), x.bottomRows(10), y.tail(10), cfg, 4);
  CHECK(fit.report.best_epoch == 1);
  CHECK(fit.report.epochs_run == 100);
}

TEST_CASE("noiseless linear targets on frozen features") {
  const auto p = encoder(3);
  const auto corpus = synth_polymers(1000, 31);
  const Matrix x = extract_features(corpus, p, vocab());
  Rng rng(5);
  Eigen::VectorXd w(x.cols());
  for (Eigen::Index k = 0; k < w.size(); ++k)
    w(k) = 2 * uniform_unit(rng) - 1;
  const Eigen::VectorXd y = x * w;

  const Matrix xt = x.topRows(800), xv = x.bottomRows(200);
  const Eigen::VectorXd yt = y.head(800), yv = y.tail(200);

  // Least squares with an intercept proves the target is attainable.
  Matrix a(800, x.cols() + 1);
  a << xt, Eigen::VectorXd::Ones(800);
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(yt);
  Matrix av(200, x.cols() + 1);
  av << xv, Eigen::VectorXd::Ones(200);
  CHECK(r_squared(yv, av * coef) >= 0.999);

  const auto fit = train_head(xt, yt, xv, yv, HeadConfig {}, 9);
  MESSAGE("head validation R2 = " << fit.report.r2 << " at epoch " << fit.report.best_epoch);
  CHECK(fit.report.r2 >= 0.99);
}

TEST_CASE("features are frozen and batch-independent") {
  const auto p = encoder(4);
  const auto before = parameter_checksum(p);
  auto corpus = synth_polymers(30, 8);
  corpus.push_back(corpus[3]);
  const Matrix x = extract_features(corpus, p, vocab());
  CHECK(x.row(3) == x.row(30));
  const std::vector<std::string> first(corpus.begin(), corpus.begin() + 11);
  CHECK(extract_features(first, p, vocab()) == x.topRows(11));

  PropertyDataset ds = synth_property_dataset("toy_gap", corpus, 2);
  HeadConfig cfg;
  cfg.max_epochs = 20;
  const auto rep = cross_validate(ds, p, vocab(), cfg, 1);
  CHECK(rep.folds.size() == 5);
  CHECK(parameter_checksum(p) == before);
  CHECK(extract_features(corpus, p, vocab()) == x);
  for (const auto &f: rep.folds) {
    CHECK(f.r2 <= 1.0);
    CHECK(f.rmse >= 0.0);
  }
  const auto again = cross_validate(ds, p, vocab(), cfg, 1);
  CHECK(again.mean_r2 == rep.mean_r2);
}

TEST_CASE("dataset checks") {
  const auto p = encoder(4);
  PropertyDataset small;
  small.name = "tiny";
  for (int i = 0; i < 9; ++i)
    small.records.push_back({ "C" + std::string(i + 1, 'C'), 1.0 * i });
  CHECK_THROWS_AS(cross_validate(small, p, vocab(), HeadConfig {}, 0), DatasetTooSmall);

  PropertyDataset bad = small;
  bad.records[4].smiles = "C(";
  CHECK_THROWS_AS(bad.validate(), DataError);
  try {
    extract_features(bad.smiles(), p, vocab());
    FAIL("expected an error");
  } catch (const DataError &e) {
    CHECK(std::string(e.what()).find("row 5") != std::string::npos);
  }
  HeadConfig cfg;
  cfg.folds = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
