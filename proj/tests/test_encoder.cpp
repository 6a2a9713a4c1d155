//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <filesystem>

#include "gradcheck.hpp"
#include "polycl/checkpoint.hpp"
#include "polycl/encoder.hpp"
#include "polycl/errors.hpp"
#include "polycl/io.hpp"
#include "polycl/synth.hpp"

using namespace polycl;

namespace {

const Vocabulary &vocab() { return Vocabulary::builtin(); }

EncoderParams small_params(std::uint64_t seed = 1) {
  EncoderConfig cfg = EncoderConfig::desk(vocab().size());
  cfg.d_model = 16;
  cfg.n_heads = 2;
  cfg.d_feedforward = 24;
  cfg.projector_out = 8;
  cfg.max_len = 40;
  return EncoderParams::init(cfg, seed);
}

std::vector<TokenSequence> seqs_of(const std::vector<std::string> &smiles) {
  std::vector<TokenSequence> out;
  for (const auto &s: smiles)
    out.push_back(tokenize(s));
  return out;
}

}  // namespace

TEST_CASE("configs") {
  const auto desk = EncoderConfig::desk(vocab().size());
  CHECK(desk.d_model == 64);
  CHECK(desk.n_layers == 2);
  CHECK(desk.n_heads == 4);
  CHECK(desk.d_feedforward == 128);
  CHECK(desk.projector_out == 32);
  CHECK(desk.max_len == 128);
  CHECK(desk.dropout_ratio == 0.1);
  EncoderConfig bad = desk;
  bad.n_heads = 5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const auto large = EncoderParams::init(EncoderConfig::large(vocab().size()), 0);
  CHECK(large.projector.w1.rows() == 600);
  CHECK(large.projector.w2.cols() == 128);
  const Matrix h = embed(seqs_of({ "[*]CC([*])Cl" }), large, vocab());
  CHECK(h.cols() == 600);
}

TEST_CASE("encode: shapes and determinism") {
  const auto p = small_params();
  const auto batch = make_batch(seqs_of({ "C", "[*]CC([*])Cl" }), vocab(),
                                p.config.max_len);
  CHECK(batch.lengths == std::vector<int> { 3, 9 });
  const auto out = encode(batch, p, false, 0);
  REQUIRE(out.size() == 2);
  CHECK(out[0].rows() == 9);
  CHECK(out[0].cols() == 16);
  CHECK(out[0].bottomRows(6).isZero(0.0));
  const auto single = encode(make_batch(seqs_of({ "C" }), vocab(), 40), p, false, 0);
  CHECK(single[0].rows() == 3);
  CHECK(single[0] == out[0].topRows(3));
  CHECK(encode(batch, p, false, 5)[1] == out[1]);

  const auto d1 = encode(batch, p, true, 1);
  const auto d2 = encode(batch, p, true, 2);
  CHECK(d1[1] == encode(batch, p, true, 1)[1]);
  CHECK(d1[1] != d2[1]);
  CHECK(pool_cls(out[1]) == out[1].row(0));
}

TEST_CASE("encode: input errors") {
  const auto p = small_params();
  std::string long_chain(60, 'C');
  CHECK_THROWS_AS(make_batch(seqs_of({ long_chain }), vocab(), 40), SequenceTooLong);
  auto batch = make_batch(seqs_of({ "CCO" }), vocab(), 40);
  batch.ids(0, 2) = vocab().size() + 3;
  CHECK_THROWS_AS(encode(batch, p, false, 0), UnknownTokenId);
}

TEST_CASE("padding invariance") {
  const auto p = small_params();
  const auto corpus = synth_polymers(12, 2);
  const auto seqs = seqs_of(corpus);
  auto batch = make_batch(seqs, vocab(), p.config.max_len);
  const auto ref = encode(batch, p, false, 0);
  for (int b = 0; b < batch.size(); ++b)
    for (Eigen::Index c = batch.lengths[b]; c < batch.ids.cols(); ++c)
      batch.ids(b, c) = 7 + static_cast<int>(c % 5);
  const auto perturbed = encode(batch, p, false, 0);
  for (std::size_t b = 0; b < ref.size(); ++b)
    CHECK((pool_cls(ref[b]) - pool_cls(perturbed[b])).cwiseAbs().maxCoeff() <= 1e-12);

  // Batch split: embedding halves separately gives the same rows.
  const Matrix all = embed(seqs, p, vocab());
  const std::vector<TokenSequence> a(seqs.begin(), seqs.begin() + 5);
  const std::vector<TokenSequence> b(seqs.begin() + 5, seqs.end());
  CHECK(embed(a, p, vocab()) == all.topRows(5));
  CHECK(embed(b, p, vocab()) == all.bottomRows(7));
}

TEST_CASE("projector") {
  auto p = small_params();
  RowVector h = RowVector::Random(16);
  ProjectorParams zero = p.projector;
  for (Matrix *m: { &zero.w1, &zero.b1, &zero.w2, &zero.b2 })
    m->setZero();
  CHECK(project(h, zero).isZero(0.0));

  ProjectorParams ident = zero;
  ident.w1 = Matrix::Identity(16, 16);
  ident.w2 = Matrix::Identity(16, 8);
  CHECK(project(h, ident, ProjectorActivation::kLinear) == h.head(8));

  // Independent dense-algebra oracle.
  const auto &q = p.projector;
  RowVector hidden(16);
  for (int j = 0; j < 16; ++j) {
    double s = q.b1(0, j);
    for (int i = 0; i < 16; ++i)
      s += h(i) * q.w1(i, j);
    hidden(j) = s > 0 ? s : 0;
  }
  const RowVector z = project(h, q);
  for (int k = 0; k < 8; ++k) {
    double s = q.b2(0, k);
    for (int j = 0; j < 16; ++j)
      s += hidden(j) * q.w2(j, k);
    CHECK(std::abs(z(k) - s) <= 1e-12 * std::max(1.0, std::abs(s)));
  }
}

TEST_CASE("forward_pair") {
  const auto p = small_params();
  AugmentationSpec base;
  const auto pairs = make_pair_batch({ "[*]CC([*])Cl" }, base, 3);
  const auto out = forward_pair(pairs[0], p, base, vocab());
  CHECK(out.h_i == out.h_j);
  CHECK(out.z_i == out.z_j);
  CHECK(out.h_i.size() == 16);
  CHECK(out.z_i.size() == 8);
  CHECK(out.z_i.norm() > 0);

  AugmentationSpec implicit = base;
  implicit.implicit_dropout = true;
  const auto pi = make_pair_batch({ "[*]CC([*])Cl" }, implicit, 3);
  const auto o2 = forward_pair(pi[0], p, implicit, vocab());
  CHECK(o2.h_i != o2.h_j);
  CHECK(std::isfinite(o2.z_i.norm()));
}

TEST_CASE("training forward agrees with inference path") {
  const auto p = small_params();
  const auto seqs = seqs_of(synth_polymers(6, 4));
  const auto batch = make_batch(seqs, vocab(), p.config.max_len);
  std::vector<std::span<const int>> rows;
  for (int b = 0; b < batch.size(); ++b)
    rows.push_back(batch.row(b));
  const auto tape = forward_batch(p, rows, std::vector<std::optional<std::uint64_t>>(rows.size()));
  const Matrix h = embed(seqs, p, vocab());
  CHECK((tape.h() - h).cwiseAbs().maxCoeff() <= 1e-12);
  for (int b = 0; b < batch.size(); ++b)
    CHECK((tape.z().row(b) - project(h.row(b), p.projector)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradient check on a small config") {
  const auto p = small_params(5);
  AugmentationSpec spec { ExplicitMode::kEnumeration, ExplicitMode::kMasking, true, 0.1 };
  const auto batch = make_pair_batch(synth_polymers(3, 6), spec, 12);
  for (const auto &g: gradcheck::check_pipeline(p, batch, spec, vocab(), 0.5, 6, 1e-4, 1)) {
    INFO(g.name);
    CHECK(g.rel_error <= 1e-4);
  }
}

TEST_CASE("checkpoint round trip") {
  const auto p = small_params(9);
  const std::string bytes = serialize_checkpoint(p);
  const auto back = deserialize_checkpoint(bytes);
  CHECK(serialize_checkpoint(back) == bytes);
  CHECK(back.config == p.config);
  CHECK(parameter_checksum(back) == parameter_checksum(p));

  const auto dir = std::filesystem::temp_directory_path() / "polycl_test_encoder";
  std::filesystem::create_directories(dir);
  save_checkpoint(p, dir / "a.bin");
  CHECK(read_file(dir / "a.bin") == bytes);
  CHECK(serialize_checkpoint(load_checkpoint(dir / "a.bin")) == bytes);

  std::string corrupt = bytes;
  corrupt[corrupt.size() / 2] ^= 0x01;
  CHECK_THROWS_AS(deserialize_checkpoint(corrupt), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, 20)), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), Error);
}

TEST_CASE("init is seeded") {
  CHECK(serialize_checkpoint(small_params(3)) == serialize_checkpoint(small_params(3)));
  CHECK(serialize_checkpoint(small_params(3)) != serialize_checkpoint(small_params(4)));
}
