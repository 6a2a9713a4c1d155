//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "polycl/config.hpp"
#include "polycl/errors.hpp"
#include "polycl/io.hpp"

using namespace polycl;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "polycl_test_io";
  fs::create_directories(dir);
  return dir;
}

std::string error_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const std::exception &e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("real formatting round-trips") {
  for (double v: { 0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0 }) {
    const std::string s = format_real(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("csv fields") {
  CHECK(csv_field("CCO") == "CCO");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(split_csv_line("\"a,b\",c") == std::vector<std::string> { "a,b", "c" });
  CHECK(split_csv_line("x,\"y\"\"z\"") == std::vector<std::string> { "x", "y\"z" });
  CHECK_THROWS_AS(split_csv_line("\"open"), DataError);
}

TEST_CASE("corpus reader") {
  const auto path = scratch() / "corpus.txt";
  write_file(path, "# toy corpus\n[*]CC([*])Cl\n\nCCO\r\n[*]c1ccccc1[*]\n");
  CHECK(read_corpus(path) == std::vector<std::string> { "[*]CC([*])Cl", "CCO", "[*]c1ccccc1[*]" });

  write_file(path, "CCO\nCC\nC(\n");
  const std::string msg = error_of([&] { read_corpus(path); });
  CHECK(msg.find("corpus.txt:3") != std::string::npos);
  CHECK_THROWS_AS(read_corpus(path), DataError);
  CHECK_THROWS_AS(read_corpus(scratch() / "nope.txt"), ConfigError);
}

TEST_CASE("dataset reader") {
  const auto path = scratch() / "prop.csv";
  write_file(path, "smiles,value\n[*]CC([*])Cl,1.5\nCCO,-2e-1\n");
  const auto ds = read_dataset(path);
  CHECK(ds.name == "prop");
  REQUIRE(ds.records.size() == 2);
  CHECK(ds.records[1].value == -0.2);

  write_file(path, "smi,val\nCCO,1\n");
  CHECK_THROWS_AS(read_dataset(path), ConfigError);

  write_file(path, "smiles,value\nCC,1\nCC,2\nCC,3\nCC,4\nCC,5\nC(,6\n");
  const std::string msg = error_of([&] { read_dataset(path); });
  CHECK(msg.find("prop.csv:7") != std::string::npos);
  write_file(path, "smiles,value\nCC,abc\n");
  CHECK_THROWS_AS(read_dataset(path), DataError);
  write_file(path, "smiles,value\nCC,1,2\n");
  CHECK_THROWS_AS(read_dataset(path), DataError);

  std::ostringstream out;
  write_dataset(out, ds);
  write_file(path, out.str());
  const auto back = read_dataset(path);
  CHECK(back.records.size() == ds.records.size());
  CHECK(back.records[0].value == ds.records[0].value);
}

TEST_CASE("report writers") {
  CrossValidationReport rep;
  rep.dataset = "toy";
  for (int f = 0; f < 5; ++f)
    rep.folds.push_back({ f, 0.5, 0.25, 10 + f, 60 });
  rep.mean_rmse = 0.5;
  rep.mean_r2 = 0.25;
  std::ostringstream os;
  write_fold_report(os, rep);
  std::istringstream in(os.str());
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);)
    lines.push_back(l);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "dataset,fold,rmse,r2,best_epoch");
  CHECK(lines[1] == "toy,0,0.5,0.25,10");
  CHECK(lines[6] == "toy,mean,0.5,0.25,");

  Matrix h(2, 2);
  h << 1, 2, 3, 4;
  std::ostringstream e;
  write_embeddings(e, { "CC", "CO" }, h);
  CHECK(e.str() == "smiles,h0,h1\nCC,1,2\nCO,3,4\n");

  std::ostringstream m;
  write_metric_report(m, { { "tag", "ckpt_0", 0.5, -1.0 } });
  CHECK(m.str() == "model_tag,checkpoint,alignment,uniformity\ntag,ckpt_0,0.5,-1\n");
  CHECK(fingerprint("abc") == "352441c2");
}

TEST_CASE("run config") {
  const auto dir = scratch();
  write_file(dir / "c.txt", "CCO\n");
  const std::string good = R"({
    "seed": 42,
    "paths": { "corpus": "c.txt", "out_dir": "runs" },
    "encoder": { "d_model": 32, "n_heads": 4 },
    "contrastive": { "batch_size": 16, "max_steps": 10 },
    "augmentation": { "branch_i": "Enumeration", "branch_j": "Drop", "implicit_dropout": false },
    "transfer": { "max_epochs": 50 },
    "sweep": { "grid": "standard", "workers": 2 }
  })";
  const auto cfg = RunConfig::parse(good, dir);
  CHECK(cfg.seed == 42);
  CHECK(cfg.contrastive.seed == 42);
  CHECK(cfg.paths.corpus == dir / "c.txt");
  CHECK(cfg.encoder.d_model == 32);
  CHECK(cfg.contrastive.batch_size == 16);
  CHECK(cfg.augmentation.branch_j == ExplicitMode::kDrop);
  CHECK(cfg.transfer.max_epochs == 50);
  CHECK(cfg.sweep.grid.size() == 11);
  CHECK(cfg.sweep.workers == 2);
  CHECK_NOTHROW(cfg.check_paths());

  // Effective config survives a round trip through its own JSON.
  const auto again = RunConfig::parse(cfg.to_json(), {});
  CHECK(again.to_json() == cfg.to_json());

  const auto defaults = RunConfig::parse(R"({"seed": 1})");
  CHECK(defaults.augmentation.tag() == "Enumeration-Masking+implicit");
  CHECK(defaults.contrastive.temperature == 0.05);

  auto msg = [&](const std::string &text) {
    return error_of([&] { RunConfig::parse(text, dir); });
  };
  CHECK(msg(R"({})").find("seed") != std::string::npos);
  CHECK(msg(R"({"seed": 1, "contrastive": {"lr": 1}})").find("contrastive.lr") != std::string::npos);
  CHECK(msg(R"({"seed": 1, "bogus": 1})").find("bogus") != std::string::npos);
  CHECK(msg(R"({"seed": 1, "encoder": {"d_model": "big"}})").find("encoder.d_model") != std::string::npos);
  CHECK(msg(R"({"seed": 1, "encoder": {"n_heads": 5}})").find("encoder") != std::string::npos);
  CHECK(msg(R"({"seed": 1, "augmentation": {"ratio": 1.5}})").find("augmentation") != std::string::npos);
  CHECK(msg(R"({"seed": 1, "augmentation": {"branch_i": "Shuffle"}})").find("augmentation.branch_i") != std::string::npos);
  CHECK(msg(R"({"seed": 1, "sweep": {"grid": [{"branch_x": "Drop"}]}})").find("sweep.grid[0].branch_x") != std::string::npos);
  CHECK(msg(R"({"seed": -3})").find("seed") != std::string::npos);
  CHECK(msg("{not json").find("JSON") != std::string::npos);
  CHECK_THROWS_AS(RunConfig::parse("{}"), ConfigError);

  const auto missing = RunConfig::parse(R"({"seed": 1, "paths": {"corpus": "absent.txt"}})", dir);
  const std::string m = error_of([&] { missing.check_paths(); });
  CHECK(m.find("absent.txt") != std::string::npos);
}

TEST_CASE("standard sweep grid") {
  const auto grid = standard_sweep_grid();
  CHECK(grid.size() == 11);
  CHECK(grid.front().is_baseline());
  std::set<std::string> tags;
  for (const auto &s: grid)
    tags.insert(s.tag());
  CHECK(tags.size() == 11);
  CHECK(tags.count("Original-Original+implicit") == 1);
}
