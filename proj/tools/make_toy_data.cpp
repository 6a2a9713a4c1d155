//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//
// Writes the deterministic toy corpus, a disjoint evaluation corpus, the two
// toy property datasets, the token table and example run configurations.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polycl/errors.hpp"
#include "polycl/io.hpp"
#include "polycl/synth.hpp"
#include "polycl/tokenizer.hpp"

namespace fs = std::filesystem;
using namespace polycl;

namespace {

std::string lines(const std::vector<std::string> &v, std::size_t begin,
                  std::size_t end, const std::string &comment) {
  std::ostringstream os;
  os << "# " << comment << '\n';
  for (std::size_t i = begin; i < end; ++i)
    os << v[i] << '\n';
  return os.str();
}

nlohmann::ordered_json base_config(std::uint64_t seed, const char *out_dir) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["paths"] = { { "corpus", "corpus_toy.txt" },
                 { "eval_corpus", "corpus_eval.txt" },
                 { "datasets", { "toy_gap.csv", "toy_affinity.csv" } },
                 { "out_dir", out_dir },
                 { "vocab", "vocab.txt" } };
  j["encoder"] = { { "d_model", 64 }, { "n_layers", 2 }, { "n_heads", 4 },
                   { "d_feedforward", 128 }, { "max_len", 128 },
                   { "dropout", 0.1 }, { "projector_out", 32 } };
  j["augmentation"] = { { "branch_i", "Enumeration" },
                        { "branch_j", "Masking" },
                        { "implicit_dropout", true },
                        { "ratio", 0.1 } };
  return j;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "Generate the toy polymer corpus and property datasets" };
  std::string out = "data";
  std::size_t count = 1000, eval_count = 300, labelled = 400;
  std::uint64_t seed = 7;
  app.add_option("--out", out, "Output directory");
  app.add_option("--count", count, "Pretraining corpus size");
  app.add_option("--eval-count", eval_count, "Held-out evaluation corpus size");
  app.add_option("--labelled", labelled, "Molecules per property dataset");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path dir = out;
    fs::create_directories(dir);
    const auto all = synth_polymers(count + eval_count, seed);
    write_file(dir / "corpus_toy.txt",
               lines(all, 0, count, "toy pretraining corpus, one repeat unit per line"));
    write_file(dir / "corpus_eval.txt",
               lines(all, count, all.size(), "held-out evaluation corpus"));

    const std::vector<std::string> subset(
        all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(labelled, count)));
    for (const char *name: { "toy_gap", "toy_affinity" }) {
      const auto ds = synth_property_dataset(name, subset, seed);
      std::ostringstream os;
      write_dataset(os, ds);
      write_file(dir / (std::string(name) + ".csv"), os.str());
    }
    Vocabulary::builtin().save(dir / "vocab.txt");

    auto pre = base_config(seed, "../out/pretrain");
    pre["contrastive"] = { { "temperature", 0.05 }, { "batch_size", 32 },
                           { "epochs", 10 }, { "max_steps", 500 },
                           { "learning_rate", 1e-3 } };
    write_file(dir / "pretrain.json", pre.dump(2) + "\n");

    auto sweep = base_config(seed, "../out/sweep");
    sweep["contrastive"] = { { "temperature", 0.05 }, { "batch_size", 16 },
                             { "epochs", 10 }, { "max_steps", 150 },
                             { "learning_rate", 1e-3 } };
    sweep["sweep"] = { { "grid", "standard" }, { "workers", 1 } };
    write_file(dir / "sweep.json", sweep.dump(2) + "\n");
  } catch (const Error &e) {
    std::cerr << "make_toy_data: " << e.what() << '\n';
    return 3;
  }
  std::cout << "wrote toy data to " << out << '\n';
  return 0;
}
