//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: pretrain, sweep, embed, eval-repr, transfer,
// augment. Exit codes: 0 ok, 2 usage/config, 3 data/checkpoint, 4 numeric.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "polycl/augment.hpp"
#include "polycl/checkpoint.hpp"
#include "polycl/config.hpp"
#include "polycl/errors.hpp"
#include "polycl/io.hpp"
#include "polycl/metrics.hpp"
#include "polycl/pretrain.hpp"
#include "polycl/rng.hpp"
#include "polycl/sweep.hpp"

namespace fs = std::filesystem;
using namespace polycl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> workers;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("polycl");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char *env = std::getenv("POLYCL_LOG"))
    spdlog::set_level(spdlog::level::from_str(env));
}

// Config from --config (required when `need` is set) with the command-line
// overrides applied.
std::optional<RunConfig> load_config(const GlobalFlags &g, bool need) {
  if (g.config.empty()) {
    if (need)
      throw ConfigError("--config is required for this command");
    return std::nullopt;
  }
  if (!fs::exists(g.config))
    throw ConfigError("config file not found: " + g.config);
  RunConfig cfg = RunConfig::load(g.config);
  if (g.seed) {
    cfg.seed = *g.seed;
    cfg.contrastive.seed = *g.seed;
  }
  if (!g.out_dir.empty())
    cfg.paths.out_dir = g.out_dir;
  if (g.workers)
    cfg.sweep.workers = *g.workers;
  cfg.check_paths();
  return cfg;
}

Vocabulary load_vocab(const std::optional<RunConfig> &cfg) {
  if (cfg && !cfg->paths.vocab.empty())
    return Vocabulary::load(cfg->paths.vocab);
  return Vocabulary::builtin();
}

EncoderParams load_encoder(const std::string &path, const Vocabulary &vocab) {
  if (!fs::exists(path))
    throw ConfigError("checkpoint not found: " + path);
  EncoderParams p = load_checkpoint(path);
  if (p.config.vocab_size != vocab.size())
    throw CheckpointError(path + ": checkpoint vocabulary size "
                          + std::to_string(p.config.vocab_size)
                          + " does not match the vocabulary ("
                          + std::to_string(vocab.size()) + ")");
  return p;
}

std::uint64_t effective_seed(const GlobalFlags &g,
                             const std::optional<RunConfig> &cfg) {
  if (g.seed)
    return *g.seed;
  return cfg ? cfg->seed : 0;
}

void emit(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

std::vector<std::string> require_corpus(const fs::path &path,
                                        const std::string &what) {
  if (path.empty())
    throw ConfigError(what + " is not set");
  if (!fs::exists(path))
    throw ConfigError(what + " not found: " + path.string());
  return read_corpus(path);
}

// ---- commands --------------------------------------------------------------

int cmd_pretrain(const GlobalFlags &g) {
  auto cfg = *load_config(g, true);
  const Vocabulary vocab = load_vocab(cfg);
  const auto corpus = require_corpus(cfg.paths.corpus, "paths.corpus");
  EncoderConfig enc = cfg.encoder;
  enc.vocab_size = vocab.size();

  const fs::path out = cfg.paths.out_dir;
  fs::create_directories(out);
  const std::string effective = cfg.to_json();
  write_file(out / "config.json", effective);
  std::ostringstream fp;
  fp << "config " << fingerprint(effective) << "\n"
     << "corpus " << fingerprint(read_file(cfg.paths.corpus)) << "\n"
     << "seed " << cfg.seed << "\n";
  write_file(out / "fingerprint.txt", fp.str());

  PretrainOptions opts;
  if (!cfg.paths.eval_corpus.empty())
    opts.eval_corpus = read_corpus(cfg.paths.eval_corpus);
  opts.sink = [&](const std::string &name, const EncoderParams &p) {
    save_checkpoint(p, out / (name + ".bin"));
  };
  spdlog::info("pretraining {} on {} polymers ({} steps)",
               cfg.augmentation.tag(), corpus.size(),
               planned_steps(corpus.size(), cfg.contrastive));
  const auto result =
      pretrain(corpus, cfg.augmentation, enc, cfg.contrastive, vocab, opts);
  write_file(out / "train_log.csv", result.log.to_csv());
  spdlog::info("final checkpoint {}", (out / "ckpt_final.bin").string());
  return 0;
}

int cmd_sweep(const GlobalFlags &g) {
  auto cfg = *load_config(g, true);
  if (cfg.sweep.grid.empty())
    throw ConfigError("config key sweep.grid: grid is empty");
  const Vocabulary vocab = load_vocab(cfg);

  SweepSetup setup;
  setup.corpus = require_corpus(cfg.paths.corpus, "paths.corpus");
  if (!cfg.paths.eval_corpus.empty())
    setup.eval_corpus = read_corpus(cfg.paths.eval_corpus);
  if (cfg.paths.datasets.empty())
    throw ConfigError("config key paths.datasets: no datasets configured");
  for (const auto &d: cfg.paths.datasets)
    setup.datasets.push_back(read_dataset(d));
  setup.grid = cfg.sweep.grid;
  setup.encoder = cfg.encoder;
  setup.encoder.vocab_size = vocab.size();
  setup.contrastive = cfg.contrastive;
  setup.head = cfg.transfer;
  setup.workers = cfg.sweep.workers;
  setup.out_dir = cfg.paths.out_dir;

  fs::create_directories(cfg.paths.out_dir);
  write_file(cfg.paths.out_dir / "config.json", cfg.to_json());
  const SweepTable table = run_sweep(setup, vocab);
  std::ostringstream os;
  table.write_csv(os);
  write_file(cfg.paths.out_dir / "sweep_grid.csv", os.str());
  if (const auto n = table.failures()) {
    spdlog::error("{} sweep cell(s) failed; see sweep_grid.csv", n);
    return kExitData;
  }
  return 0;
}

int cmd_embed(const GlobalFlags &g, const std::string &checkpoint,
              const std::string &corpus_path, const std::string &output) {
  const auto cfg = load_config(g, false);
  const Vocabulary vocab = load_vocab(cfg);
  const EncoderParams params = load_encoder(checkpoint, vocab);
  const auto corpus = require_corpus(corpus_path, "--corpus");
  std::vector<TokenSequence> seqs;
  for (const auto &s: corpus)
    seqs.push_back(tokenize(s));
  const Matrix h = embed(seqs, params, vocab);
  std::ostringstream os;
  write_embeddings(os, corpus, h);
  emit(output, os.str());
  return 0;
}

int cmd_eval_repr(const GlobalFlags &g,
                  const std::vector<std::string> &checkpoints,
                  const std::string &corpus_path, const std::string &tag,
                  const std::string &output) {
  const auto cfg = load_config(g, false);
  const Vocabulary vocab = load_vocab(cfg);
  const auto corpus = require_corpus(corpus_path, "--corpus");
  const std::uint64_t seed = effective_seed(g, cfg);
  std::vector<MetricRow> rows;
  for (const auto &c: checkpoints) {
    const EncoderParams params = load_encoder(c, vocab);
    const auto m = evaluate_representation(corpus, params, vocab, seed);
    rows.push_back({ tag, fs::path(c).stem().string(), m.alignment,
                     m.uniformity });
  }
  std::ostringstream os;
  write_metric_report(os, rows);
  emit(output, os.str());
  return 0;
}

int cmd_transfer(const GlobalFlags &g, const std::string &checkpoint,
                 const std::vector<std::string> &datasets,
                 const std::string &output) {
  const auto cfg = load_config(g, false);
  const Vocabulary vocab = load_vocab(cfg);
  const EncoderParams params = load_encoder(checkpoint, vocab);
  const HeadConfig head = cfg ? cfg->transfer : HeadConfig {};
  const std::uint64_t seed = effective_seed(g, cfg);
  std::ostringstream os;
  bool header = true;
  for (const auto &path: datasets) {
    if (!fs::exists(path))
      throw ConfigError("dataset not found: " + path);
    const PropertyDataset ds = read_dataset(path);
    const auto rep = cross_validate(ds, params, vocab, head, seed);
    write_fold_report(os, rep, header);
    header = false;
    spdlog::info("{}: mean R2 {:.4f}, mean RMSE {:.4f}", ds.name, rep.mean_r2,
                 rep.mean_rmse);
  }
  emit(output, os.str());
  return 0;
}

int cmd_augment(const GlobalFlags &g, const std::string &input,
                const std::string &mode_name, double ratio, int n,
                const std::string &output) {
  const auto cfg = load_config(g, false);
  const auto corpus = require_corpus(input, "--input");
  const ExplicitMode mode = parse_mode(mode_name);
  if (n < 1)
    throw ConfigError("--n must be at least 1");
  const std::uint64_t seed = effective_seed(g, cfg);
  std::ostringstream os;
  os << "anchor_index,view_index,mode,view\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::uint64_t anchor_seed = mix64(seed, i, SeedTag::kBranchI);
    for (int k = 0; k < n; ++k) {
      const auto view = make_view(corpus[i], mode, ratio,
                                  mix64(anchor_seed, static_cast<std::uint64_t>(k),
                                        SeedTag::kViews));
      os << i << ',' << k << ',' << to_string(mode) << ','
         << csv_field(detokenize(view)) << '\n';
    }
  }
  emit(output, os.str());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  setup_logging();

  CLI::App app { "Contrastive polymer representation learning at desk scale" };
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--seed", g.seed, "Override the configured seed");
  app.add_option("--out-dir", g.out_dir, "Override paths.out_dir");
  app.add_option("--workers", g.workers, "Concurrent sweep cells")
      ->check(CLI::PositiveNumber);
  app.fallthrough();

  auto *pretrain_cmd = app.add_subcommand("pretrain", "Contrastive pretraining");
  auto *sweep_cmd =
      app.add_subcommand("sweep", "Pretrain + transfer for every augmentation spec");

  std::string checkpoint, corpus, output = "-", tag = "polycl";
  std::vector<std::string> checkpoints, datasets;

  auto *embed_cmd = app.add_subcommand("embed", "Export [CLS] embeddings as CSV");
  embed_cmd->add_option("--checkpoint", checkpoint)->required();
  embed_cmd->add_option("--corpus", corpus)->required();
  embed_cmd->add_option("--output,-o", output, "Output CSV (default stdout)");

  auto *eval_cmd = app.add_subcommand("eval-repr", "Alignment and uniformity per checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoints)->required();
  eval_cmd->add_option("--corpus", corpus)->required();
  eval_cmd->add_option("--tag", tag, "model_tag column value");
  eval_cmd->add_option("--output,-o", output);

  auto *transfer_cmd = app.add_subcommand("transfer", "Frozen-encoder k-fold regression");
  transfer_cmd->add_option("--checkpoint", checkpoint)->required();
  transfer_cmd->add_option("--dataset", datasets, "CSV with header smiles,value")->required();
  transfer_cmd->add_option("--output,-o", output);

  std::string input, mode = "Enumeration";
  double ratio = 0.10;
  int n_views = 4;
  auto *augment_cmd = app.add_subcommand("augment", "Dump augmented views for inspection");
  augment_cmd->add_option("--input", input, "Corpus file")->required();
  augment_cmd->add_option("--mode", mode, "Original|Enumeration|Masking|Drop");
  augment_cmd->add_option("--ratio", ratio, "Masking/Drop token fraction");
  augment_cmd->add_option("--n", n_views, "Views per input");
  augment_cmd->add_option("--output,-o", output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*pretrain_cmd)
      return cmd_pretrain(g);
    if (*sweep_cmd)
      return cmd_sweep(g);
    if (*embed_cmd)
      return cmd_embed(g, checkpoint, corpus, output);
    if (*eval_cmd)
      return cmd_eval_repr(g, checkpoints, corpus, tag, output);
    if (*transfer_cmd)
      return cmd_transfer(g, checkpoint, datasets, output);
    if (*augment_cmd)
      return cmd_augment(g, input, mode, ratio, n_views, output);
  } catch (const ConfigError &e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const NumericError &e) {
    spdlog::error("numeric failure: {}", e.what());
    return kExitNumeric;
  } catch (const DataError &e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const fs::filesystem_error &e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const std::exception &e) {
    spdlog::error("unexpected failure: {}", e.what());
    return 1;
  }
  return kExitConfig;
}
