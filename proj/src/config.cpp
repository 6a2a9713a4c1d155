//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/config.hpp"

#include <functional>
#include <map>

#include <json.hpp>

#include "polycl/errors.hpp"
#include "polycl/io.hpp"

namespace polycl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string &key, const std::string &msg) {
  throw ConfigError("config key " + key + ": " + msg);
}

// Walks the members of one object, dispatching on known keys.
void visit(const json &obj, const std::string &prefix,
           const std::map<std::string, std::function<void(const json &,
                                                           const std::string &)>>
               &handlers) {
  if (!obj.is_object())
    bad(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto &[k, v]: obj.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    const auto it = handlers.find(k);
    if (it == handlers.end())
      bad(key, "unknown key");
    it->second(v, key);
  }
}

double as_real(const json &v, const std::string &key) {
  if (!v.is_number())
    bad(key, "expected a number");
  return v.get<double>();
}

long as_int(const json &v, const std::string &key) {
  if (!v.is_number_integer())
    bad(key, "expected an integer");
  return v.get<long>();
}

int as_int32(const json &v, const std::string &key) {
  const long x = as_int(v, key);
  if (x < -2147483647L || x > 2147483647L)
    bad(key, "integer out of range");
  return static_cast<int>(x);
}

bool as_bool(const json &v, const std::string &key) {
  if (!v.is_boolean())
    bad(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json &v, const std::string &key) {
  if (!v.is_string())
    bad(key, "expected a string");
  return v.get<std::string>();
}

fs::path as_path(const json &v, const std::string &key, const fs::path &base) {
  const fs::path p = as_string(v, key);
  return p.is_relative() && !base.empty() ? base / p : p;
}

ExplicitMode as_mode(const json &v, const std::string &key) {
  try {
    return parse_mode(as_string(v, key));
  } catch (const Error &e) {
    bad(key, e.what());
  }
}

AugmentationSpec as_spec(const json &v, const std::string &key,
                         AugmentationSpec spec) {
  visit(v, key,
        { { "branch_i",
            [&](const json &x, const std::string &k) {
              spec.branch_i = as_mode(x, k);
            } },
          { "branch_j",
            [&](const json &x, const std::string &k) {
              spec.branch_j = as_mode(x, k);
            } },
          { "implicit_dropout",
            [&](const json &x, const std::string &k) {
              spec.implicit_dropout = as_bool(x, k);
            } },
          { "ratio", [&](const json &x, const std::string &k) {
             spec.ratio = as_real(x, k);
           } } });
  try {
    spec.validate();
  } catch (const Error &e) {
    bad(key, e.what());
  }
  return spec;
}

template<typename F>
void validated(const std::string &key, F &&f) {
  try {
    f();
  } catch (const Error &e) {
    bad(key, e.what());
  }
}

json spec_json(const AugmentationSpec &s) {
  return { { "branch_i", std::string(to_string(s.branch_i)) },
           { "branch_j", std::string(to_string(s.branch_j)) },
           { "implicit_dropout", s.implicit_dropout },
           { "ratio", s.ratio } };
}

}  // namespace

std::vector<AugmentationSpec> standard_sweep_grid(double ratio) {
  std::vector<AugmentationSpec> grid = explicit_combinations(ratio);
  AugmentationSpec implicit_only;
  implicit_only.implicit_dropout = true;
  implicit_only.ratio = ratio;
  grid.push_back(implicit_only);
  return grid;
}

RunConfig RunConfig::parse(std::string_view text, const fs::path &base) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  bool has_seed = false;
  auto &enc = cfg.encoder;
  auto &con = cfg.contrastive;
  auto &head = cfg.transfer;

  visit(
      root, "",
      {
          { "seed",
            [&](const json &v, const std::string &k) {
              if (!v.is_number_unsigned() && !v.is_number_integer())
                bad(k, "expected a non-negative integer");
              if (v.is_number_integer() && !v.is_number_unsigned()
                  && v.get<long long>() < 0)
                bad(k, "expected a non-negative integer");
              cfg.seed = v.get<std::uint64_t>();
              has_seed = true;
            } },
          { "paths",
            [&](const json &v, const std::string &p) {
              visit(v, p,
                    { { "corpus",
                        [&](const json &x, const std::string &k) {
                          cfg.paths.corpus = as_path(x, k, base);
                        } },
                      { "eval_corpus",
                        [&](const json &x, const std::string &k) {
                          cfg.paths.eval_corpus = as_path(x, k, base);
                        } },
                      { "out_dir",
                        [&](const json &x, const std::string &k) {
                          cfg.paths.out_dir = as_path(x, k, base);
                        } },
                      { "vocab",
                        [&](const json &x, const std::string &k) {
                          cfg.paths.vocab = as_path(x, k, base);
                        } },
                      { "datasets", [&](const json &x, const std::string &k) {
                         if (!x.is_array())
                           bad(k, "expected an array of paths");
                         cfg.paths.datasets.clear();
                         for (std::size_t i = 0; i < x.size(); ++i)
                           cfg.paths.datasets.push_back(as_path(
                               x[i], k + "[" + std::to_string(i) + "]", base));
                       } } });
            } },
          { "encoder",
            [&](const json &v, const std::string &p) {
              visit(v, p,
                    { { "d_model",
                        [&](const json &x, const std::string &k) {
                          enc.d_model = as_int32(x, k);
                        } },
                      { "n_layers",
                        [&](const json &x, const std::string &k) {
                          enc.n_layers = as_int32(x, k);
                        } },
                      { "n_heads",
                        [&](const json &x, const std::string &k) {
                          enc.n_heads = as_int32(x, k);
                        } },
                      { "d_feedforward",
                        [&](const json &x, const std::string &k) {
                          enc.d_feedforward = as_int32(x, k);
                        } },
                      { "max_len",
                        [&](const json &x, const std::string &k) {
                          enc.max_len = as_int32(x, k);
                        } },
                      { "dropout",
                        [&](const json &x, const std::string &k) {
                          enc.dropout_ratio = as_real(x, k);
                        } },
                      { "projector_out",
                        [&](const json &x, const std::string &k) {
                          enc.projector_out = as_int32(x, k);
                        } } });
              EncoderConfig probe = enc;
              probe.vocab_size = std::max(probe.vocab_size, Vocabulary::builtin().size());
              validated(p, [&] { probe.validate(); });
            } },
          { "contrastive",
            [&](const json &v, const std::string &p) {
              visit(v, p,
                    { { "temperature",
                        [&](const json &x, const std::string &k) {
                          con.temperature = as_real(x, k);
                        } },
                      { "batch_size",
                        [&](const json &x, const std::string &k) {
                          con.batch_size = as_int32(x, k);
                        } },
                      { "epochs",
                        [&](const json &x, const std::string &k) {
                          con.epochs = as_int32(x, k);
                        } },
                      { "max_steps",
                        [&](const json &x, const std::string &k) {
                          con.max_steps = as_int(x, k);
                        } },
                      { "learning_rate",
                        [&](const json &x, const std::string &k) {
                          con.learning_rate = as_real(x, k);
                        } },
                      { "max_grad_norm",
                        [&](const json &x, const std::string &k) {
                          con.max_grad_norm = as_real(x, k);
                        } },
                      { "weight_decay",
                        [&](const json &x, const std::string &k) {
                          con.weight_decay = as_real(x, k);
                        } } });
              validated(p, [&] { con.validate(); });
            } },
          { "augmentation",
            [&](const json &v, const std::string &p) {
              cfg.augmentation = as_spec(v, p, cfg.augmentation);
            } },
          { "transfer",
            [&](const json &v, const std::string &p) {
              visit(v, p,
                    { { "max_epochs",
                        [&](const json &x, const std::string &k) {
                          head.max_epochs = as_int32(x, k);
                        } },
                      { "early_stop_start",
                        [&](const json &x, const std::string &k) {
                          head.early_stop_start = as_int32(x, k);
                        } },
                      { "patience",
                        [&](const json &x, const std::string &k) {
                          head.patience = as_int32(x, k);
                        } },
                      { "learning_rate",
                        [&](const json &x, const std::string &k) {
                          head.learning_rate = as_real(x, k);
                        } },
                      { "weight_decay",
                        [&](const json &x, const std::string &k) {
                          head.weight_decay = as_real(x, k);
                        } },
                      { "dropout",
                        [&](const json &x, const std::string &k) {
                          head.dropout = as_real(x, k);
                        } },
                      { "full_batch_limit",
                        [&](const json &x, const std::string &k) {
                          head.full_batch_limit = as_int32(x, k);
                        } },
                      { "minibatch_size",
                        [&](const json &x, const std::string &k) {
                          head.minibatch_size = as_int32(x, k);
                        } },
                      { "folds", [&](const json &x, const std::string &k) {
                         head.folds = as_int32(x, k);
                       } } });
              validated(p, [&] { head.validate(); });
            } },
          { "sweep",
            [&](const json &v, const std::string &p) {
              visit(v, p,
                    { { "workers",
                        [&](const json &x, const std::string &k) {
                          cfg.sweep.workers = as_int32(x, k);
                          if (cfg.sweep.workers < 1)
                            bad(k, "must be at least 1");
                        } },
                      { "grid", [&](const json &x, const std::string &k) {
                         cfg.sweep.grid.clear();
                         if (x.is_string()) {
                           if (x.get<std::string>() != "standard")
                             bad(k, "the only named grid is \"standard\"");
                           cfg.sweep.grid = standard_sweep_grid();
                           return;
                         }
                         if (!x.is_array())
                           bad(k, "expected \"standard\" or an array of specs");
                         for (std::size_t i = 0; i < x.size(); ++i)
                           cfg.sweep.grid.push_back(
                               as_spec(x[i], k + "[" + std::to_string(i) + "]",
                                       AugmentationSpec {}));
                       } } });
            } },
      });

  if (!has_seed)
    bad("seed", "missing (required)");
  cfg.contrastive.seed = cfg.seed;
  return cfg;
}

RunConfig RunConfig::load(const fs::path &path) {
  return parse(read_file(path), path.parent_path());
}

void RunConfig::check_paths() const {
  auto need = [](const fs::path &p, const std::string &key) {
    if (!p.empty() && !fs::exists(p))
      bad(key, "path does not exist: " + p.string());
  };
  need(paths.corpus, "paths.corpus");
  need(paths.eval_corpus, "paths.eval_corpus");
  need(paths.vocab, "paths.vocab");
  for (std::size_t i = 0; i < paths.datasets.size(); ++i)
    need(paths.datasets[i], "paths.datasets[" + std::to_string(i) + "]");
}

std::string RunConfig::to_json() const {
  json datasets = json::array();
  for (const auto &d: paths.datasets)
    datasets.push_back(d.generic_string());
  json grid = json::array();
  for (const auto &s: sweep.grid)
    grid.push_back(spec_json(s));
  const json j = {
    { "seed", seed },
    { "paths",
      { { "corpus", paths.corpus.generic_string() },
        { "eval_corpus", paths.eval_corpus.generic_string() },
        { "datasets", datasets },
        { "out_dir", paths.out_dir.generic_string() },
        { "vocab", paths.vocab.generic_string() } } },
    { "encoder",
      { { "d_model", encoder.d_model },
        { "n_layers", encoder.n_layers },
        { "n_heads", encoder.n_heads },
        { "d_feedforward", encoder.d_feedforward },
        { "max_len", encoder.max_len },
        { "dropout", encoder.dropout_ratio },
        { "projector_out", encoder.projector_out } } },
    { "contrastive",
      { { "temperature", contrastive.temperature },
        { "batch_size", contrastive.batch_size },
        { "epochs", contrastive.epochs },
        { "max_steps", contrastive.max_steps },
        { "learning_rate", contrastive.learning_rate },
        { "max_grad_norm", contrastive.max_grad_norm },
        { "weight_decay", contrastive.weight_decay } } },
    { "augmentation", spec_json(augmentation) },
    { "transfer",
      { { "max_epochs", transfer.max_epochs },
        { "early_stop_start", transfer.early_stop_start },
        { "patience", transfer.patience },
        { "learning_rate", transfer.learning_rate },
        { "weight_decay", transfer.weight_decay },
        { "dropout", transfer.dropout },
        { "full_batch_limit", transfer.full_batch_limit },
        { "minibatch_size", transfer.minibatch_size },
        { "folds", transfer.folds } } },
    { "sweep", { { "workers", sweep.workers }, { "grid", grid } } },
  };
  return j.dump(2) + "\n";
}

}  // namespace polycl
