//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "polycl/checkpoint.hpp"
#include "polycl/errors.hpp"
#include "polycl/io.hpp"
#include "polycl/metrics.hpp"
#include "polycl/pretrain.hpp"

namespace polycl {

void SweepTable::write_csv(std::ostream &os) const {
  os << "spec,dataset,mean_r2,mean_rmse,delta_r2,verdict,alignment,"
        "uniformity,error\n";
  for (const auto &c: cells) {
    os << csv_field(c.spec_tag) << ',' << csv_field(c.dataset) << ',';
    if (c.ok)
      os << format_real(c.mean_r2) << ',' << format_real(c.mean_rmse) << ','
         << (c.verdict == "baseline" ? "0" : format_real(c.delta_r2)) << ','
         << c.verdict << ',' << format_real(c.alignment) << ','
         << format_real(c.uniformity) << ',';
    else
      os << ",,," << c.verdict << ",,," << csv_field(c.error);
    os << '\n';
  }
}

std::size_t SweepTable::failures() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(), [](const SweepCell &c) { return !c.ok; }));
}

namespace {

std::vector<SweepCell> run_spec(const SweepSetup &setup,
                                const AugmentationSpec &spec,
                                const Vocabulary &vocab) {
  const std::string tag = spec.tag();
  std::vector<SweepCell> cells;
  for (const auto &ds: setup.datasets) {
    SweepCell c;
    c.spec_tag = tag;
    c.dataset = ds.name;
    cells.push_back(c);
  }
  auto fail_all = [&](const std::string &msg) {
    for (auto &c: cells) {
      c.ok = false;
      c.verdict = "failed";
      c.error = msg;
    }
  };

  PretrainResult run;
  try {
    PretrainOptions opts;
    opts.eval_corpus = setup.eval_corpus;
    if (setup.out_dir) {
      const auto dir = *setup.out_dir / tag;
      std::filesystem::create_directories(dir);
      opts.sink = [dir](const std::string &name, const EncoderParams &p) {
        save_checkpoint(p, dir / (name + ".bin"));
      };
    }
    run = pretrain(setup.corpus, spec, setup.encoder, setup.contrastive, vocab,
                   opts);
    if (setup.out_dir)
      write_file(*setup.out_dir / tag / "train_log.csv", run.log.to_csv());
  } catch (const std::exception &e) {
    spdlog::error("sweep {}: pretraining failed: {}", tag, e.what());
    fail_all(e.what());
    return cells;
  }

  const MetricSnapshot *last =
      run.log.snapshots.empty() ? nullptr : &run.log.snapshots.back();
  for (std::size_t d = 0; d < setup.datasets.size(); ++d) {
    SweepCell &c = cells[d];
    try {
      const auto rep = cross_validate(setup.datasets[d], run.params, vocab,
                                      setup.head, setup.contrastive.seed);
      c.ok = true;
      c.mean_r2 = rep.mean_r2;
      c.mean_rmse = rep.mean_rmse;
      if (last) {
        c.alignment = last->alignment;
        c.uniformity = last->uniformity;
      }
      if (setup.out_dir) {
        std::ostringstream os;
        write_fold_report(os, rep);
        write_file(*setup.out_dir / tag / ("transfer_" + c.dataset + ".csv"),
                   os.str());
      }
      spdlog::info("sweep {} on {}: mean R2 {:.4f}", tag, c.dataset,
                   c.mean_r2);
    } catch (const std::exception &e) {
      spdlog::error("sweep {} on {}: transfer failed: {}", tag, c.dataset,
                    e.what());
      c.ok = false;
      c.verdict = "failed";
      c.error = e.what();
    }
  }
  return cells;
}

}  // namespace

SweepTable run_sweep(const SweepSetup &setup, const Vocabulary &vocab) {
  if (setup.grid.empty())
    throw ConfigError("sweep grid is empty");
  if (setup.datasets.empty())
    throw ConfigError("sweep needs at least one property dataset");

  std::vector<AugmentationSpec> grid;
  const bool has_baseline =
      std::any_of(setup.grid.begin(), setup.grid.end(),
                  [](const AugmentationSpec &s) { return s.is_baseline(); });
  if (!has_baseline)
    grid.push_back(AugmentationSpec { ExplicitMode::kOriginal,
                                      ExplicitMode::kOriginal, false,
                                      setup.grid.front().ratio });
  for (const auto &s: setup.grid)
    if (std::find(grid.begin(), grid.end(), s) == grid.end())
      grid.push_back(s);

  std::vector<std::vector<SweepCell>> results(grid.size());
  std::atomic<std::size_t> next { 0 };
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++)
      results[i] = run_spec(setup, grid[i], vocab);
  };
  const int n_threads =
      std::max(1, std::min<int>(setup.workers, static_cast<int>(grid.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back(worker);
    for (auto &t: pool)
      t.join();
  }

  SweepTable table;
  std::size_t base_idx = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i].is_baseline())
      base_idx = i;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t d = 0; d < results[i].size(); ++d) {
      SweepCell c = results[i][d];
      const SweepCell &base = results[base_idx][d];
      if (c.ok) {
        if (i == base_idx) {
          c.verdict = "baseline";
        } else if (!base.ok) {
          c.verdict = "no-baseline";
        } else {
          c.delta_r2 = c.mean_r2 - base.mean_r2;
          c.verdict = c.delta_r2 > 0 ? "improved"
                      : c.delta_r2 < 0 ? "degraded"
                                       : "tied";
        }
      }
      table.cells.push_back(std::move(c));
    }
  }
  return table;
}

}  // namespace polycl
