#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gnnpool/cli/runner.hpp"
#include "gnnpool/errors.hpp"
#include "gnnpool/runtime.hpp"

#ifndef GNNPOOL_DEFAULT_DATA_DIR
#define GNNPOOL_DEFAULT_DATA_DIR "data"
#endif

namespace {

constexpr int kUsageError = 2;

struct Flags {
  std::string dataset = "mutag";
  std::string conv = "all";
  std::string pool = "all";
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::string out = "results";
  std::string grid = "small";
  std::size_t jobs = 1;
  std::size_t epochs = 0;
  std::string data_dir = GNNPOOL_DEFAULT_DATA_DIR;
};

void add_data_dir(CLI::App* cmd, Flags& f) {
  cmd->add_option("--data-dir", f.data_dir, "Root holding one directory per dataset")
      ->envname("GNN_DATA_DIR")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  gnnpool::tune_allocator();
  CLI::App app{"Graph classification with graph convolutions and pooling"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  Flags f;

  CLI::App* run = app.add_subcommand("run", "Cross-validate (dataset, conv, pool) cells");
  run->add_option("--dataset", f.dataset, "mutag|proteins|imdb-binary|reddit-binary|all")
      ->capture_default_str();
  run->add_option("--conv", f.conv, "gcn|sage|tagcn|all")->capture_default_str();
  run->add_option("--pool", f.pool, "none|sortpool|diffpool|topk|sagpool|all")
      ->capture_default_str();
  run->add_option("--seed", f.seed, "Seed for splits and initialization")->capture_default_str();
  run->add_option("--folds", f.folds, "Cross-validation folds")->capture_default_str();
  run->add_option("--out", f.out, "Output directory for results.csv and results.svg")
      ->capture_default_str();
  run->add_option("--grid", f.grid, "small|wide")->capture_default_str();
  run->add_option("--jobs", f.jobs, "Worker threads")->capture_default_str();
  run->add_option("--epochs", f.epochs, "Override the epoch budget (0 keeps the default)");
  add_data_dir(run, f);

  CLI::App* report = app.add_subcommand("report", "Print results.csv and redraw the chart");
  report->add_option("--out", f.out, "Directory holding results.csv")->capture_default_str();

  CLI::App* stats = app.add_subcommand("stats", "Dataset statistics next to reference values");
  stats->add_option("--dataset", f.dataset, "mutag|proteins|imdb-binary|reddit-binary|all")
      ->capture_default_str();
  add_data_dir(stats, f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      gnnpool::ExperimentConfig config;
      try {
        config.datasets = gnnpool::parse_dataset_list(f.dataset);
        config.convs = gnnpool::parse_conv_list(f.conv);
        config.pools = gnnpool::parse_pool_list(f.pool);
        config.grid = gnnpool::parse_grid(f.grid);
        config.seed = f.seed;
        config.folds = f.folds;
        config.out_dir = f.out;
        config.data_dir = f.data_dir;
        config.jobs = f.jobs;
        if (f.epochs > 0) config.epochs = f.epochs;
        config.validate();
      } catch (const gnnpool::ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
      }
      const auto summary = gnnpool::run_experiments(config, std::cerr);
      std::cout << summary.rows.size() << " cell(s) written to "
                << (config.out_dir / "results.csv").string() << '\n';
      if (!summary.ok()) {
        for (const auto& line : summary.failures) std::cerr << "failed: " << line << '\n';
        return EXIT_FAILURE;
      }
      return EXIT_SUCCESS;
    }
    if (*report) {
      gnnpool::report_results(f.out, std::cout);
      return EXIT_SUCCESS;
    }
    std::vector<gnnpool::DatasetName> datasets;
    try {
      datasets = gnnpool::parse_dataset_list(f.dataset);
    } catch (const gnnpool::ArgumentError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kUsageError;
    }
    return gnnpool::print_dataset_stats(datasets, f.data_dir, std::cout) ? EXIT_SUCCESS
                                                                          : EXIT_FAILURE;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}
