#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gnnpool/cli/results.hpp"
#include "gnnpool/data/tu_dataset.hpp"
#include "gnnpool/nn/conv.hpp"
#include "gnnpool/nn/pool.hpp"
#include "gnnpool/train/hyperparams.hpp"

namespace gnnpool {

struct ExperimentConfig {
  std::vector<DatasetName> datasets{DatasetName::mutag};
  std::vector<ConvKind> convs{ConvKind::tagcn};
  std::vector<PoolKind> pools{PoolKind::none};
  GridPreset grid = GridPreset::small;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::filesystem::path out_dir = "results";
  std::filesystem::path data_dir = "data";
  std::size_t jobs = 1;
  std::optional<std::size_t> epochs;

  // Throws ArgumentError for empty selections, folds < 2 or jobs < 1.
  void validate() const;
};

// Expands "all" or a single name. Throws ArgumentError listing valid names.
std::vector<DatasetName> parse_dataset_list(const std::string& text);
std::vector<ConvKind> parse_conv_list(const std::string& text);
std::vector<PoolKind> parse_pool_list(const std::string& text);
GridPreset parse_grid(const std::string& text);

struct RunSummary {
  std::vector<ResultRow> rows;            // completed cells
  std::vector<std::string> failures;      // one line per failed cell
  bool ok() const { return failures.empty(); }
};

// For every (dataset, conv, pool) cell: load, cross-validate, upsert the row
// into out_dir/results.csv; then redraw out_dir/results.svg from the whole
// table. Progress goes to log. Cell failures are collected, not thrown.
RunSummary run_experiments(const ExperimentConfig& config, std::ostream& log);

// Prints an accuracy table from out_dir/results.csv and redraws the chart.
void report_results(const std::filesystem::path& out_dir, std::ostream& out);

// Prints computed statistics next to the reference values for each dataset.
// Returns false when a dataset could not be loaded.
bool print_dataset_stats(const std::vector<DatasetName>& datasets,
                         const std::filesystem::path& data_dir, std::ostream& out);

}  // namespace gnnpool
