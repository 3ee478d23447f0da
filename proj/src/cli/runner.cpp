#include "gnnpool/cli/runner.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include "gnnpool/errors.hpp"
#include "gnnpool/train/cross_validation.hpp"

namespace gnnpool {
namespace {

template <typename Kind, typename Parse>
std::vector<Kind> parse_list(const std::string& text, std::initializer_list<Kind> all, Parse parse) {
  if (text == "all") return all;
  return {parse(text)};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (datasets.empty() || convs.empty() || pools.empty())
    throw ArgumentError("nothing to run: empty dataset, conv or pool selection");
  if (folds < 2) throw ArgumentError("--folds must be at least 2");
  if (jobs < 1) throw ArgumentError("--jobs must be at least 1");
}

std::vector<DatasetName> parse_dataset_list(const std::string& text) {
  return parse_list(text,
                    {DatasetName::mutag, DatasetName::proteins, DatasetName::imdb_binary,
                     DatasetName::reddit_binary},
                    [](const std::string& s) { return parse_dataset(s); });
}

std::vector<ConvKind> parse_conv_list(const std::string& text) {
  return parse_list(text, {ConvKind::gcn, ConvKind::sage, ConvKind::tagcn},
                    [](const std::string& s) { return parse_conv(s); });
}

std::vector<PoolKind> parse_pool_list(const std::string& text) {
  return parse_list(text,
                    {PoolKind::none, PoolKind::sortpool, PoolKind::diffpool, PoolKind::topk,
                     PoolKind::sagpool},
                    [](const std::string& s) { return parse_pool(s); });
}

GridPreset parse_grid(const std::string& text) {
  if (text == "small") return GridPreset::small;
  if (text == "wide") return GridPreset::wide;
  throw ArgumentError("unknown grid '" + text + "' (valid: small, wide)");
}

RunSummary run_experiments(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);
  const auto csv_path = config.out_dir / "results.csv";
  const auto svg_path = config.out_dir / "results.svg";
  std::vector<ResultRow> table;
  if (std::filesystem::exists(csv_path)) table = read_csv(csv_path);

  RunSummary summary;
  for (DatasetName name : config.datasets) {
    const std::string dataset_name(dataset_cli_name(name));
    Dataset dataset;
    try {
      dataset = load_tu_dataset(DatasetSpec::under(config.data_dir, name));
    } catch (const std::exception& e) {
      for (ConvKind conv : config.convs)
        for (PoolKind pool : config.pools)
          summary.failures.push_back(dataset_name + "/" + std::string(conv_name(conv)) + "/" +
                                     std::string(pool_name(pool)) + ": " + e.what());
      log << "error: " << dataset_name << ": " << e.what() << '\n';
      continue;
    }

    for (ConvKind conv : config.convs) {
      for (PoolKind pool : config.pools) {
        const std::string cell =
            dataset_name + "/" + std::string(conv_name(conv)) + "/" + std::string(pool_name(pool));
        try {
          HyperParams base;
          base.seed = config.seed;
          if (config.epochs) base.epochs = *config.epochs;
          const auto grid = make_grid(config.grid, conv, pool, base);
          CVOptions options;
          options.folds = config.folds;
          options.seed = config.seed;
          options.jobs = config.jobs;
          const auto start = std::chrono::steady_clock::now();
          const CVReport report = cross_validate(grid, dataset, options);
          const double seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

          ResultRow row;
          row.dataset = dataset_name;
          row.conv = conv_name(conv);
          row.pool = pool_name(pool);
          row.seed = config.seed;
          for (const FoldReport& f : report.folds) row.folds.push_back(f.test_accuracy);
          row.mean = report.mean;
          row.std = report.std;
          row.seconds = seconds;
          row.winner_hp = report.winner.to_string();
          upsert_rows(table, std::span<const ResultRow>(&row, 1));
          emit_csv(table, csv_path);
          summary.rows.push_back(row);
          log << cell << ": " << fixed(row.mean, 4) << " +- " << fixed(*row.std, 4) << " ("
              << fixed(seconds, 1) << " s, " << grid.size() << " grid points)\n";
        } catch (const std::exception& e) {
          summary.failures.push_back(cell + ": " + e.what());
          log << "error: " << cell << ": " << e.what() << '\n';
        }
      }
    }
  }
  if (!table.empty()) emit_bar_chart(table, svg_path);
  return summary;
}

void report_results(const std::filesystem::path& out_dir, std::ostream& out) {
  const auto rows = read_csv(out_dir / "results.csv");
  if (rows.empty()) throw ArgumentError("no rows in " + (out_dir / "results.csv").string());
  out << "dataset        conv   pool      seed  mean    std\n";
  for (const ResultRow& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %-6s %-9s %-5llu %.4f  %s\n", r.dataset.c_str(),
                  r.conv.c_str(), r.pool.c_str(), static_cast<unsigned long long>(r.seed), r.mean,
                  r.std ? format_fixed4(*r.std).c_str() : "-");
    out << line;
  }
  emit_bar_chart(rows, out_dir / "results.svg");
  out << "chart: " << (out_dir / "results.svg").string() << '\n';
}

bool print_dataset_stats(const std::vector<DatasetName>& datasets,
                         const std::filesystem::path& data_dir, std::ostream& out) {
  bool ok = true;
  for (DatasetName name : datasets) {
    const DatasetStats ref = reference_stats(name);
    out << dataset_cli_name(name) << '\n';
    try {
      const Dataset ds = load_tu_dataset(DatasetSpec::under(data_dir, name));
      const DatasetSummary s = compute_dataset_stats(ds);
      const StatsComparison c = compare_stats(s, ref);
      out << "  graphs   " << s.graphs << " (reference " << ref.graphs << ")\n";
      out << "  classes  " << s.classes << " (reference " << ref.classes << ")\n";
      out << "  nodes    " << fixed(s.avg_nodes, 2) << " (reference " << fixed(ref.avg_nodes, 2)
          << ", rel. error " << fixed(c.nodes_rel_error, 4) << ")\n";
      out << "  edges    " << fixed(s.avg_undirected_edges, 2) << " undirected, "
          << fixed(s.avg_directed_edges, 2) << " directed (reference " << fixed(ref.avg_edges, 2)
          << ", closest " << c.edge_convention << ", rel. error " << fixed(c.edges_rel_error, 4)
          << ")\n";
      out << "  features " << ds.feature_width << " (" << feature_source_name(ds.provenance) << ")\n";
    } catch (const std::exception& e) {
      out << "  unavailable: " << e.what() << '\n';
      ok = false;
    }
  }
  return ok;
}

}  // namespace gnnpool
