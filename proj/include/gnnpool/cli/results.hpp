#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gnnpool {

struct ResultRow {
  std::string dataset;
  std::string conv;
  std::string pool;
  std::uint64_t seed = 0;
  std::vector<double> folds;
  double mean = 0.0;
  std::optional<double> std;
  double seconds = 0.0;
  std::string winner_hp;

  // dataset, conv, pool, seed
  bool same_cell(const ResultRow& other) const;
  // Throws ValidationError unless mean lies within the fold range.
  void validate() const;
};

// Fixed-point with 4 decimals.
std::string format_fixed4(double value);

// Header and one line per row. Fold columns run fold0..fold{F-1} with F the
// largest fold count (at least 5); shorter rows leave trailing cells empty.
std::string format_csv(std::span<const ResultRow> rows);
std::vector<ResultRow> parse_csv(const std::string& text);

// Throws IoError when the file cannot be written or read.
void emit_csv(std::span<const ResultRow> rows, const std::filesystem::path& path);
std::vector<ResultRow> read_csv(const std::filesystem::path& path);

// Replaces rows of the same cell in place, appends the rest.
void upsert_rows(std::vector<ResultRow>& table, std::span<const ResultRow> rows);

// One panel per pool kind, one bar group per dataset, one bar per conv kind
// with a +-1 std whisker. Repeated cells (several seeds) are averaged.
std::string render_bar_chart(std::span<const ResultRow> rows);
void emit_bar_chart(std::span<const ResultRow> rows, const std::filesystem::path& path);

}  // namespace gnnpool
