#include "gnnpool/cli/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gnnpool/data/tu_dataset.hpp"
#include "gnnpool/errors.hpp"
#include "gnnpool/nn/conv.hpp"
#include "gnnpool/nn/pool.hpp"

namespace gnnpool {
namespace {

constexpr std::size_t kMinFoldColumns = 5;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_number(const std::string& s, const char* column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw FormatError(std::string("results csv: bad value '") + s + "' in column " + column);
  return v;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Position of a name within the canonical order, unknown names last.
template <typename Names>
std::size_t rank_of(const std::string& name, const Names& names) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return names.size();
}

}  // namespace

bool ResultRow::same_cell(const ResultRow& o) const {
  return dataset == o.dataset && conv == o.conv && pool == o.pool && seed == o.seed;
}

void ResultRow::validate() const {
  if (folds.empty()) return;
  const auto [lo, hi] = std::minmax_element(folds.begin(), folds.end());
  // Values are compared at the 4-decimal precision they are stored with.
  if (mean < *lo - 5e-5 || mean > *hi + 5e-5) {
    throw ValidationError("result row " + dataset + "/" + conv + "/" + pool + ": mean " +
                          format_fixed4(mean) + " outside fold range [" + format_fixed4(*lo) +
                          ", " + format_fixed4(*hi) + "]");
  }
}

std::string format_fixed4(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

std::string format_csv(std::span<const ResultRow> rows) {
  std::size_t fold_cols = kMinFoldColumns;
  for (const ResultRow& r : rows) fold_cols = std::max(fold_cols, r.folds.size());
  std::ostringstream out;
  out << "dataset,conv,pool,seed";
  for (std::size_t f = 0; f < fold_cols; ++f) out << ",fold" << f;
  out << ",mean,std,seconds,winner_hp\n";
  for (const ResultRow& r : rows) {
    out << csv_field(r.dataset) << ',' << csv_field(r.conv) << ',' << csv_field(r.pool) << ','
        << r.seed;
    for (std::size_t f = 0; f < fold_cols; ++f) {
      out << ',';
      if (f < r.folds.size()) out << format_fixed4(r.folds[f]);
    }
    out << ',' << format_fixed4(r.mean) << ',';
    if (r.std) out << format_fixed4(*r.std);
    out << ',' << format_fixed4(r.seconds) << ',' << csv_field(r.winner_hp) << '\n';
  }
  return out.str();
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("results csv: missing header");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"dataset", "conv", "pool", "seed", "mean", "std", "seconds", "winner_hp"})
    if (!col.count(required)) throw FormatError(std::string("results csv: missing column ") + required);
  std::size_t fold_cols = 0;
  while (col.count("fold" + std::to_string(fold_cols))) ++fold_cols;

  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw FormatError("results csv line " + std::to_string(line_no) + ": " +
                        std::to_string(f.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    ResultRow r;
    r.dataset = f[col["dataset"]];
    r.conv = f[col["conv"]];
    r.pool = f[col["pool"]];
    r.seed = static_cast<std::uint64_t>(parse_number(f[col["seed"]], "seed"));
    for (std::size_t k = 0; k < fold_cols; ++k) {
      const std::string& cell = f[col["fold" + std::to_string(k)]];
      if (cell.empty()) break;
      r.folds.push_back(parse_number(cell, "fold"));
    }
    r.mean = parse_number(f[col["mean"]], "mean");
    if (!f[col["std"]].empty()) r.std = parse_number(f[col["std"]], "std");
    r.seconds = parse_number(f[col["seconds"]], "seconds");
    r.winner_hp = f[col["winner_hp"]];
    r.validate();
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_csv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw ArgumentError("emit_csv: no rows");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_csv(rows);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ResultRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_csv(text.str());
}

void upsert_rows(std::vector<ResultRow>& table, std::span<const ResultRow> rows) {
  for (const ResultRow& r : rows) {
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const ResultRow& t) { return t.same_cell(r); });
    if (it != table.end()) *it = r;
    else table.push_back(r);
  }
}

std::string render_bar_chart(std::span<const ResultRow> rows) {
  if (rows.empty()) throw ArgumentError("emit_bar_chart: no rows");
  std::vector<std::string> pool_order, dataset_order, conv_order;
  for (PoolKind p : {PoolKind::none, PoolKind::sortpool, PoolKind::diffpool, PoolKind::topk,
                     PoolKind::sagpool})
    pool_order.emplace_back(pool_name(p));
  for (DatasetName d : kAllDatasets) dataset_order.emplace_back(dataset_cli_name(d));
  for (ConvKind c : {ConvKind::gcn, ConvKind::sage, ConvKind::tagcn})
    conv_order.emplace_back(conv_name(c));

  const auto collect = [&](auto field, const std::vector<std::string>& order) {
    std::vector<std::string> names;
    for (const ResultRow& r : rows)
      if (std::find(names.begin(), names.end(), field(r)) == names.end()) names.push_back(field(r));
    std::stable_sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
      return rank_of(a, order) < rank_of(b, order);
    });
    return names;
  };
  const auto pools = collect([](const ResultRow& r) { return r.pool; }, pool_order);
  const auto datasets = collect([](const ResultRow& r) { return r.dataset; }, dataset_order);
  const auto convs = collect([](const ResultRow& r) { return r.conv; }, conv_order);

  struct Cell {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
    std::size_t n_std = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Cell> cells;
  for (const ResultRow& r : rows) {
    Cell& c = cells[{r.pool, r.dataset, r.conv}];
    c.mean += r.mean;
    ++c.n;
    if (r.std) {
      c.std += *r.std;
      ++c.n_std;
    }
  }

  static const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};
  const double bar_w = 16.0, bar_gap = 2.0, group_gap = 14.0;
  const double group_w = static_cast<double>(convs.size()) * (bar_w + bar_gap) - bar_gap;
  const double plot_h = 200.0, margin_left = 44.0, margin_right = 12.0;
  const double panel_top = 40.0, panel_gap = 16.0;
  const double plot_w =
      group_gap + static_cast<double>(datasets.size()) * (group_w + group_gap);
  const double panel_w = margin_left + plot_w + margin_right;
  const double width = static_cast<double>(pools.size()) * (panel_w + panel_gap) + panel_gap;
  const double height = panel_top + plot_h + 60.0 + 24.0;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < pools.size(); ++p) {
    const double x0 = panel_gap + static_cast<double>(p) * (panel_w + panel_gap);
    const double ax = x0 + margin_left;
    const double top = panel_top, bottom = panel_top + plot_h;
    svg << "  <g class=\"panel\" data-pool=\"" << xml_escape(pools[p]) << "\">\n";
    svg << "    <text x=\"" << num(ax + plot_w / 2) << "\" y=\"" << num(top - 14)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(pools[p]) << "</text>\n";
    for (int t = 0; t <= 5; ++t) {
      const double v = t / 5.0;
      const double y = bottom - v * plot_h;
      svg << "    <line class=\"tick\" x1=\"" << num(ax - 4) << "\" y1=\"" << num(y) << "\" x2=\""
          << num(ax + plot_w) << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n";
      svg << "    <text x=\"" << num(ax - 6) << "\" y=\"" << num(y + 4)
          << "\" text-anchor=\"end\">" << num(v).substr(0, 3) << "</text>\n";
    }
    svg << "    <line class=\"axis\" x1=\"" << num(ax) << "\" y1=\"" << num(top) << "\" x2=\""
        << num(ax) << "\" y2=\"" << num(bottom) << "\" stroke=\"black\"/>\n";
    svg << "    <line class=\"axis\" x1=\"" << num(ax) << "\" y1=\"" << num(bottom) << "\" x2=\""
        << num(ax + plot_w) << "\" y2=\"" << num(bottom) << "\" stroke=\"black\"/>\n";

    for (std::size_t d = 0; d < datasets.size(); ++d) {
      const double gx = ax + group_gap + static_cast<double>(d) * (group_w + group_gap);
      svg << "    <g class=\"group\" data-dataset=\"" << xml_escape(datasets[d]) << "\">\n";
      for (std::size_t c = 0; c < convs.size(); ++c) {
        const auto it = cells.find({pools[p], datasets[d], convs[c]});
        if (it == cells.end()) continue;
        const Cell& cell = it->second;
        const double mean = std::clamp(cell.mean / static_cast<double>(cell.n), 0.0, 1.0);
        const double bx = gx + static_cast<double>(c) * (bar_w + bar_gap);
        const double y = top + (1.0 - mean) * plot_h;
        svg << "      <rect class=\"bar\" data-conv=\"" << xml_escape(convs[c]) << "\" data-mean=\""
            << format_fixed4(mean) << "\" x=\"" << num(bx) << "\" y=\"" << num(y)
            << "\" width=\"" << num(bar_w) << "\" height=\"" << num(bottom - y) << "\" fill=\""
            << kColors[rank_of(convs[c], conv_order) % 5] << "\"/>\n";
        if (cell.n_std > 0) {
          const double s = cell.std / static_cast<double>(cell.n_std);
          const double y_hi = top + (1.0 - std::min(1.0, mean + s)) * plot_h;
          const double y_lo = top + (1.0 - std::max(0.0, mean - s)) * plot_h;
          const double cx = bx + bar_w / 2;
          svg << "      <path class=\"whisker\" d=\"M" << num(cx) << ' ' << num(y_lo) << " V"
              << num(y_hi) << " M" << num(cx - 4) << ' ' << num(y_hi) << " H" << num(cx + 4)
              << " M" << num(cx - 4) << ' ' << num(y_lo) << " H" << num(cx + 4)
              << "\" stroke=\"black\" fill=\"none\"/>\n";
        }
      }
      svg << "      <text x=\"" << num(gx + group_w / 2) << "\" y=\"" << num(bottom + 16)
          << "\" text-anchor=\"middle\">" << xml_escape(datasets[d]) << "</text>\n";
      svg << "    </g>\n";
    }
    svg << "  </g>\n";
  }

  svg << "  <g class=\"legend\">\n";
  double lx = panel_gap;
  const double ly = panel_top + plot_h + 40.0;
  for (const std::string& c : convs) {
    svg << "    <rect x=\"" << num(lx) << "\" y=\"" << num(ly - 10) << "\" width=\"12\" height=\"12\" fill=\""
        << kColors[rank_of(c, conv_order) % 5] << "\"/>\n";
    svg << "    <text x=\"" << num(lx + 16) << "\" y=\"" << num(ly) << "\">" << xml_escape(c)
        << "</text>\n";
    lx += 70.0;
  }
  svg << "  </g>\n</svg>\n";
  return svg.str();
}

void emit_bar_chart(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  const std::string text = render_bar_chart(rows);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace gnnpool
