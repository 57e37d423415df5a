#include "hsnli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hsnli/error.hpp"
#include "hsnli/io.hpp"
#include "json.hpp"

namespace hsnli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string compact_variant(std::string_view v) {
  std::string out;
  for (char c : v) {
    if (c != ' ' && c != '\t') out += c;
  }
  return out;
}

std::string index_key(std::string_view variant, std::string_view dataset, std::size_t n) {
  return compact_variant(variant) + "|" + std::string(dataset) + "|" + std::to_string(n);
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::optional<double> average(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

struct Layout {
  std::vector<std::string> rows;
  std::vector<DiffColumn> columns;
};

Layout layout_of(std::span<const ResultEntry> entries) {
  Layout layout;
  std::vector<std::string> datasets;
  std::map<std::string, std::vector<std::size_t>> ns;
  for (const auto& e : entries) {
    if (std::find(layout.rows.begin(), layout.rows.end(), e.variant) == layout.rows.end()) {
      layout.rows.push_back(e.variant);
    }
    if (std::find(datasets.begin(), datasets.end(), e.dataset) == datasets.end()) {
      datasets.push_back(e.dataset);
    }
    auto& list = ns[e.dataset];
    if (std::find(list.begin(), list.end(), e.n) == list.end()) list.push_back(e.n);
  }
  for (const auto& d : datasets) {
    auto list = ns[d];
    std::sort(list.begin(), list.end());
    for (std::size_t n : list) layout.columns.push_back({d, n});
  }
  return layout;
}

std::string column_name(const DiffColumn& c) { return c.dataset + "/" + std::to_string(c.n); }

}  // namespace

ReferenceTable ReferenceTable::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

ReferenceTable ReferenceTable::parse(std::string_view csv) {
  ReferenceTable table;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto fields = split_csv(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!header_seen) {
      const std::vector<std::string> expected = {"table", "variant", "dataset", "n", "macro_f1"};
      if (fields != expected) {
        throw Error(ErrorKind::parse, where + "expected header table,variant,dataset,n,macro_f1");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) throw Error(ErrorKind::parse, where + "expected 5 fields");
    ResultEntry entry;
    entry.variant = fields[1];
    entry.dataset = fields[2];
    try {
      std::size_t used = 0;
      entry.n = std::stoul(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("n");
      entry.value = std::stod(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument("value");
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::parse, where + "bad number");
    }
    if (!(entry.value >= 0.0 && entry.value <= 1.0)) {
      throw Error(ErrorKind::validation,
                  where + "macro_f1 " + fields[4] + " is outside [0,1]; values must be fractions");
    }
    const std::string key = index_key(entry.variant, entry.dataset, entry.n);
    if (!table.index_.emplace(key, entry.value).second) {
      throw Error(ErrorKind::validation, where + "duplicate entry " + key);
    }
    table.entries_.push_back(std::move(entry));
  }
  if (!header_seen) throw Error(ErrorKind::parse, "empty reference table");
  return table;
}

std::optional<double> ReferenceTable::find(std::string_view variant, std::string_view dataset,
                                           std::size_t n) const {
  const auto it = index_.find(index_key(variant, dataset, n));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DiffTable compare_to_reference(std::span<const ResultEntry> ours,
                               const ReferenceTable& reference) {
  const Layout layout = layout_of(ours);
  DiffTable table;
  table.rows = layout.rows;
  table.columns = layout.columns;
  table.diffs.assign(table.rows.size(),
                     std::vector<std::optional<double>>(table.columns.size()));
  for (const auto& e : ours) {
    if (!(e.value >= 0.0 && e.value <= 1.0)) {
      throw Error(ErrorKind::validation, "result for " + e.variant + " " + e.dataset + "/" +
                                             std::to_string(e.n) + " is outside [0,1]");
    }
    const auto r = std::find(table.rows.begin(), table.rows.end(), e.variant) - table.rows.begin();
    const auto c = std::find_if(table.columns.begin(), table.columns.end(),
                                [&](const DiffColumn& col) {
                                  return col.dataset == e.dataset && col.n == e.n;
                                }) -
                   table.columns.begin();
    const auto ref = reference.find(e.variant, e.dataset, e.n);
    if (!ref) {
      table.warnings.push_back("no reference value for " + e.variant + " " + e.dataset + "/" +
                               std::to_string(e.n));
      continue;
    }
    table.diffs[r][c] = e.value - *ref;
  }

  std::vector<double> all;
  for (const auto& row : table.diffs) {
    std::vector<double> present;
    for (const auto& d : row) {
      if (d) present.push_back(*d);
    }
    all.insert(all.end(), present.begin(), present.end());
    table.row_avg.push_back(average(present));
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::vector<double> present;
    for (const auto& row : table.diffs) {
      if (row[c]) present.push_back(*row[c]);
    }
    table.col_avg.push_back(average(present));
  }
  table.overall_avg = average(all);
  return table;
}

std::string format_fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  std::string out = buf;
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::string diff_table_csv(const DiffTable& table, int precision) {
  auto cell = [&](const std::optional<double>& v) {
    return v ? format_fixed(*v, precision) : std::string{};
  };
  std::ostringstream out;
  out << "variant";
  for (const auto& c : table.columns) out << ',' << csv_field(column_name(c));
  out << ",Avg. Diff.\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << csv_field(table.rows[r]);
    for (const auto& d : table.diffs[r]) out << ',' << cell(d);
    out << ',' << cell(table.row_avg[r]) << '\n';
  }
  out << "Avg. Diff.";
  for (const auto& d : table.col_avg) out << ',' << cell(d);
  out << ',' << cell(table.overall_avg) << '\n';
  return out.str();
}

std::string results_table_csv(std::span<const ResultEntry> entries, int precision) {
  const Layout layout = layout_of(entries);
  std::ostringstream out;
  out << "variant";
  for (const auto& c : layout.columns) out << ',' << csv_field(column_name(c));
  out << '\n';
  for (const auto& row : layout.rows) {
    out << csv_field(row);
    for (const auto& c : layout.columns) {
      out << ',';
      for (const auto& e : entries) {
        if (e.variant == row && e.dataset == c.dataset && e.n == c.n) {
          out << format_fixed(e.value, precision);
          break;
        }
      }
    }
    out << '\n';
  }
  return out.str();
}

std::vector<ResultEntry> read_results_jsonl(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<ResultEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.value("ok", false)) continue;
      entries.push_back({obj.at("variant").get<std::string>(),
                         obj.at("dataset").get<std::string>(), obj.at("n").get<std::size_t>(),
                         obj.at("macro_f1").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::parse,
                  path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

}  // namespace hsnli
