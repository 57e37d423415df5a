#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hsnli {

// One macro-F1 value in the dataset x N layout of the reproduction table.
struct ResultEntry {
  std::string variant;
  std::string dataset;
  std::size_t n = 0;
  double value = 0.0;
};

class ReferenceTable {
 public:
  // CSV with header "table,variant,dataset,n,macro_f1". Values must be
  // fractions in [0,1].
  static ReferenceTable load(const std::filesystem::path& path);
  static ReferenceTable parse(std::string_view csv);

  std::optional<double> find(std::string_view variant, std::string_view dataset,
                             std::size_t n) const;
  const std::vector<ResultEntry>& entries() const { return entries_; }

 private:
  std::vector<ResultEntry> entries_;
  std::map<std::string, double, std::less<>> index_;
};

struct DiffColumn {
  std::string dataset;
  std::size_t n = 0;
};

// ours - reference per cell, with row and column averages over the cells that
// have a reference value. Cells without one stay empty.
struct DiffTable {
  std::vector<std::string> rows;
  std::vector<DiffColumn> columns;
  std::vector<std::vector<std::optional<double>>> diffs;
  std::vector<std::optional<double>> row_avg;
  std::vector<std::optional<double>> col_avg;
  std::optional<double> overall_avg;
  std::vector<std::string> warnings;

  bool empty() const { return !overall_avg.has_value(); }
};

DiffTable compare_to_reference(std::span<const ResultEntry> ours,
                               const ReferenceTable& reference);

std::string format_fixed(double value, int precision);

// Reference table layout: rows = variants, columns = dataset/N, last column and last
// row hold the averages.
std::string diff_table_csv(const DiffTable& table, int precision = 2);

// Our own values in the same layout (no averages).
std::string results_table_csv(std::span<const ResultEntry> entries, int precision = 2);

std::vector<ResultEntry> read_results_jsonl(const std::filesystem::path& path);

}  // namespace hsnli
