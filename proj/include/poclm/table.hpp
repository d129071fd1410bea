#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace poclm {

// Column-typed in-memory table; the interchange format between CSV input,
// the simulator and the design encoder.
struct RawTable {
  using Column = std::variant<std::vector<std::string>, std::vector<double>>;

  std::vector<std::string> names;
  std::vector<Column> columns;

  int n_rows() const;
  int n_cols() const { return static_cast<int>(columns.size()); }
  int column_index(const std::string& name) const;  // -1 when missing
  const std::vector<std::string>& text_column(int idx) const;
  const std::vector<double>& numeric_column(int idx) const;

  void add_text_column(std::string name, std::vector<std::string> values);
  void add_numeric_column(std::string name, std::vector<double> values);
};

// Comma-separated, header row required, UTF-8, double-quoted fields allowed
// (with "" as an escaped quote).  All columns are read as text; numeric
// conversion happens when a column is declared numeric.
RawTable read_csv(std::istream& in);
RawTable read_csv_file(const std::string& path);

void write_csv(std::ostream& out, const RawTable& table);
void write_csv_file(const std::string& path, const RawTable& table);

}  // namespace poclm
