#include "poclm/table.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "poclm/errors.hpp"

namespace poclm {

int RawTable::n_rows() const {
  if (columns.empty()) return 0;
  return static_cast<int>(std::visit([](const auto& v) { return v.size(); }, columns.front()));
}

int RawTable::column_index(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

const std::vector<std::string>& RawTable::text_column(int idx) const {
  const auto* col = std::get_if<std::vector<std::string>>(&columns.at(static_cast<size_t>(idx)));
  if (!col) throw DataError("column " + names.at(static_cast<size_t>(idx)) + " is not text");
  return *col;
}

const std::vector<double>& RawTable::numeric_column(int idx) const {
  const auto* col = std::get_if<std::vector<double>>(&columns.at(static_cast<size_t>(idx)));
  if (!col) throw DataError("column " + names.at(static_cast<size_t>(idx)) + " is not numeric");
  return *col;
}

void RawTable::add_text_column(std::string name, std::vector<std::string> values) {
  names.push_back(std::move(name));
  columns.emplace_back(std::move(values));
}

void RawTable::add_numeric_column(std::string name, std::vector<double> values) {
  names.push_back(std::move(name));
  columns.emplace_back(std::move(values));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quote on line " + std::to_string(line_no));
  fields.push_back(std::move(field));
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

RawTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: missing header row");
  line = strip_cr(line);
  if (!line.empty() && static_cast<unsigned char>(line[0]) == 0xEF && line.size() >= 3)
    line.erase(0, 3);  // UTF-8 BOM
  RawTable table;
  table.names = split_csv_line(line, 1);
  std::vector<std::vector<std::string>> cols(table.names.size());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_no);
    if (fields.size() != table.names.size())
      throw DataError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(table.names.size()));
    for (size_t c = 0; c < fields.size(); ++c) cols[c].push_back(std::move(fields[c]));
  }
  if (!cols.empty() && cols[0].empty()) throw DataError("CSV has a header but no data rows");
  for (auto& c : cols) table.columns.emplace_back(std::move(c));
  return table;
}

RawTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_csv(in);
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s) {
  if (!needs_quoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_csv(std::ostream& out, const RawTable& table) {
  for (size_t c = 0; c < table.names.size(); ++c) {
    if (c) out << ',';
    write_field(out, table.names[c]);
  }
  out << '\n';
  int rows = table.n_rows();
  for (int r = 0; r < rows; ++r) {
    for (size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ',';
      std::visit(
          [&](const auto& col) {
            using T = std::decay_t<decltype(col)>;
            if constexpr (std::is_same_v<T, std::vector<std::string>>) {
              write_field(out, col[static_cast<size_t>(r)]);
            } else {
              out << format_double(col[static_cast<size_t>(r)]);
            }
          },
          table.columns[c]);
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const RawTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_csv(out, table);
}

}  // namespace poclm
