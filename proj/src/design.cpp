#include "poclm/design.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>

#include "poclm/errors.hpp"

namespace poclm {

namespace {

std::unordered_map<std::string, int> level_index(const std::vector<std::string>& levels) {
  std::unordered_map<std::string, int> idx;
  for (size_t i = 0; i < levels.size(); ++i) idx[levels[i]] = static_cast<int>(i) + 1;
  return idx;
}

double parse_double(const std::string& s, const std::string& col, int row) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b != e && (*b == ' ' || *b == '\t')) ++b;
  while (e != b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(b, e, value);
  if (ec != std::errc() || ptr != e)
    throw DataError("column " + col + ", row " + std::to_string(row + 1) + ": not a number: '" + s + "'");
  if (!std::isfinite(value))
    throw DataError("column " + col + ", row " + std::to_string(row + 1) + ": non-finite value");
  return value;
}

}  // namespace

DesignData encode_design(const RawTable& table, const ModelSpec& spec) {
  spec.validate();
  const int n = table.n_rows();
  if (n < 1) throw DataError("empty dataset");

  DesignData data;
  data.layout = ParameterLayout::from_spec(spec);
  data.n = n;
  data.k = spec.k;
  data.z.resize(n);
  data.X = Eigen::MatrixXd::Zero(n, data.layout.m);

  int rc = table.column_index(spec.response_name);
  if (rc < 0) throw DataError("response column '" + spec.response_name + "' not found");
  {
    const auto& col = table.text_column(rc);
    auto idx = level_index(spec.response_levels);
    for (int i = 0; i < n; ++i) {
      auto it = idx.find(col[static_cast<size_t>(i)]);
      if (it == idx.end())
        throw DataError("response row " + std::to_string(i + 1) + ": undeclared category '" +
                        col[static_cast<size_t>(i)] + "'");
      data.z[i] = it->second;
    }
  }

  for (const auto& block : data.layout.blocks) {
    const auto& pred = spec.predictors[static_cast<size_t>(block.predictor)];
    int tc = table.column_index(pred.name);
    if (tc < 0) throw DataError("predictor column '" + pred.name + "' not found");
    if (pred.role == Role::Numeric) {
      if (std::holds_alternative<std::vector<double>>(table.columns[static_cast<size_t>(tc)])) {
        const auto& col = table.numeric_column(tc);
        for (int i = 0; i < n; ++i) {
          if (!std::isfinite(col[static_cast<size_t>(i)]))
            throw DataError("column " + pred.name + ", row " + std::to_string(i + 1) + ": non-finite value");
          data.X(i, block.beta_start) = col[static_cast<size_t>(i)];
        }
      } else {
        const auto& col = table.text_column(tc);
        for (int i = 0; i < n; ++i)
          data.X(i, block.beta_start) = parse_double(col[static_cast<size_t>(i)], pred.name, i);
      }
      continue;
    }
    const auto& col = table.text_column(tc);
    auto idx = level_index(pred.levels);
    for (int i = 0; i < n; ++i) {
      auto it = idx.find(col[static_cast<size_t>(i)]);
      if (it == idx.end())
        throw DataError("column " + pred.name + ", row " + std::to_string(i + 1) + ": undeclared level '" +
                        col[static_cast<size_t>(i)] + "'");
      if (it->second > 1) data.X(i, block.beta_start + it->second - 2) = 1.0;
    }
  }

  data.validate();
  return data;
}

}  // namespace poclm
