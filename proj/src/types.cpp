#include "poclm/types.hpp"

#include <algorithm>
#include <set>

#include "poclm/errors.hpp"

namespace poclm {

const char* to_string(Role r) {
  switch (r) {
    case Role::Ordinal: return "ordinal";
    case Role::Nominal: return "nominal";
    case Role::Numeric: return "numeric";
  }
  return "?";
}

const char* to_string(ConstraintRegime c) {
  switch (c) {
    case ConstraintRegime::Unconstrained: return "unconstrained";
    case ConstraintRegime::EitherMonotone: return "either";
    case ConstraintRegime::Isotonic: return "isotonic";
    case ConstraintRegime::Antitonic: return "antitonic";
  }
  return "?";
}

const char* to_string(Direction d) { return d == Direction::Iso ? "iso" : "anti"; }

const char* to_string(BlockClass c) {
  switch (c) {
    case BlockClass::Iso: return "iso";
    case BlockClass::Anti: return "anti";
    case BlockClass::Both: return "both";
    case BlockClass::Neither: return "neither";
  }
  return "?";
}

PredictorSpec PredictorSpec::ordinal(std::string name, std::vector<std::string> levels,
                                     ConstraintRegime regime) {
  PredictorSpec s;
  s.name = std::move(name);
  s.role = Role::Ordinal;
  s.levels = std::move(levels);
  s.regime = regime;
  return s;
}

PredictorSpec PredictorSpec::ordinal(std::string name, int n_categories, ConstraintRegime regime) {
  return ordinal(std::move(name), ModelSpec::numbered_levels(n_categories), regime);
}

PredictorSpec PredictorSpec::nominal(std::string name, std::vector<std::string> levels) {
  PredictorSpec s;
  s.name = std::move(name);
  s.role = Role::Nominal;
  s.levels = std::move(levels);
  return s;
}

PredictorSpec PredictorSpec::nominal(std::string name, int n_levels) {
  return nominal(std::move(name), ModelSpec::numbered_levels(n_levels));
}

PredictorSpec PredictorSpec::numeric(std::string name) {
  PredictorSpec s;
  s.name = std::move(name);
  s.role = Role::Numeric;
  return s;
}

std::vector<std::string> ModelSpec::numbered_levels(int n) {
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) out.push_back(std::to_string(i));
  return out;
}

ModelSpec ModelSpec::make(int k, std::vector<PredictorSpec> predictors) {
  ModelSpec spec;
  spec.k = k;
  spec.response_levels = numbered_levels(k);
  spec.predictors = std::move(predictors);
  spec.validate();
  return spec;
}

void ModelSpec::validate() const {
  if (k < 2) throw ConfigError("response must have at least 2 categories, got k=" + std::to_string(k));
  if (static_cast<int>(response_levels.size()) != k)
    throw ConfigError("response level list must have exactly k=" + std::to_string(k) + " entries");
  std::set<std::string> names;
  names.insert(response_name);
  for (const auto& pred : predictors) {
    if (pred.name.empty()) throw ConfigError("predictor with empty name");
    if (!names.insert(pred.name).second) throw ConfigError("duplicate column name: " + pred.name);
    switch (pred.role) {
      case Role::Ordinal:
        if (pred.n_levels() < 2)
          throw ConfigError("ordinal predictor " + pred.name + " needs at least 2 categories");
        break;
      case Role::Nominal:
        if (pred.n_levels() < 2)
          throw ConfigError("nominal predictor " + pred.name + " needs at least 2 levels");
        if (pred.regime != ConstraintRegime::Unconstrained)
          throw ConfigError("monotonicity regime is only meaningful for ordinal predictors: " + pred.name);
        break;
      case Role::Numeric:
        if (!pred.levels.empty()) throw ConfigError("numeric predictor " + pred.name + " cannot declare levels");
        if (pred.regime != ConstraintRegime::Unconstrained)
          throw ConfigError("monotonicity regime is only meaningful for ordinal predictors: " + pred.name);
        break;
    }
    if (pred.role != Role::Numeric) {
      std::set<std::string> lv(pred.levels.begin(), pred.levels.end());
      if (lv.size() != pred.levels.size()) throw ConfigError("duplicate level in predictor " + pred.name);
    }
  }
  std::set<std::string> rl(response_levels.begin(), response_levels.end());
  if (rl.size() != response_levels.size()) throw ConfigError("duplicate response level");
}

int ModelSpec::n_ordinal() const {
  int t = 0;
  for (const auto& pred : predictors) t += pred.role == Role::Ordinal ? 1 : 0;
  return t;
}

int ModelSpec::n_either_monotone() const {
  int t = 0;
  for (const auto& pred : predictors)
    t += (pred.role == Role::Ordinal && pred.regime == ConstraintRegime::EitherMonotone) ? 1 : 0;
  return t;
}

int ModelSpec::total_dimension() const {
  int p = k - 1;
  for (const auto& pred : predictors) p += pred.block_size();
  return p;
}

ParameterLayout ParameterLayout::from_spec(const ModelSpec& spec) {
  spec.validate();
  ParameterLayout layout;
  layout.k = spec.k;
  auto add = [&](int predictor_index) {
    const auto& pred = spec.predictors[static_cast<size_t>(predictor_index)];
    Block b;
    b.predictor = predictor_index;
    b.beta_start = layout.m;
    b.size = pred.block_size();
    b.role = pred.role;
    b.regime = pred.regime;
    b.name = pred.name;
    layout.m += b.size;
    if (pred.role == Role::Ordinal) layout.ordinal_blocks.push_back(static_cast<int>(layout.blocks.size()));
    layout.blocks.push_back(std::move(b));
  };
  for (int i = 0; i < static_cast<int>(spec.predictors.size()); ++i)
    if (spec.predictors[static_cast<size_t>(i)].role == Role::Ordinal) add(i);
  for (int i = 0; i < static_cast<int>(spec.predictors.size()); ++i)
    if (spec.predictors[static_cast<size_t>(i)].role == Role::Nominal) add(i);
  for (int i = 0; i < static_cast<int>(spec.predictors.size()); ++i)
    if (spec.predictors[static_cast<size_t>(i)].role == Role::Numeric) add(i);
  layout.p = layout.k - 1 + layout.m;
  return layout;
}

const ParameterLayout::Block& ParameterLayout::block_for_predictor(int predictor_index) const {
  for (const auto& b : blocks)
    if (b.predictor == predictor_index) return b;
  throw ConfigError("no layout block for predictor index " + std::to_string(predictor_index));
}

bool ParameterVector::alpha_strictly_increasing() const {
  for (int j = 1; j < alpha.size(); ++j)
    if (!(alpha[j - 1] < alpha[j])) return false;
  return true;
}

int ParameterVector::dimension() const {
  int p = static_cast<int>(alpha.size() + nonord.size());
  for (const auto& b : ord) p += static_cast<int>(b.size());
  return p;
}

Eigen::VectorXd ParameterVector::to_flat(const ParameterLayout& layout) const {
  if (static_cast<int>(alpha.size()) != layout.n_alpha())
    throw ConfigError("alpha length does not match layout");
  if (static_cast<int>(ord.size()) != static_cast<int>(layout.ordinal_blocks.size()))
    throw ConfigError("ordinal block count does not match layout");
  Eigen::VectorXd gamma(layout.p);
  gamma.head(layout.n_alpha()) = alpha;
  int non_ordinal_offset = 0;
  for (size_t oi = 0; oi < layout.ordinal_blocks.size(); ++oi) {
    const auto& b = layout.blocks[static_cast<size_t>(layout.ordinal_blocks[oi])];
    if (static_cast<int>(ord[oi].size()) != b.size)
      throw ConfigError("ordinal block " + b.name + " has wrong length");
    gamma.segment(layout.gamma_index(b.beta_start), b.size) = ord[oi];
  }
  for (const auto& b : layout.blocks) {
    if (b.role == Role::Ordinal) continue;
    if (non_ordinal_offset + b.size > nonord.size())
      throw ConfigError("nonord vector too short for layout");
    gamma.segment(layout.gamma_index(b.beta_start), b.size) = nonord.segment(non_ordinal_offset, b.size);
    non_ordinal_offset += b.size;
  }
  if (non_ordinal_offset != nonord.size()) throw ConfigError("nonord vector too long for layout");
  return gamma;
}

ParameterVector ParameterVector::from_flat(const ParameterLayout& layout, const Eigen::VectorXd& gamma) {
  if (static_cast<int>(gamma.size()) != layout.p)
    throw ConfigError("flat parameter vector has wrong length");
  ParameterVector pv;
  pv.alpha = gamma.head(layout.n_alpha());
  int nonord_len = 0;
  for (const auto& b : layout.blocks)
    if (b.role != Role::Ordinal) nonord_len += b.size;
  pv.nonord.resize(nonord_len);
  int non_ordinal_offset = 0;
  for (int bi : layout.ordinal_blocks) {
    const auto& b = layout.blocks[static_cast<size_t>(bi)];
    pv.ord.push_back(gamma.segment(layout.gamma_index(b.beta_start), b.size));
  }
  for (const auto& b : layout.blocks) {
    if (b.role == Role::Ordinal) continue;
    pv.nonord.segment(non_ordinal_offset, b.size) = gamma.segment(layout.gamma_index(b.beta_start), b.size);
    non_ordinal_offset += b.size;
  }
  return pv;
}

ParameterVector ParameterVector::zeros(const ParameterLayout& layout) {
  return from_flat(layout, Eigen::VectorXd::Zero(layout.p));
}

void DesignData::validate() const {
  if (n < 1) throw DataError("empty dataset");
  if (z.size() != n || X.rows() != n) throw DataError("design matrix row count mismatch");
  if (X.cols() != layout.m) throw DataError("design matrix column count mismatch");
  for (int i = 0; i < n; ++i)
    if (z[i] < 1 || z[i] > k)
      throw DataError("response outside 1.." + std::to_string(k) + " at row " + std::to_string(i + 1));
  for (const auto& b : layout.blocks) {
    if (b.role == Role::Numeric) {
      for (int i = 0; i < n; ++i)
        if (!std::isfinite(X(i, b.beta_start))) throw DataError("non-finite value in column " + b.name);
      continue;
    }
    for (int i = 0; i < n; ++i) {
      int ones = 0;
      for (int c = 0; c < b.size; ++c) {
        double v = X(i, b.beta_start + c);
        if (v != 0.0 && v != 1.0) throw DataError("dummy column of " + b.name + " holds a non-0/1 value");
        ones += v == 1.0 ? 1 : 0;
      }
      if (ones > 1) throw DataError("more than one active dummy for " + b.name + " at row " + std::to_string(i + 1));
    }
  }
}

std::vector<int> DesignData::category_counts() const {
  std::vector<int> counts(static_cast<size_t>(k), 0);
  for (int i = 0; i < n; ++i) counts[static_cast<size_t>(z[i] - 1)]++;
  return counts;
}

}  // namespace poclm
