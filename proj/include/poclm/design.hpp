#pragma once

#include "poclm/table.hpp"
#include "poclm/types.hpp"

namespace poclm {

// Dummy-encodes a raw table against a model spec.  Categorical predictors
// become 0/1 columns for levels 2..p_s (level 1 is the baseline, all zeros);
// numeric predictors pass through.  Column order follows ParameterLayout.
// Throws DataError on unknown labels, missing columns or non-finite values.
DesignData encode_design(const RawTable& table, const ModelSpec& spec);

}  // namespace poclm
