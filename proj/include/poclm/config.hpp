#pragma once

#include <cstdint>
#include <string>

#include "poclm/inference.hpp"
#include "poclm/simulation.hpp"

namespace poclm {

// Settings shared by the fit/region/test commands, read from a JSON config
// file; command-line flags override individual fields.
struct RunConfig {
  std::string data_path;
  ModelSpec spec;
  FitOptions fit;
  double level = 0.95;
  int df = 0;  // 0: free parameter count of the target block
  RegionKind kind = RegionKind::CCR;
  QuantileFamily family = QuantileFamily::PlainChiSq;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string initial_csv;  // estimates.csv from a previous fit, used as starting values
};

RunConfig parse_run_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& path);

}  // namespace poclm
