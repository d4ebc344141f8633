#pragma once

#include <string>
#include <vector>

#include "spatialbias/experiments.hpp"
#include "spatialbias/weights.hpp"

namespace spatialbias {

/// Where the study's weight matrix comes from.
struct GeometrySpec {
  int rows = 20;
  int cols = 20;
  std::string locations_path;  // overrides the grid when set
  std::string adjacency_path;  // k_hop with explicit locations
  Kernel kernel = Kernel::inverse_distance(2.0);
};

struct PowerStudyConfig {
  PowerStudySpec spec;
  GeometrySpec geometry;
};

PowerStudyConfig load_power_study_config(const std::string& path);

WeightMatrix build_study_weights(const GeometrySpec& geometry);

}  // namespace spatialbias
