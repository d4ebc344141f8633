#include "spatialbias/config.hpp"

#include "spatialbias/error.hpp"
#include "spatialbias/io.hpp"
#include "yaml_util.hpp"

namespace spatialbias {

using detail::get;
using detail::get_required;

PowerStudyConfig load_power_study_config(const std::string& path) {
  const auto doc = detail::load_yaml(path);
  const YAML::Node& root = doc.root;
  detail::reject_unknown_keys(root,
                              {"seed", "n_mc", "permutations", "bootstrap", "alpha", "delta", "criteria", "workers",
                               "pool_size", "lambda_grid_size", "geometry", "cells"},
                              path);
  PowerStudyConfig cfg;
  PowerStudySpec& spec = cfg.spec;
  spec.seed = get<std::uint64_t>(root, "seed", 0);
  spec.n_mc = get<std::size_t>(root, "n_mc", spec.n_mc);
  spec.permutations = get<std::size_t>(root, "permutations", spec.permutations);
  spec.bootstrap = get<std::size_t>(root, "bootstrap", spec.bootstrap);
  spec.alpha = get<double>(root, "alpha", spec.alpha);
  spec.delta = get<double>(root, "delta", spec.delta);
  spec.workers = get<unsigned>(root, "workers", spec.workers);
  spec.esf.pool_size = get<Eigen::Index>(root, "pool_size", 0);
  spec.esf.lambda_grid_size = get<int>(root, "lambda_grid_size", spec.esf.lambda_grid_size);
  if (root["criteria"]) {
    spec.criteria.clear();
    for (const auto& c : get<std::vector<std::string>>(root, "criteria", {})) spec.criteria.push_back(parse_criterion(c));
  }

  if (const YAML::Node g = root["geometry"]) {
    detail::reject_unknown_keys(g, {"rows", "cols", "kernel", "locations", "adjacency"}, path + ": geometry");
    cfg.geometry.rows = get<int>(g, "rows", cfg.geometry.rows);
    cfg.geometry.cols = get<int>(g, "cols", cfg.geometry.cols);
    if (g["kernel"]) cfg.geometry.kernel = parse_kernel(get<std::string>(g, "kernel", ""));
    cfg.geometry.locations_path = detail::resolve_path(doc.dir, get<std::string>(g, "locations", ""));
    cfg.geometry.adjacency_path = detail::resolve_path(doc.dir, get<std::string>(g, "adjacency", ""));
  }

  const YAML::Node cells = root["cells"];
  require(cells && cells.IsSequence(), ErrorCode::SchemaError, path + ": 'cells' must be a list");
  for (const auto& node : cells) {
    detail::reject_unknown_keys(node, {"id", "scenario", "sweep", "values", "rho", "rho2", "beta", "discretize"},
                                path + ": cell");
    StudyCell cell;
    cell.base.scenario = parse_scenario(get_required<std::string>(node, "scenario"));
    cell.id = get<std::string>(node, "id", std::string(to_string(cell.base.scenario)));
    cell.parameter = parse_sweep_parameter(get_required<std::string>(node, "sweep"));
    cell.values = get_required<std::vector<double>>(node, "values");
    cell.base.rho = get<double>(node, "rho", 0.0);
    cell.base.rho2 = get<double>(node, "rho2", 0.0);
    cell.base.beta = get<double>(node, "beta", 5.0);
    cell.base.discretize = get<bool>(node, "discretize", false);
    spec.cells.push_back(std::move(cell));
  }
  validate(spec);
  return cfg;
}

WeightMatrix build_study_weights(const GeometrySpec& geometry) {
  const bool needs_adjacency =
      geometry.kernel.type == KernelType::KHop || geometry.kernel.type == KernelType::Custom;
  require(!needs_adjacency || geometry.locations_path.empty() || !geometry.adjacency_path.empty(),
          ErrorCode::MissingAdjacency, "kernel " + geometry.kernel.describe() + " needs an adjacency file");
  std::vector<Location> locations;
  if (geometry.locations_path.empty()) {
    require(geometry.rows >= 1 && geometry.cols >= 1 && geometry.rows * geometry.cols >= 3,
            ErrorCode::InvalidArgument, "grid must have at least 3 cells");
    locations = grid_locations(geometry.rows, geometry.cols);
  } else {
    locations = read_locations_csv(geometry.locations_path);
  }
  if (needs_adjacency) {
    const Eigen::MatrixXd adjacency = geometry.adjacency_path.empty()
                                          ? grid_adjacency(geometry.rows, geometry.cols)
                                          : read_adjacency_csv(geometry.adjacency_path, locations);
    return build_weights(adjacency, geometry.kernel);
  }
  return build_weights(std::span<const Location>(locations), geometry.kernel);
}

}  // namespace spatialbias
