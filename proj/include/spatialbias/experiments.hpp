#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spatialbias/esf.hpp"
#include "spatialbias/moran.hpp"
#include "spatialbias/synthgen.hpp"
#include "spatialbias/weights.hpp"

namespace spatialbias {

enum class SweepParameter { Rho, Rho2, Beta };

std::string_view to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view text);

/// One curve family: a scenario template swept over one parameter.
struct StudyCell {
  std::string id;
  ScenarioSpec base;
  SweepParameter parameter = SweepParameter::Rho;
  std::vector<double> values;
};

struct PowerStudySpec {
  std::vector<StudyCell> cells;
  std::size_t n_mc = 200;
  std::size_t permutations = 200;
  std::size_t bootstrap = 200;
  double alpha = 0.05;
  double delta = 1.0;
  std::vector<Criterion> criteria{Criterion::BIC};
  std::uint64_t seed = 0;
  unsigned workers = 1;
  ESFOptions esf;
};

void validate(const PowerStudySpec& spec);

struct PowerRow {
  std::string scenario;
  double param = 0.0;
  std::string test;
  double rate = 0.0;
  std::size_t n_mc = 0;
  double std_error = 0.0;

  bool operator==(const PowerRow&) const = default;
};

struct PowerTable {
  std::vector<PowerRow> rows;

  /// Rate of (scenario, param, test); throws InvalidArgument when absent.
  double rate(std::string_view scenario, double param, std::string_view test) const;
};

inline constexpr std::string_view kFailedTest = "FAILED";

/// Runs every (cell, value) of the grid with n_mc replicates. IU scenarios
/// report tests "T1" and "T2"; ESF scenarios report "unadjusted" and
/// "esf_bic"/"esf_aic". Replicate seeds are derived from the master seed and
/// the (cell, value, replicate) indices, so the table does not depend on
/// the worker count. A replicate error turns the whole cell into one
/// FAILED row.
PowerTable run_power_study(const PowerStudySpec& spec, const WeightMatrix& w);

void emit_power_csv(const PowerTable& table, const std::string& path);
PowerTable read_power_csv(const std::string& path);

/// curve,x,y,stderr per (scenario, test) curve, for external plotting.
void emit_plot_data(const PowerTable& table, const std::string& path);

}  // namespace spatialbias
