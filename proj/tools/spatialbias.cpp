// Command-line front end: audit, single tests, simulation and power studies.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spatialbias/adjusted_tests.hpp"
#include "spatialbias/audit.hpp"
#include "spatialbias/config.hpp"
#include "spatialbias/error.hpp"
#include "spatialbias/experiments.hpp"
#include "spatialbias/io.hpp"
#include "spatialbias/iu_test.hpp"
#include "spatialbias/moran.hpp"
#include "spatialbias/synthgen.hpp"

namespace sb = spatialbias;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct DataArgs {
  std::string locations;
  std::string features;
  std::string adjacency;
  std::string kernel = "inverse_distance";
  std::string normalization = "spectral_radius";
  std::uint64_t seed = 0;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--locations", d.locations, "CSV with id,x,y")->required();
  cmd->add_option("--features", d.features, "CSV with an id column and one column per feature")->required();
  cmd->add_option("--adjacency", d.adjacency, "square 0/1 CSV for k_hop and custom kernels");
  cmd->add_option("--kernel", d.kernel, "inverse_distance[:p], exponential:V, k_hop:k or custom");
  cmd->add_option("--normalization", d.normalization, "none, spectral_radius or row_standardized");
  cmd->add_option("--seed", d.seed, "random seed");
}

struct Loaded {
  sb::IngestedDataset data;
  std::optional<sb::WeightMatrix> w;
};

Loaded load(const DataArgs& d, const std::vector<sb::FeatureRole>& roles) {
  Loaded out{sb::ingest_dataset(d.locations, d.features, roles), std::nullopt};
  const sb::Kernel kernel = sb::parse_kernel(d.kernel);
  const auto norm = sb::parse_normalization(d.normalization);
  if (kernel.type == sb::KernelType::KHop || kernel.type == sb::KernelType::Custom) {
    sb::require(!d.adjacency.empty(), sb::ErrorCode::MissingAdjacency,
                "kernel " + kernel.describe() + " needs --adjacency");
    out.w = sb::normalize_weights(
        sb::build_weights(sb::read_adjacency_csv(d.adjacency, out.data.locations), kernel), norm);
  } else {
    out.w = sb::normalize_weights(sb::build_weights(std::span<const sb::Location>(out.data.locations), kernel),
                                  norm);
  }
  return out;
}

sb::Feature feature_of(const Loaded& l, const std::string& name) {
  return sb::Feature::of_kind(l.data.kinds.at(name), l.data.columns.at(name));
}

sb::FeatureKind kind_of(const std::string& text) { return sb::parse_feature_kind(text); }

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

int run_audit(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& output,
              const std::string& format, std::optional<unsigned> workers) {
  // Flag problems are usage errors, so check them before touching the config.
  const auto format_override =
      format.empty() ? std::nullopt : std::optional<sb::ReportFormat>(sb::parse_report_format(format));
  sb::AuditConfig config = sb::load_audit_config(config_path);
  if (seed) config.seed = *seed;
  if (!output.empty()) config.output_path = output;
  if (format_override) config.format = *format_override;
  if (workers) config.workers = *workers;
  sb::require(!config.output_path.empty(), sb::ErrorCode::UsageError, "no output path (set 'output' or --output)");
  const sb::AuditReport report = sb::run_audit(config);
  sb::emit_report(report, config.format, config.output_path);
  return report.any_failure() ? kExitFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial bias auditing: Moran's I, IU tests and ESF-adjusted bias tests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sb::kVersion));

  // audit
  auto* audit = app.add_subcommand("audit", "run the full audit pipeline from a config file");
  std::string audit_config, audit_output, audit_format;
  std::optional<std::uint64_t> audit_seed;
  std::optional<unsigned> audit_workers;
  audit->add_option("--config", audit_config, "YAML audit config")->required();
  audit->add_option("--seed", audit_seed, "overrides the config seed");
  audit->add_option("--output", audit_output, "overrides the config output path");
  audit->add_option("--format", audit_format, "json or csv_bundle");
  audit->add_option("--workers", audit_workers, "worker threads");

  // moran
  auto* moran = app.add_subcommand("moran", "standardized Moran's I and permutation p-value of one feature");
  DataArgs moran_data;
  std::string moran_feature, moran_kind = "continuous";
  std::size_t moran_perms = 999;
  add_data_options(moran, moran_data);
  moran->add_option("--feature", moran_feature, "feature column")->required();
  moran->add_option("--kind", moran_kind, "continuous or binary");
  moran->add_option("--permutations", moran_perms, "permutations for the p-value");

  // iu-test
  auto* iu = app.add_subcommand("iu-test", "IU tests of association by autocorrelation");
  DataArgs iu_data;
  std::string iu_y, iu_a, iu_y_kind = "continuous", iu_a_kind = "continuous";
  sb::IUTestOptions iu_opts;
  add_data_options(iu, iu_data);
  iu->add_option("--outcome", iu_y, "outcome column")->required();
  iu->add_option("--sensitive", iu_a, "sensitive column")->required();
  iu->add_option("--outcome-kind", iu_y_kind, "continuous or binary");
  iu->add_option("--sensitive-kind", iu_a_kind, "continuous or binary");
  iu->add_option("--delta", iu_opts.delta, "T2 margin");
  iu->add_option("--permutations", iu_opts.permutations, "shared permutations");
  iu->add_option("--alpha", iu_opts.alpha, "level");

  // esf-adjust
  auto* esf = app.add_subcommand("esf-adjust", "unadjusted and ESF-adjusted bias test of a feature pair");
  DataArgs esf_data;
  std::string esf_y, esf_a, esf_y_kind = "continuous", esf_a_kind = "continuous", esf_criterion = "BIC";
  sb::AdjustedTestOptions esf_opts;
  add_data_options(esf, esf_data);
  esf->add_option("--first", esf_y, "first column (outcome)")->required();
  esf->add_option("--second", esf_a, "second column (sensitive)")->required();
  esf->add_option("--first-kind", esf_y_kind, "continuous or binary");
  esf->add_option("--second-kind", esf_a_kind, "continuous or binary");
  esf->add_option("--criterion", esf_criterion, "AIC or BIC");
  esf->add_option("--bootstrap", esf_opts.bootstrap, "bootstrap replicates (binary cases)");
  esf->add_option("--permutations", esf_opts.permutations, "permutations for unadjusted DI/KS");
  esf->add_option("--pool-size", esf_opts.esf.pool_size, "candidate eigenvectors (0: min(n, 200))");

  // simulate
  auto* sim = app.add_subcommand("simulate", "write a synthetic scenario dataset as CSV");
  sb::ScenarioSpec sim_spec;
  std::string sim_scenario, sim_out, sim_kernel = "inverse_distance:2";
  int sim_rows = 20, sim_cols = 20;
  sim->add_option("--scenario", sim_scenario, "scenario name")->required();
  sim->add_option("--rho", sim_spec.rho, "autocorrelation");
  sim->add_option("--rho2", sim_spec.rho2, "second autocorrelation (esf scenarios)");
  sim->add_option("--beta", sim_spec.beta, "direct association strength");
  sim->add_flag("--discretize", sim_spec.discretize, "threshold outputs at 0");
  sim->add_option("--rows", sim_rows, "grid rows");
  sim->add_option("--cols", sim_cols, "grid columns");
  sim->add_option("--kernel", sim_kernel, "weight kernel on the grid");
  sim->add_option("--seed", sim_spec.seed, "random seed");
  sim->add_option("--out-dir", sim_out, "directory for locations.csv and features.csv")->required();

  // power-study
  auto* power = app.add_subcommand("power-study", "Monte Carlo rejection rates over a scenario grid");
  std::string power_spec, power_output, power_plot;
  std::optional<std::uint64_t> power_seed;
  std::optional<unsigned> power_workers;
  power->add_option("--spec", power_spec, "YAML study spec")->required();
  power->add_option("--output", power_output, "power table CSV")->required();
  power->add_option("--plot-data", power_plot, "optional curve,x,y,stderr CSV");
  power->add_option("--seed", power_seed, "overrides the spec seed");
  power->add_option("--workers", power_workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*audit) return run_audit(audit_config, audit_seed, audit_output, audit_format, audit_workers);

    if (*moran) {
      const auto l = load(moran_data, {{moran_feature, kind_of(moran_kind)}});
      const sb::Feature f = feature_of(l, moran_feature);
      const auto res = sb::standardized_morans_i(f, *l.w);
      const double p = sb::moran_permutation_pvalue(f, *l.w, moran_perms, moran_data.seed);
      print({{"feature", moran_feature}, {"kernel", l.w->kernel().describe()}, {"raw_i", res.raw_i},
             {"z", res.z}, {"mean_null", res.mean_null}, {"var_null", res.var_null}, {"p_value", p},
             {"permutations", moran_perms}, {"seed", moran_data.seed}});
      return kExitOk;
    }

    if (*iu) {
      const auto l = load(iu_data, {{iu_y, kind_of(iu_y_kind)}, {iu_a, kind_of(iu_a_kind)}});
      iu_opts.seed = iu_data.seed;
      const auto r = sb::iu_permutation_test(feature_of(l, iu_y), feature_of(l, iu_a), *l.w, iu_opts);
      print({{"outcome", iu_y}, {"sensitive", iu_a}, {"i_y", r.i_y}, {"i_a", r.i_a}, {"t1", r.t1}, {"t2", r.t2},
             {"delta", r.delta}, {"p1", r.p1}, {"p2", r.p2}, {"reject1", r.reject1}, {"reject2", r.reject2},
             {"alpha", r.alpha}, {"permutations", r.permutations}, {"seed", r.seed}});
      return kExitOk;
    }

    if (*esf) {
      const auto l = load(esf_data, {{esf_y, kind_of(esf_y_kind)}, {esf_a, kind_of(esf_a_kind)}});
      esf_opts.seed = esf_data.seed;
      esf_opts.esf.criterion = sb::parse_criterion(esf_criterion);
      const auto basis = sb::spectral_decompose(*l.w);
      const sb::Feature y = feature_of(l, esf_y), a = feature_of(l, esf_a);
      const auto r = sb::adjusted_test(y, a, basis, sb::no_covariates(y.size()), esf_opts);
      json selected = json::array();
      for (const auto& fit : r.fits) selected.push_back(fit.selected);
      print({{"case", std::string(sb::to_string(r.test_case))},
             {"metric", std::string(sb::to_string(r.metric))},
             {"metric_unadjusted", std::isfinite(r.metric_unadjusted) ? json(r.metric_unadjusted)
                                                                      : json(sb::format_double(r.metric_unadjusted))},
             {"metric_adjusted", r.metric_adjusted ? json(*r.metric_adjusted) : json(nullptr)},
             {"p_unadjusted", r.p_unadjusted}, {"p_adjusted", r.p_adjusted},
             {"criterion", esf_criterion}, {"selected", selected}, {"bootstrap", r.bootstrap},
             {"resamples", r.resamples}, {"seed", r.seed}});
      return kExitOk;
    }

    if (*sim) {
      sim_spec.scenario = sb::parse_scenario(sim_scenario);
      const auto locations = sb::grid_locations(sim_rows, sim_cols);
      sb::GeometrySpec geometry;
      geometry.rows = sim_rows;
      geometry.cols = sim_cols;
      geometry.kernel = sb::parse_kernel(sim_kernel);
      const auto data = sb::generate(sim_spec, sb::build_study_weights(geometry));
      std::filesystem::create_directories(sim_out);
      sb::write_locations_csv((std::filesystem::path(sim_out) / "locations.csv").string(), locations);
      std::vector<std::string> header{"id", "y", "a"};
      if (data.x) header.push_back("x");
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < locations.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        std::vector<std::string> row{locations[i].id, sb::format_double(data.y.values()[k]),
                                     sb::format_double(data.a.values()[k])};
        if (data.x) row.push_back(sb::format_double(data.x->values()[k]));
        rows.push_back(std::move(row));
      }
      sb::write_csv((std::filesystem::path(sim_out) / "features.csv").string(), header, rows);
      return kExitOk;
    }

    if (*power) {
      auto cfg = sb::load_power_study_config(power_spec);
      if (power_seed) cfg.spec.seed = *power_seed;
      if (power_workers) cfg.spec.workers = *power_workers;
      const auto table = sb::run_power_study(cfg.spec, sb::build_study_weights(cfg.geometry));
      sb::emit_power_csv(table, power_output);
      if (!power_plot.empty()) sb::emit_plot_data(table, power_plot);
      for (const auto& row : table.rows) {
        if (row.test == sb::kFailedTest) return kExitFailure;
      }
      return kExitOk;
    }
  } catch (const sb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == sb::ErrorCode::UsageError ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
