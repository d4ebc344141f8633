#include "helpers.hpp"

#include "spatialbias/config.hpp"
#include "spatialbias/experiments.hpp"
#include "spatialbias/io.hpp"

using namespace spatialbias;

namespace {

PowerStudySpec small_spec() {
  PowerStudySpec s;
  s.n_mc = 50;
  s.permutations = 100;
  s.bootstrap = 100;
  s.seed = 17;
  StudyCell iu;
  iu.base.scenario = Scenario::AssocByAutocorr;
  iu.parameter = SweepParameter::Rho;
  iu.values = {0.0, 0.8};
  StudyCell esf;
  esf.id = "esf";
  esf.base.scenario = Scenario::EsfContinuous;
  esf.base.rho = 0.8;
  esf.parameter = SweepParameter::Rho2;
  esf.values = {0.8};
  s.cells = {iu, esf};
  return s;
}

}  // namespace

TEST(PowerStudy, RowsAndWorkerInvariance) {
  const auto w = testutil::grid_weights(6);
  auto spec = small_spec();
  const auto t1 = run_power_study(spec, w);
  spec.workers = 3;
  const auto t3 = run_power_study(spec, w);
  EXPECT_EQ(t1.rows, t3.rows);
  ASSERT_EQ(t1.rows.size(), 2u * 2u + 2u);
  EXPECT_EQ(t1.rows[0].scenario, "assoc_by_autocorr");
  EXPECT_EQ(t1.rows[0].test, "T1");
  EXPECT_EQ(t1.rows[4].test, "unadjusted");
  EXPECT_EQ(t1.rows[5].test, "esf_bic");
  EXPECT_GT(t1.rate("assoc_by_autocorr", 0.8, "T1"), t1.rate("assoc_by_autocorr", 0.0, "T1"));
  EXPECT_ERROR_CODE(t1.rate("assoc_by_autocorr", 0.5, "T1"), InvalidArgument);
  for (const auto& r : t1.rows) {
    EXPECT_NEAR(r.std_error, std::sqrt(r.rate * (1 - r.rate) / 50.0), 1e-15);
    EXPECT_EQ(r.n_mc, 50u);
  }
}

TEST(PowerStudy, FailedCellDoesNotAbort) {
  auto spec = small_spec();
  spec.cells[0].values = {1.5, 0.0};
  const auto t = run_power_study(spec, testutil::grid_weights(6));
  EXPECT_EQ(t.rows[0].test, kFailedTest);
  EXPECT_TRUE(std::isnan(t.rows[0].rate));
  EXPECT_EQ(t.rows[1].test, "T1");
}

TEST(PowerStudy, CsvRoundTripAndPlotData) {
  auto spec = small_spec();
  spec.cells[0].values = {1.5, 0.3};
  const auto t = run_power_study(spec, testutil::grid_weights(6));
  const auto dir = testutil::temp_dir("power");
  emit_power_csv(t, (dir / "p.csv").string());
  const auto back = read_power_csv((dir / "p.csv").string());
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (std::isnan(t.rows[i].rate)) {
      EXPECT_TRUE(std::isnan(back.rows[i].rate));
      EXPECT_EQ(back.rows[i].test, t.rows[i].test);
    } else {
      EXPECT_EQ(back.rows[i], t.rows[i]);
    }
  }
  EXPECT_EQ(read_csv((dir / "p.csv").string()).header,
            (std::vector<std::string>{"scenario", "param", "test", "rate", "n_mc", "stderr"}));
  emit_plot_data(t, (dir / "plot.csv").string());
  const auto plot = read_csv((dir / "plot.csv").string());
  EXPECT_EQ(plot.rows.size(), t.rows.size() - 1);
  EXPECT_EQ(plot.rows[0][0], "assoc_by_autocorr/T1");
  EXPECT_ERROR_CODE(emit_power_csv(t, (dir / "no" / "such" / "p.csv").string()), IOError);
}

TEST(PowerStudy, Validation) {
  auto spec = small_spec();
  spec.n_mc = 10;
  EXPECT_ERROR_CODE(validate(spec), InvalidArgument);
  spec = small_spec();
  spec.delta = 0;
  EXPECT_ERROR_CODE(validate(spec), InvalidDelta);
  spec = small_spec();
  spec.cells.clear();
  EXPECT_ERROR_CODE(validate(spec), InvalidArgument);
}

TEST(PowerStudy, ConfigFile) {
  const auto dir = testutil::temp_dir("power_cfg");
  testutil::spit(dir / "study.yaml",
                 "seed: 3\nn_mc: 60\npermutations: 120\ncriteria: [BIC, AIC]\n"
                 "geometry: {rows: 5, cols: 4, kernel: 'inverse_distance:2'}\n"
                 "cells:\n"
                 "  - {scenario: assoc_and_autocorr_a_only, sweep: rho, values: [0, 0.5], beta: 2}\n"
                 "  - {id: disc, scenario: esf_beta_both, sweep: beta, values: [0, 1], rho: 0.9}\n");
  const auto cfg = load_power_study_config((dir / "study.yaml").string());
  EXPECT_EQ(cfg.spec.n_mc, 60u);
  EXPECT_EQ(cfg.spec.criteria.size(), 2u);
  EXPECT_EQ(cfg.spec.cells[1].id, "disc");
  EXPECT_EQ(cfg.spec.cells[0].base.beta, 2.0);
  EXPECT_EQ(cfg.spec.cells[1].parameter, SweepParameter::Beta);
  EXPECT_EQ(build_study_weights(cfg.geometry).n(), 20);

  testutil::spit(dir / "bad.yaml", "cells:\n  - {scenario: nope, sweep: rho, values: [0]}\n");
  EXPECT_ERROR_CODE(load_power_study_config((dir / "bad.yaml").string()), InvalidArgument);
  testutil::spit(dir / "nocells.yaml", "seed: 1\n");
  EXPECT_ERROR_CODE(load_power_study_config((dir / "nocells.yaml").string()), SchemaError);

  GeometrySpec g;
  g.locations_path = (dir / "locs.csv").string();
  g.kernel = Kernel::k_hop(1);
  EXPECT_ERROR_CODE(build_study_weights(g), MissingAdjacency);
}
