#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "spatialbias/adjusted_tests.hpp"
#include "spatialbias/error.hpp"
#include "spatialbias/experiments.hpp"
#include "spatialbias/io.hpp"
#include "spatialbias/iu_test.hpp"
#include "spatialbias/parallel.hpp"
#include "spatialbias/random.hpp"

namespace spatialbias {

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Rho: return "rho";
    case SweepParameter::Rho2: return "rho2";
    case SweepParameter::Beta: return "beta";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view text) {
  if (text == "rho") return SweepParameter::Rho;
  if (text == "rho2") return SweepParameter::Rho2;
  if (text == "beta") return SweepParameter::Beta;
  fail(ErrorCode::InvalidArgument, "unknown sweep parameter '" + std::string(text) + "'");
}

void validate(const PowerStudySpec& spec) {
  require(!spec.cells.empty(), ErrorCode::InvalidArgument, "power study has no cells");
  require(spec.n_mc >= 50, ErrorCode::InvalidArgument, "n_mc must be >= 50");
  require(spec.alpha > 0.0 && spec.alpha < 1.0, ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  require(spec.permutations >= 100, ErrorCode::InvalidArgument, "permutations must be >= 100");
  require(spec.bootstrap >= 100, ErrorCode::InvalidArgument, "bootstrap must be >= 100");
  require(spec.delta > 0.0, ErrorCode::InvalidDelta, "delta must be > 0");
  require(!spec.criteria.empty(), ErrorCode::InvalidArgument, "at least one ESF criterion is needed");
  for (const auto& cell : spec.cells) {
    require(!cell.values.empty(), ErrorCode::InvalidArgument, "cell '" + cell.id + "' has no sweep values");
  }
}

double PowerTable::rate(std::string_view scenario, double param, std::string_view test) const {
  for (const auto& row : rows) {
    if (row.scenario == scenario && row.param == param && row.test == test) return row.rate;
  }
  fail(ErrorCode::InvalidArgument, "no power row for " + std::string(scenario) + " at " + format_double(param) +
                                       " / " + std::string(test));
}

namespace {

bool uses_iu_test(Scenario s) {
  return s == Scenario::AssocByAutocorr || s == Scenario::AssocAndAutocorrAOnly ||
         s == Scenario::AssocAndAutocorrBoth || s == Scenario::Proxy;
}

std::vector<std::string> test_names(const PowerStudySpec& spec, Scenario s) {
  if (uses_iu_test(s)) return {"T1", "T2"};
  std::vector<std::string> names{"unadjusted"};
  for (Criterion c : spec.criteria) names.push_back(c == Criterion::BIC ? "esf_bic" : "esf_aic");
  return names;
}

ScenarioSpec apply_sweep(ScenarioSpec spec, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::Rho: spec.rho = value; break;
    case SweepParameter::Rho2: spec.rho2 = value; break;
    case SweepParameter::Beta: spec.beta = value; break;
  }
  return spec;
}

struct Replicate {
  std::vector<char> rejected;
  bool failed = false;
};

}  // namespace

PowerTable run_power_study(const PowerStudySpec& spec, const WeightMatrix& w) {
  validate(spec);
  const ScenarioGenerator generator(w);
  const MoranEvaluator evaluator(generator.weights());
  std::optional<EigenBasis> basis;
  for (const auto& cell : spec.cells) {
    if (!uses_iu_test(cell.base.scenario) && !basis) basis = spectral_decompose(generator.weights());
  }

  PowerTable table;
  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    const StudyCell& cell = spec.cells[c];
    const std::string name = cell.id.empty() ? std::string(to_string(cell.base.scenario)) : cell.id;
    const auto tests = test_names(spec, cell.base.scenario);
    for (std::size_t v = 0; v < cell.values.size(); ++v) {
      const ScenarioSpec base = apply_sweep(cell.base, cell.parameter, cell.values[v]);
      const std::uint64_t cell_seed = derive_seed(spec.seed, c, v);
      std::vector<Replicate> reps(spec.n_mc);

      parallel_for(spec.n_mc, spec.workers, [&](std::size_t r) {
        Replicate& out = reps[r];
        try {
          const std::uint64_t rep_seed = derive_seed(cell_seed, r);
          ScenarioSpec s = base;
          s.seed = derive_seed(rep_seed, 0);
          const SyntheticDataset data = generator.generate(s);
          if (uses_iu_test(s.scenario)) {
            IUTestOptions opts;
            opts.delta = spec.delta;
            opts.permutations = spec.permutations;
            opts.alpha = spec.alpha;
            opts.seed = derive_seed(rep_seed, 1);
            const auto res = iu_permutation_test(data.y, data.a, evaluator, opts);
            out.rejected = {res.reject1, res.reject2};
            return;
          }
          AdjustedTestOptions opts;
          opts.esf = spec.esf;
          opts.bootstrap = spec.bootstrap;
          opts.permutations = spec.permutations;
          opts.seed = derive_seed(rep_seed, 1);
          for (std::size_t k = 0; k < spec.criteria.size(); ++k) {
            opts.esf.criterion = spec.criteria[k];
            const auto res = adjusted_test(data.y, data.a, *basis, no_covariates(data.y.size()), opts);
            if (k == 0) out.rejected.push_back(res.p_unadjusted <= spec.alpha);
            out.rejected.push_back(res.p_adjusted <= spec.alpha);
          }
        } catch (const std::exception&) {
          out.failed = true;
        }
      });

      const bool failed = std::any_of(reps.begin(), reps.end(), [](const Replicate& r) { return r.failed; });
      if (failed) {
        table.rows.push_back({name, cell.values[v], std::string(kFailedTest),
                              std::numeric_limits<double>::quiet_NaN(), spec.n_mc,
                              std::numeric_limits<double>::quiet_NaN()});
        continue;
      }
      for (std::size_t t = 0; t < tests.size(); ++t) {
        std::size_t hits = 0;
        for (const auto& rep : reps) hits += rep.rejected[t] ? 1 : 0;
        const double rate = static_cast<double>(hits) / static_cast<double>(spec.n_mc);
        const double se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(spec.n_mc));
        table.rows.push_back({name, cell.values[v], tests[t], rate, spec.n_mc, se});
      }
    }
  }
  return table;
}

void emit_power_csv(const PowerTable& table, const std::string& path) {
  require(!table.rows.empty(), ErrorCode::InvalidArgument, "power table is empty");
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table.rows) {
    rows.push_back({r.scenario, format_double(r.param), r.test, format_double(r.rate), std::to_string(r.n_mc),
                    format_double(r.std_error)});
  }
  write_csv(path, {"scenario", "param", "test", "rate", "n_mc", "stderr"}, rows);
}

PowerTable read_power_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const std::size_t scenario = csv.column("scenario"), param = csv.column("param"), test = csv.column("test"),
                    rate = csv.column("rate"), n_mc = csv.column("n_mc"), se = csv.column("stderr");
  PowerTable table;
  for (const auto& row : csv.rows) {
    const double n = parse_double(row[n_mc], "n_mc");
    require(n >= 0 && n == std::floor(n), ErrorCode::TypeError, "n_mc must be a non-negative integer");
    table.rows.push_back({row[scenario], parse_double(row[param], "param"), row[test],
                          parse_double(row[rate], "rate"), static_cast<std::size_t>(n),
                          parse_double(row[se], "stderr")});
  }
  return table;
}

void emit_plot_data(const PowerTable& table, const std::string& path) {
  require(!table.rows.empty(), ErrorCode::InvalidArgument, "power table is empty");
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table.rows) {
    if (r.test == kFailedTest) continue;
    rows.push_back({r.scenario + "/" + r.test, format_double(r.param), format_double(r.rate),
                    format_double(r.std_error)});
  }
  write_csv(path, {"curve", "x", "y", "stderr"}, rows);
}

}  // namespace spatialbias
