#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "spatialbias/adjusted_tests.hpp"
#include "spatialbias/audit.hpp"
#include "spatialbias/error.hpp"
#include "spatialbias/io.hpp"
#include "spatialbias/iu_test.hpp"
#include "spatialbias/moran.hpp"
#include "spatialbias/parallel.hpp"
#include "spatialbias/random.hpp"
#include "yaml_util.hpp"

namespace spatialbias {

using detail::get;
using detail::get_required;
using nlohmann::json;

ReportFormat parse_report_format(const std::string& text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv_bundle" || text == "csv") return ReportFormat::CsvBundle;
  fail(ErrorCode::UsageError, "unknown report format '" + text + "' (expected json or csv_bundle)");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<FeatureRole> all_roles(const AuditConfig& c) {
  std::vector<FeatureRole> roles{c.outcome};
  roles.insert(roles.end(), c.sensitive.begin(), c.sensitive.end());
  roles.insert(roles.end(), c.covariates.begin(), c.covariates.end());
  return roles;
}

bool needs_adjacency(const Kernel& k) { return k.type == KernelType::KHop || k.type == KernelType::Custom; }

FeatureRole parse_role(const YAML::Node& node) {
  FeatureRole role;
  if (node.IsScalar()) {
    role.name = node.as<std::string>();
    return role;
  }
  require(node.IsMap(), ErrorCode::SchemaError, "feature role must be a name or {name, kind}");
  detail::reject_unknown_keys(node, {"name", "kind"}, "feature role");
  role.name = get_required<std::string>(node, "name");
  role.kind = parse_feature_kind(get<std::string>(node, "kind", "continuous"));
  return role;
}

std::vector<FeatureRole> parse_roles(const YAML::Node& node) {
  std::vector<FeatureRole> out;
  if (!node) return out;
  require(node.IsSequence(), ErrorCode::SchemaError, "feature role lists must be sequences");
  for (const auto& item : node) out.push_back(parse_role(item));
  return out;
}

std::string error_text(const std::exception& e) { return e.what(); }

}  // namespace

void AuditConfig::validate() const {
  require(!locations_path.empty() && !features_path.empty(), ErrorCode::SchemaError,
          "config needs 'locations' and 'features'");
  require(!outcome.name.empty(), ErrorCode::SchemaError, "config needs an 'outcome' feature");
  require(!sensitive.empty(), ErrorCode::SchemaError, "config needs at least one 'sensitive' feature");
  require(!kernels.empty(), ErrorCode::SchemaError, "config needs at least one kernel");
  require(esf_kernel < kernels.size(), ErrorCode::SchemaError, "esf_kernel indexes past the kernel list");
  require(delta > 0.0, ErrorCode::InvalidDelta, "delta must be > 0");
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  require(permutations >= 100, ErrorCode::InvalidArgument, "permutations must be >= 100");
  require(bootstrap >= 100, ErrorCode::InvalidArgument, "bootstrap must be >= 100");
  require(lambda_grid_size >= 10, ErrorCode::InvalidArgument, "lambda_grid_size must be >= 10");
  require(workers >= 1, ErrorCode::InvalidArgument, "workers must be >= 1");
  std::set<std::string> names;
  for (const auto& r : all_roles(*this)) {
    require(names.insert(r.name).second, ErrorCode::SchemaError, "feature '" + r.name + "' declared twice");
  }
  for (const auto& k : kernels) {
    require(!needs_adjacency(k) || !adjacency_path.empty(), ErrorCode::MissingAdjacency,
            "kernel " + k.describe() + " needs an 'adjacency' file");
  }
}

AuditConfig load_audit_config(const std::string& path) {
  const auto doc = detail::load_yaml(path);
  const YAML::Node& root = doc.root;
  detail::reject_unknown_keys(root,
                              {"locations", "features", "adjacency", "outcome", "sensitive", "covariates", "kernels",
                               "normalization", "esf_kernel", "delta", "alpha", "permutations", "bootstrap",
                               "pool_size", "lambda_grid_size", "seed", "output", "format", "workers"},
                              path);
  AuditConfig c;
  c.source_text = doc.text;
  c.locations_path = detail::resolve_path(doc.dir, get_required<std::string>(root, "locations"));
  c.features_path = detail::resolve_path(doc.dir, get_required<std::string>(root, "features"));
  c.adjacency_path = detail::resolve_path(doc.dir, get<std::string>(root, "adjacency", ""));
  require(static_cast<bool>(root["outcome"]), ErrorCode::SchemaError, "config key 'outcome' is required");
  c.outcome = parse_role(root["outcome"]);
  c.sensitive = parse_roles(root["sensitive"]);
  c.covariates = parse_roles(root["covariates"]);
  for (const auto& k : get<std::vector<std::string>>(root, "kernels", {"inverse_distance"})) {
    c.kernels.push_back(parse_kernel(k));
  }
  c.normalization = parse_normalization(get<std::string>(root, "normalization", to_string(c.normalization)));
  c.esf_kernel = get<std::size_t>(root, "esf_kernel", 0);
  c.delta = get<double>(root, "delta", c.delta);
  c.alpha = get<double>(root, "alpha", c.alpha);
  c.permutations = get<std::size_t>(root, "permutations", c.permutations);
  c.bootstrap = get<std::size_t>(root, "bootstrap", c.bootstrap);
  c.pool_size = get<Eigen::Index>(root, "pool_size", 0);
  c.lambda_grid_size = get<int>(root, "lambda_grid_size", c.lambda_grid_size);
  c.seed = get<std::uint64_t>(root, "seed", 0);
  c.output_path = detail::resolve_path(doc.dir, get<std::string>(root, "output", ""));
  if (root["format"]) c.format = parse_report_format(get<std::string>(root, "format", "json"));
  c.workers = get<unsigned>(root, "workers", 1);
  c.validate();
  return c;
}

IngestedDataset ingest_dataset(const std::string& locations_path, const std::string& features_path,
                               const std::vector<FeatureRole>& roles) {
  IngestedDataset out;
  out.locations = read_locations_csv(locations_path);
  std::sort(out.locations.begin(), out.locations.end(),
            [](const Location& a, const Location& b) { return a.id < b.id; });

  const CsvTable table = read_csv(features_path);
  const std::size_t id_col = table.column("id");
  std::vector<std::size_t> cols;
  for (const auto& r : roles) cols.push_back(table.column(r.name));

  std::map<std::string, const std::vector<std::string>*> row_of;
  for (const auto& row : table.rows) {
    require(row_of.emplace(row[id_col], &row).second, ErrorCode::JoinError,
            "duplicate id '" + row[id_col] + "' in features");
  }
  require(row_of.size() == out.locations.size(), ErrorCode::JoinError,
          "features have " + std::to_string(row_of.size()) + " rows but locations have " +
              std::to_string(out.locations.size()));

  const auto n = static_cast<Eigen::Index>(out.locations.size());
  for (std::size_t k = 0; k < roles.size(); ++k) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& id = out.locations[static_cast<std::size_t>(i)].id;
      const auto it = row_of.find(id);
      require(it != row_of.end(), ErrorCode::JoinError, "location '" + id + "' has no feature row");
      v[i] = parse_double((*it->second)[cols[k]], roles[k].name + " at " + id);
      require(roles[k].kind == FeatureKind::Continuous || v[i] == 0.0 || v[i] == 1.0, ErrorCode::TypeError,
              "binary column '" + roles[k].name + "' has value " + format_double(v[i]) + " at " + id);
    }
    out.columns[roles[k].name] = std::move(v);
    out.kinds[roles[k].name] = roles[k].kind;
  }
  return out;
}

bool AuditReport::any_failure() const {
  auto bad = [](const auto& cell) { return cell.error.has_value(); };
  return std::any_of(moran.begin(), moran.end(), bad) || std::any_of(iu.begin(), iu.end(), bad) ||
         std::any_of(pairwise.begin(), pairwise.end(), bad);
}

AuditReport run_audit(const AuditConfig& config) {
  config.validate();
  const auto roles = all_roles(config);
  const IngestedDataset data = ingest_dataset(config.locations_path, config.features_path, roles);
  const auto n = static_cast<Eigen::Index>(data.locations.size());

  AuditReport report;
  report.provenance = {fnv1a_hex(config.source_text), config.seed, kVersion};
  for (const auto& k : config.kernels) report.kernels.push_back(k.describe());
  for (const auto& r : roles) report.features.push_back(r.name);

  // Weight matrices; a kernel that cannot be built marks its cells.
  std::vector<std::optional<WeightMatrix>> weights(config.kernels.size());
  std::vector<std::string> weight_errors(config.kernels.size());
  std::optional<Eigen::MatrixXd> adjacency;
  for (std::size_t k = 0; k < config.kernels.size(); ++k) {
    try {
      const Kernel& kernel = config.kernels[k];
      if (needs_adjacency(kernel)) {
        if (!adjacency) adjacency = read_adjacency_csv(config.adjacency_path, data.locations);
        weights[k] = normalize_weights(build_weights(*adjacency, kernel), config.normalization);
      } else {
        weights[k] = normalize_weights(build_weights(std::span<const Location>(data.locations), kernel),
                                       config.normalization);
      }
    } catch (const std::exception& e) {
      weight_errors[k] = error_text(e);
    }
  }

  auto feature = [&](const FeatureRole& r) { return Feature::of_kind(data.kinds.at(r.name), data.columns.at(r.name)); };

  // Moran table: feature-major, kernel-minor.
  const std::size_t K = config.kernels.size();
  report.moran.resize(roles.size() * K);
  parallel_for(report.moran.size(), config.workers, [&](std::size_t idx) {
    const std::size_t f = idx / K, k = idx % K;
    MoranCell& cell = report.moran[idx];
    cell.feature = roles[f].name;
    cell.kernel = report.kernels[k];
    if (!weights[k]) {
      cell.error = weight_errors[k];
      return;
    }
    try {
      const Feature x = feature(roles[f]);
      const auto res = standardized_morans_i(x, *weights[k]);
      cell.raw_i = res.raw_i;
      cell.z = res.z;
      cell.p_value = moran_permutation_pvalue(x, *weights[k], config.permutations, derive_seed(config.seed, 1, idx));
    } catch (const std::exception& e) {
      cell.error = error_text(e);
    }
  });

  // IU tests: sensitive-major, kernel-minor.
  report.iu.resize(config.sensitive.size() * K);
  parallel_for(report.iu.size(), config.workers, [&](std::size_t idx) {
    const std::size_t s = idx / K, k = idx % K;
    IUCell& cell = report.iu[idx];
    cell.outcome = config.outcome.name;
    cell.sensitive = config.sensitive[s].name;
    cell.kernel = report.kernels[k];
    if (!weights[k]) {
      cell.error = weight_errors[k];
      return;
    }
    try {
      IUTestOptions opts;
      opts.delta = config.delta;
      opts.alpha = config.alpha;
      opts.permutations = config.permutations;
      opts.seed = derive_seed(config.seed, 2, idx);
      const auto res = iu_permutation_test(feature(config.outcome), feature(config.sensitive[s]), *weights[k], opts);
      cell.i_y = res.i_y;
      cell.i_a = res.i_a;
      cell.t1 = res.t1;
      cell.t2 = res.t2;
      cell.p1 = res.p1;
      cell.p2 = res.p2;
      cell.reject1 = res.reject1;
      cell.reject2 = res.reject2;
    } catch (const std::exception& e) {
      cell.error = error_text(e);
    }
  });

  // Pairwise tests over unordered pairs of outcome and sensitive features.
  std::vector<FeatureRole> tested{config.outcome};
  tested.insert(tested.end(), config.sensitive.begin(), config.sensitive.end());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < tested.size(); ++i) {
    for (std::size_t j = i + 1; j < tested.size(); ++j) pairs.emplace_back(i, j);
  }

  std::optional<EigenBasis> basis;
  std::string basis_error = weight_errors[config.esf_kernel];
  if (weights[config.esf_kernel]) {
    try {
      basis = spectral_decompose(*weights[config.esf_kernel]);
    } catch (const std::exception& e) {
      basis_error = error_text(e);
    }
  }
  Eigen::MatrixXd covariates(n, static_cast<Eigen::Index>(config.covariates.size()));
  for (std::size_t c = 0; c < config.covariates.size(); ++c) {
    covariates.col(static_cast<Eigen::Index>(c)) = data.columns.at(config.covariates[c].name);
  }

  static const char* kColumns[] = {"No ESF", "ESF-BIC", "ESF-AIC"};
  report.pairwise.resize(pairs.size() * 3);
  parallel_for(pairs.size(), config.workers, [&](std::size_t p) {
    const FeatureRole& ra = tested[pairs[p].first];
    const FeatureRole& rb = tested[pairs[p].second];
    const bool a_bin = ra.kind == FeatureKind::Binary, b_bin = rb.kind == FeatureKind::Binary;
    const std::string test_case = a_bin == b_bin ? (a_bin ? "II" : "I") : "III";
    const std::string metric = test_case == "I" ? "pearson" : test_case == "II" ? "disparate_impact" : "ks";
    for (int col = 0; col < 3; ++col) {
      PairCell& cell = report.pairwise[p * 3 + static_cast<std::size_t>(col)];
      cell.feature_a = ra.name;
      cell.feature_b = rb.name;
      cell.test_case = test_case;
      cell.column = kColumns[col];
      cell.metric = metric;
    }
    AdjustedTestOptions opts;
    opts.esf.pool_size = config.pool_size;
    opts.esf.lambda_grid_size = config.lambda_grid_size;
    opts.bootstrap = config.bootstrap;
    opts.permutations = config.permutations;
    opts.seed = derive_seed(config.seed, 3, p);

    PairCell& raw = report.pairwise[p * 3];
    try {
      const Feature fa = feature(ra), fb = feature(rb);
      if (test_case == "I") {
        const auto r = correlation(fa, fb, BiasMetric::Pearson);
        raw.value = r.value;
        raw.p_value = r.p_value;
      } else if (test_case == "II") {
        raw.value = disparate_impact(fa, fb).value;
        raw.p_value = permutation_metric_pvalue(fa.values(), fb.values(), BiasMetric::DisparateImpact,
                                                opts.permutations, derive_seed(opts.seed, 1));
      } else {
        const Feature& groups = a_bin ? fa : fb;
        const Feature& values = a_bin ? fb : fa;
        raw.value = ks_statistic(values, groups).value;
        raw.p_value = permutation_metric_pvalue(groups.values(), values.values(), BiasMetric::KS,
                                                opts.permutations, derive_seed(opts.seed, 1));
      }
    } catch (const std::exception& e) {
      raw.error = error_text(e);
    }

    for (int col = 1; col < 3; ++col) {
      PairCell& cell = report.pairwise[p * 3 + static_cast<std::size_t>(col)];
      if (!basis) {
        cell.error = basis_error;
        continue;
      }
      try {
        opts.esf.criterion = col == 1 ? Criterion::BIC : Criterion::AIC;
        const auto res = adjusted_test(feature(ra), feature(rb), *basis, covariates, opts);
        cell.value = res.metric_adjusted.value_or(res.metric_unadjusted);
        cell.p_value = res.p_adjusted;
      } catch (const std::exception& e) {
        cell.error = error_text(e);
      }
    }
  });
  return report;
}

namespace {

json number(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isfinite(*v)) return *v;
  return format_double(*v);
}

std::optional<double> read_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) return parse_double(j.get<std::string>(), "report number");
  return j.get<double>();
}

json text(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_text(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

json flag(const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); }

std::optional<bool> read_flag(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<bool>();
}

std::string csv_number(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
std::string csv_flag(const std::optional<bool>& b) { return b ? (*b ? "true" : "false") : ""; }

}  // namespace

std::string report_to_json(const AuditReport& report) {
  json j;
  j["schema_version"] = report.schema_version;
  j["kernels"] = report.kernels;
  j["features"] = report.features;
  j["moran"] = json::array();
  for (const auto& c : report.moran) {
    j["moran"].push_back({{"feature", c.feature},
                          {"kernel", c.kernel},
                          {"raw_i", number(c.raw_i)},
                          {"z", number(c.z)},
                          {"p_value", number(c.p_value)},
                          {"error", text(c.error)}});
  }
  j["iu"] = json::array();
  for (const auto& c : report.iu) {
    j["iu"].push_back({{"outcome", c.outcome},
                       {"sensitive", c.sensitive},
                       {"kernel", c.kernel},
                       {"i_y", number(c.i_y)},
                       {"i_a", number(c.i_a)},
                       {"t1", number(c.t1)},
                       {"t2", number(c.t2)},
                       {"p1", number(c.p1)},
                       {"p2", number(c.p2)},
                       {"reject1", flag(c.reject1)},
                       {"reject2", flag(c.reject2)},
                       {"error", text(c.error)}});
  }
  j["pairwise"] = json::array();
  for (const auto& c : report.pairwise) {
    j["pairwise"].push_back({{"feature_a", c.feature_a},
                             {"feature_b", c.feature_b},
                             {"case", c.test_case},
                             {"column", c.column},
                             {"metric", c.metric},
                             {"value", number(c.value)},
                             {"p_value", number(c.p_value)},
                             {"error", text(c.error)}});
  }
  j["provenance"] = {{"config_hash", report.provenance.config_hash},
                     {"seed", report.provenance.seed},
                     {"version", report.provenance.version}};
  return j.dump(2) + "\n";
}

AuditReport report_from_json(const std::string& content) {
  AuditReport r;
  try {
    const json j = json::parse(content);
    r.schema_version = j.at("schema_version").get<int>();
    require(r.schema_version == kReportSchemaVersion, ErrorCode::SchemaError,
            "unsupported report schema_version " + std::to_string(r.schema_version));
    r.kernels = j.at("kernels").get<std::vector<std::string>>();
    r.features = j.at("features").get<std::vector<std::string>>();
    for (const auto& c : j.at("moran")) {
      r.moran.push_back({c.at("feature"), c.at("kernel"), read_number(c.at("raw_i")), read_number(c.at("z")),
                         read_number(c.at("p_value")), read_text(c.at("error"))});
    }
    for (const auto& c : j.at("iu")) {
      IUCell cell;
      cell.outcome = c.at("outcome");
      cell.sensitive = c.at("sensitive");
      cell.kernel = c.at("kernel");
      cell.i_y = read_number(c.at("i_y"));
      cell.i_a = read_number(c.at("i_a"));
      cell.t1 = read_number(c.at("t1"));
      cell.t2 = read_number(c.at("t2"));
      cell.p1 = read_number(c.at("p1"));
      cell.p2 = read_number(c.at("p2"));
      cell.reject1 = read_flag(c.at("reject1"));
      cell.reject2 = read_flag(c.at("reject2"));
      cell.error = read_text(c.at("error"));
      r.iu.push_back(std::move(cell));
    }
    for (const auto& c : j.at("pairwise")) {
      r.pairwise.push_back({c.at("feature_a"), c.at("feature_b"), c.at("case"), c.at("column"), c.at("metric"),
                            read_number(c.at("value")), read_number(c.at("p_value")), read_text(c.at("error"))});
    }
    const json& p = j.at("provenance");
    r.provenance = {p.at("config_hash"), p.at("seed").get<std::uint64_t>(), p.at("version")};
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, std::string("malformed report: ") + e.what());
  }
  return r;
}

void emit_report(const AuditReport& report, ReportFormat format, const std::string& path) {
  require(!path.empty(), ErrorCode::IOError, "no output path given");
  if (format == ReportFormat::Json) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::IOError, "cannot write '" + path + "'");
    out << report_to_json(report);
    require(out.good(), ErrorCode::IOError, "write to '" + path + "' failed");
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  require(!ec && std::filesystem::is_directory(path), ErrorCode::IOError, "cannot create directory '" + path + "'");
  const std::filesystem::path dir(path);

  std::vector<std::vector<std::string>> rows;
  for (const auto& c : report.moran) {
    rows.push_back({c.feature, c.kernel, csv_number(c.raw_i), csv_number(c.z), csv_number(c.p_value),
                    c.error.value_or("")});
  }
  write_csv((dir / "moran.csv").string(), {"feature", "kernel", "raw_i", "z", "p_value", "error"}, rows);

  rows.clear();
  for (const auto& c : report.iu) {
    rows.push_back({c.outcome, c.sensitive, c.kernel, csv_number(c.i_y), csv_number(c.i_a), csv_number(c.t1),
                    csv_number(c.t2), csv_number(c.p1), csv_number(c.p2), csv_flag(c.reject1), csv_flag(c.reject2),
                    c.error.value_or("")});
  }
  write_csv((dir / "iu.csv").string(),
            {"outcome", "sensitive", "kernel", "i_y", "i_a", "t1", "t2", "p1", "p2", "reject1", "reject2", "error"},
            rows);

  rows.clear();
  for (const auto& c : report.pairwise) {
    rows.push_back({c.feature_a, c.feature_b, c.test_case, c.column, c.metric, csv_number(c.value),
                    csv_number(c.p_value), c.error.value_or("")});
  }
  write_csv((dir / "pairwise.csv").string(),
            {"feature_a", "feature_b", "case", "column", "metric", "value", "p_value", "error"}, rows);

  write_csv((dir / "provenance.csv").string(), {"schema_version", "config_hash", "seed", "version"},
            {{std::to_string(report.schema_version), report.provenance.config_hash,
              std::to_string(report.provenance.seed), report.provenance.version}});
}

}  // namespace spatialbias
