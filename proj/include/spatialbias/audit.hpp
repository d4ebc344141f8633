#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spatialbias/esf.hpp"
#include "spatialbias/feature.hpp"
#include "spatialbias/weights.hpp"

namespace spatialbias {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

struct FeatureRole {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
};

enum class ReportFormat { Json, CsvBundle };

ReportFormat parse_report_format(const std::string& text);

struct AuditConfig {
  std::string locations_path;
  std::string features_path;
  std::string adjacency_path;  // required by k_hop kernels
  FeatureRole outcome;
  std::vector<FeatureRole> sensitive;
  std::vector<FeatureRole> covariates;
  std::vector<Kernel> kernels;
  Normalization normalization = Normalization::SpectralRadius;
  std::size_t esf_kernel = 0;  // index into kernels
  double delta = 1.0;
  double alpha = 0.05;
  std::size_t permutations = 999;
  std::size_t bootstrap = 999;
  Eigen::Index pool_size = 0;
  int lambda_grid_size = 30;
  std::uint64_t seed = 0;
  std::string output_path;
  ReportFormat format = ReportFormat::Json;
  unsigned workers = 1;
  std::string source_text;  // raw config text, hashed into the provenance

  void validate() const;
};

/// YAML key/value file; relative paths resolve against the file's directory.
AuditConfig load_audit_config(const std::string& path);

struct IngestedDataset {
  std::vector<Location> locations;  // sorted by id
  std::map<std::string, Eigen::VectorXd> columns;
  std::map<std::string, FeatureKind> kinds;
};

IngestedDataset ingest_dataset(const std::string& locations_path,
                               const std::string& features_path,
                               const std::vector<FeatureRole>& roles);

struct MoranCell {
  std::string feature;
  std::string kernel;
  std::optional<double> raw_i;
  std::optional<double> z;
  std::optional<double> p_value;
  std::optional<std::string> error;

  bool operator==(const MoranCell&) const = default;
};

struct IUCell {
  std::string outcome;
  std::string sensitive;
  std::string kernel;
  std::optional<double> i_y, i_a, t1, t2, p1, p2;
  std::optional<bool> reject1, reject2;
  std::optional<std::string> error;

  bool operator==(const IUCell&) const = default;
};

struct PairCell {
  std::string feature_a;
  std::string feature_b;
  std::string test_case;  // I, II or III
  std::string column;     // "No ESF", "ESF-BIC", "ESF-AIC"
  std::string metric;
  std::optional<double> value;
  std::optional<double> p_value;
  std::optional<std::string> error;

  bool operator==(const PairCell&) const = default;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;

  bool operator==(const Provenance&) const = default;
};

struct AuditReport {
  int schema_version = kReportSchemaVersion;
  std::vector<std::string> kernels;
  std::vector<std::string> features;
  std::vector<MoranCell> moran;
  std::vector<IUCell> iu;
  std::vector<PairCell> pairwise;
  Provenance provenance;

  bool any_failure() const;
  bool operator==(const AuditReport&) const = default;
};

AuditReport run_audit(const AuditConfig& config);

/// Json writes one document to `path`; CsvBundle writes moran.csv, iu.csv
/// and pairwise.csv into the directory `path`.
void emit_report(const AuditReport& report, ReportFormat format, const std::string& path);

std::string report_to_json(const AuditReport& report);
AuditReport report_from_json(const std::string& text);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace spatialbias
