#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace spatialbias {

enum class FeatureKind { Continuous, Binary };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

/// A length-n observation vector over locations. Construction checks length,
/// finiteness and the {0,1} domain of binary features; constancy is checked
/// by the statistics that divide by the variance.
class Feature {
 public:
  static Feature continuous(Eigen::VectorXd values);
  static Feature binary(Eigen::VectorXd values);
  static Feature of_kind(FeatureKind kind, Eigen::VectorXd values);

  const Eigen::VectorXd& values() const { return values_; }
  FeatureKind kind() const { return kind_; }
  Eigen::Index size() const { return values_.size(); }
  bool is_binary() const { return kind_ == FeatureKind::Binary; }

  double mean() const { return values_.mean(); }
  /// Sum of squared deviations from the mean.
  double sum_sq_dev() const;
  bool is_constant() const;

 private:
  Feature(Eigen::VectorXd values, FeatureKind kind);

  Eigen::VectorXd values_;
  FeatureKind kind_;
};

}  // namespace spatialbias
