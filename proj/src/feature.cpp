#include "spatialbias/feature.hpp"

#include <cmath>
#include <string>

#include "spatialbias/error.hpp"

namespace spatialbias {

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::Binary ? "binary" : "continuous";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "binary" || text == "discrete") return FeatureKind::Binary;
  if (text == "continuous") return FeatureKind::Continuous;
  fail(ErrorCode::InvalidArgument, "unknown feature kind '" + std::string(text) + "'");
}

Feature::Feature(Eigen::VectorXd values, FeatureKind kind) : values_(std::move(values)), kind_(kind) {
  require(values_.size() >= 3, ErrorCode::ShapeError, "a feature needs at least 3 observations");
  require(values_.allFinite(), ErrorCode::InvalidArgument, "feature values must be finite");
  if (kind_ == FeatureKind::Binary) {
    for (double v : values_) {
      require(v == 0.0 || v == 1.0, ErrorCode::TypeError, "binary feature values must be 0 or 1");
    }
  }
}

Feature Feature::continuous(Eigen::VectorXd values) {
  return Feature(std::move(values), FeatureKind::Continuous);
}

Feature Feature::binary(Eigen::VectorXd values) { return Feature(std::move(values), FeatureKind::Binary); }

Feature Feature::of_kind(FeatureKind kind, Eigen::VectorXd values) {
  return Feature(std::move(values), kind);
}

double Feature::sum_sq_dev() const { return (values_.array() - mean()).square().sum(); }

bool Feature::is_constant() const { return values_.maxCoeff() == values_.minCoeff(); }

}  // namespace spatialbias
