#include <algorithm>
#include <cmath>
#include <string>

#include "spatialbias/error.hpp"
#include "spatialbias/esf.hpp"

namespace spatialbias {

std::string_view to_string(Family family) {
  return family == Family::Linear ? "linear" : "logistic";
}

std::string_view to_string(Criterion criterion) {
  return criterion == Criterion::AIC ? "AIC" : "BIC";
}

Criterion parse_criterion(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "aic") return Criterion::AIC;
  if (lower == "bic") return Criterion::BIC;
  fail(ErrorCode::InvalidArgument, "unknown criterion '" + std::string(text) + "' (expected AIC or BIC)");
}

double information_criterion(Criterion criterion, double log_likelihood, int n_params, Eigen::Index n) {
  const double penalty = criterion == Criterion::AIC ? 2.0 : std::log(static_cast<double>(n));
  return penalty * n_params - 2.0 * log_likelihood;
}

Eigen::MatrixXd no_covariates(Eigen::Index n) { return Eigen::MatrixXd(n, 0); }

LambdaPath esf_path(const Feature& feature, const EigenBasis& basis, const Eigen::MatrixXd& covariates,
                    Family family, const ESFOptions& options) {
  const Eigen::Index n = feature.size();
  require(basis.eigenvectors.rows() == n, ErrorCode::ShapeError,
          "eigenvector length " + std::to_string(basis.eigenvectors.rows()) +
              " does not match feature length " + std::to_string(n));
  require(options.lambda_grid_size >= 10, ErrorCode::InvalidArgument, "lambda grid needs at least 10 values");
  require(options.lambda_min_ratio > 0.0 && options.lambda_min_ratio < 1.0, ErrorCode::InvalidArgument,
          "lambda_min_ratio must lie in (0, 1)");
  require(options.pool_size >= 0 && options.pool_size <= basis.size(), ErrorCode::InvalidArgument,
          "candidate pool size must lie in [1, n]");
  if (family == Family::Logistic) {
    require(feature.is_binary(), ErrorCode::WrongKind, "logistic ESF needs a binary feature");
  } else {
    require(!feature.is_constant(), ErrorCode::ConstantFeature, "ESF fit of a constant feature");
  }

  const Eigen::Index pool = options.pool_size > 0 ? options.pool_size : std::min<Eigen::Index>(basis.size(), 200);
  const Eigen::MatrixXd design = basis.eigenvectors.leftCols(pool);
  const Eigen::MatrixXd cov = covariates.size() == 0 ? no_covariates(n) : covariates;

  double top = lambda_max(feature, design, cov, family);
  if (!(top > 0.0)) top = 1e-12;

  LambdaPath path;
  const int count = options.lambda_grid_size;
  const double log_ratio = std::log(options.lambda_min_ratio);
  for (int k = 0; k < count; ++k) {
    path.lambdas.push_back(top * std::exp(log_ratio * k / (count - 1)));
  }

  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    const ESFFit* warm = path.fits.empty() ? nullptr : &path.fits.back();
    if (family == Family::Linear) {
      path.fits.push_back(lasso_solve(feature, design, cov, family, path.lambdas[k], options.lasso, warm));
      continue;
    }
    try {
      ESFFit fit = lasso_solve(feature, design, cov, family, path.lambdas[k], options.lasso, warm);
      if (fit.separation_warning && !path.fits.empty()) break;
      path.fits.push_back(std::move(fit));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalFailure || path.fits.empty()) throw;
      break;
    }
  }
  path.lambdas.resize(path.fits.size());
  return path;
}

ESFFit esf_fit(const Feature& feature, const EigenBasis& basis, const Eigen::MatrixXd& covariates,
               Family family, const ESFOptions& options) {
  LambdaPath path = esf_path(feature, basis, covariates, family, options);
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t k = 0; k < path.fits.size(); ++k) {
    const ESFFit& fit = path.fits[k];
    const double value = information_criterion(options.criterion, fit.log_likelihood, fit.n_params, feature.size());
    if (k == 0 || value < best_value) {
      best = k;
      best_value = value;
    }
  }
  ESFFit chosen = std::move(path.fits[best]);
  chosen.criterion = options.criterion;
  chosen.criterion_value = best_value;
  return chosen;
}

Feature sanitize(const Feature& feature, const ESFFit& fit) {
  require(fit.family == Family::Linear, ErrorCode::WrongFamily, "only linear ESF fits can sanitize a feature");
  require(fit.spatial_component.size() == feature.size(), ErrorCode::ShapeError,
          "fit does not match the feature length");
  return Feature::continuous(feature.values() - fit.spatial_component);
}

}  // namespace spatialbias
