#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spatialbias/feature.hpp"
#include "spatialbias/weights.hpp"

namespace spatialbias {

enum class Family { Linear, Logistic };
enum class Criterion { AIC, BIC };

std::string_view to_string(Family family);
std::string_view to_string(Criterion criterion);
Criterion parse_criterion(std::string_view text);

struct LassoOptions {
  double kkt_tolerance = 1e-7;
  int max_sweeps = 10000;
  /// Record the penalized objective after every coordinate-descent sweep.
  bool record_objective = false;
};

/// Penalized fit of a feature on candidate eigenvectors. The spatial
/// coefficient of the regression form absorbs the autocorrelation parameter,
/// so `gamma` is the product of the two.
struct ESFFit {
  Family family = Family::Linear;
  std::vector<Eigen::Index> selected;  // candidate column indices with nonzero gamma
  Eigen::VectorXd gamma;               // aligned with `selected`
  Eigen::VectorXd coefficients;        // gamma over every candidate column
  Eigen::VectorXd beta;                // covariate coefficients (unpenalized)
  double intercept = 0.0;
  double lambda = 0.0;

  std::optional<Criterion> criterion;
  double criterion_value = 0.0;
  double log_likelihood = 0.0;
  int n_params = 0;  // nonzero gamma + intercept + covariates

  Eigen::VectorXd spatial_component;  // E_sel * gamma
  Eigen::VectorXd fitted;             // full linear predictor
  Eigen::VectorXd residuals;          // linear family
  Eigen::VectorXd fitted_probs;       // logistic family

  double objective = 0.0;
  double kkt_violation = 0.0;
  int sweeps = 0;
  bool separation_warning = false;
  std::vector<double> objective_trace;
};

/// Linear: minimizes (1/2n)||y - E g - X b - c||^2 + lambda ||g||_1.
/// Logistic: minimizes -(1/n) loglik + lambda ||g||_1 for
/// p = 1 / (1 + exp(-(c + X b + E g))). Intercept and covariates are
/// unpenalized. `covariates` may have zero columns. `warm_start` seeds the
/// coefficients (used along lambda paths).
ESFFit lasso_solve(const Feature& response, const Eigen::MatrixXd& design,
                   const Eigen::MatrixXd& covariates, Family family, double lambda,
                   const LassoOptions& options = {}, const ESFFit* warm_start = nullptr);

double lasso_objective(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
                       const Eigen::MatrixXd& covariates, double intercept,
                       const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma, double lambda);

/// Smallest lambda at which every eigenvector coefficient is zero.
double lambda_max(const Feature& response, const Eigen::MatrixXd& design,
                  const Eigen::MatrixXd& covariates, Family family);

double logistic_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

/// Gradient of the Bernoulli log-likelihood with respect to `coef`, where the
/// linear predictor is x * coef.
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& coef);

double gaussian_log_likelihood(double rss, Eigen::Index n);

double information_criterion(Criterion criterion, double log_likelihood, int n_params,
                             Eigen::Index n);

struct ESFOptions {
  Criterion criterion = Criterion::BIC;
  Eigen::Index pool_size = 0;  // 0 selects min(n, 200)
  int lambda_grid_size = 30;
  double lambda_min_ratio = 1e-3;
  LassoOptions lasso;
};

struct LambdaPath {
  std::vector<double> lambdas;  // strictly descending
  std::vector<ESFFit> fits;
};

/// Warm-started fits over a log-spaced grid from lambda_max down to
/// lambda_min_ratio * lambda_max. A logistic path stops at the first lambda
/// whose fit separates the data or fails to converge; the fits before it are kept.
LambdaPath esf_path(const Feature& feature, const EigenBasis& basis,
                    const Eigen::MatrixXd& covariates, Family family, const ESFOptions& options);

/// The criterion-minimizing fit along esf_path.
ESFFit esf_fit(const Feature& feature, const EigenBasis& basis, const Eigen::MatrixXd& covariates,
               Family family, const ESFOptions& options = {});

/// y - E_sel * gamma. The intercept and covariate terms stay in the output.
Feature sanitize(const Feature& feature, const ESFFit& fit);

Eigen::MatrixXd no_covariates(Eigen::Index n);

}  // namespace spatialbias
