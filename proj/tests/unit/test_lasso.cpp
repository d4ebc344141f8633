#include "helpers.hpp"
#include "../reference_lasso.hpp"

#include "spatialbias/esf.hpp"

using namespace spatialbias;

namespace {

// Top eigenvectors of inverse-distance weights on random points.
Eigen::MatrixXd candidate_columns(std::uint64_t seed, int n, int p) {
  Rng rng(seed);
  const Eigen::VectorXd xs = standard_normal_vector(rng, n);
  const Eigen::VectorXd ys = standard_normal_vector(rng, n);
  std::vector<Location> locs;
  for (int i = 0; i < n; ++i) locs.push_back({std::to_string(i), xs[i], ys[i]});
  const auto basis = spectral_decompose(build_weights(std::span<const Location>(locs), Kernel::inverse_distance()));
  return basis.eigenvectors.leftCols(p);
}

}  // namespace

TEST(Lasso, UnivariateClosedForm) {
  Eigen::VectorXd e = testutil::normals(1, 50);
  e.array() -= e.mean();
  const Eigen::VectorXd y = 0.7 * e + testutil::normals(2, 50);
  const auto f = Feature::continuous(y);
  const Eigen::MatrixXd design = e;
  const double lmax = lambda_max(f, design, no_covariates(50), Family::Linear);
  const double lambda = lmax / 2;
  const auto fit = lasso_solve(f, design, no_covariates(50), Family::Linear, lambda);
  const double score = e.dot(y.array().matrix() - Eigen::VectorXd::Constant(50, y.mean())) / 50.0;
  const double shrunk = (std::abs(score) - lambda) * (score > 0 ? 1 : -1);
  EXPECT_NEAR(fit.coefficients[0], shrunk / (e.squaredNorm() / 50.0), 1e-9);
  EXPECT_NEAR(lmax, std::abs(score), 1e-14);
}

TEST(Lasso, ZeroAboveLambdaMax) {
  const Eigen::MatrixXd e = candidate_columns(3, 30, 5);
  const auto f = Feature::continuous(testutil::normals(4, 30));
  const double lmax = lambda_max(f, e, no_covariates(30), Family::Linear);
  const auto fit = lasso_solve(f, e, no_covariates(30), Family::Linear, lmax * 1.0001);
  EXPECT_TRUE(fit.selected.empty());
  EXPECT_NEAR(fit.intercept, f.mean(), 1e-12);
  const auto below = lasso_solve(f, e, no_covariates(30), Family::Linear, lmax * 0.9);
  EXPECT_EQ(below.selected.size(), 1u);
}

TEST(Lasso, MatchesReferenceLinear) {
  for (int k = 0; k < 20; ++k) {
    const Eigen::MatrixXd e = candidate_columns(100 + k, 30, 5);
    const Eigen::VectorXd y = e * testutil::normals(200 + k, 5) + testutil::normals(300 + k, 30);
    const auto f = Feature::continuous(y);
    const double lambda = lambda_max(f, e, no_covariates(30), Family::Linear) * (0.05 + 0.04 * k);
    const auto fit = lasso_solve(f, e, no_covariates(30), Family::Linear, lambda);
    const auto ref = reference::projected_gradient(Family::Linear, y, e, lambda);
    const double obj = reference::objective(Family::Linear, y, e, fit.intercept, fit.coefficients, lambda);
    EXPECT_LE(reference::kkt_violation(Family::Linear, y, e, fit.intercept, fit.coefficients, lambda), 1e-6);
    EXPECT_LE(std::abs(obj - ref.objective) / std::abs(ref.objective), 1e-8) << "instance " << k;
    EXPECT_NEAR(fit.objective, obj, 1e-12);
  }
}

TEST(Lasso, MatchesReferenceLogistic) {
  for (int k = 0; k < 10; ++k) {
    const Eigen::MatrixXd e = candidate_columns(400 + k, 40, 5);
    const Eigen::VectorXd eta = 3.0 * e * testutil::normals(500 + k, 5);
    Rng rng(600 + k);
    const Eigen::VectorXd probs = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    const auto f = Feature::binary(bernoulli_vector(rng, probs));
    if (f.is_constant()) continue;
    const double lambda = lambda_max(f, e, no_covariates(40), Family::Logistic) * 0.3;
    const auto fit = lasso_solve(f, e, no_covariates(40), Family::Logistic, lambda);
    const auto ref = reference::projected_gradient(Family::Logistic, f.values(), e, lambda);
    const double obj = reference::objective(Family::Logistic, f.values(), e, fit.intercept, fit.coefficients, lambda);
    EXPECT_LE(reference::kkt_violation(Family::Logistic, f.values(), e, fit.intercept, fit.coefficients, lambda),
              1e-6);
    EXPECT_LE(std::abs(obj - ref.objective) / std::abs(ref.objective), 1e-8) << "instance " << k;
    EXPECT_TRUE((fit.fitted_probs.array() > 0).all() && (fit.fitted_probs.array() < 1).all());
  }
}

TEST(Lasso, Covariates) {
  const Eigen::MatrixXd e = candidate_columns(7, 30, 5);
  Eigen::MatrixXd x(30, 1);
  x.col(0) = testutil::normals(8, 30);
  const Eigen::VectorXd y = 2.0 * x.col(0) + testutil::normals(9, 30);
  const auto f = Feature::continuous(y);
  const double lambda = lambda_max(f, e, x, Family::Linear) * 1.01;
  const auto fit = lasso_solve(f, e, x, Family::Linear, lambda);
  EXPECT_TRUE(fit.selected.empty());
  ASSERT_EQ(fit.beta.size(), 1);
  Eigen::MatrixXd ols(30, 2);
  ols << Eigen::VectorXd::Ones(30), x;
  const Eigen::VectorXd coef = ols.colPivHouseholderQr().solve(y);
  EXPECT_NEAR(fit.beta[0], coef[1], 1e-9);
  EXPECT_NEAR(fit.intercept, coef[0], 1e-9);
  EXPECT_EQ(fit.n_params, 2);
}

TEST(Lasso, ObjectiveTraceDecreases) {
  const Eigen::MatrixXd e = candidate_columns(11, 30, 5);
  const auto f = Feature::continuous(e * testutil::normals(12, 5) + 0.5 * testutil::normals(13, 30));
  LassoOptions o;
  o.record_objective = true;
  const double lambda = lambda_max(f, e, no_covariates(30), Family::Linear) * 0.1;
  const auto fit = lasso_solve(f, e, no_covariates(30), Family::Linear, lambda, o);
  ASSERT_FALSE(fit.objective_trace.empty());
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-14);
  }
}

TEST(Lasso, LogisticScoreFiniteDifferences) {
  Rng rng(21);
  const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(25, 4, [&] { return standard_normal_vector(rng, 1)[0]; });
  const Eigen::VectorXd y = testutil::coins(22, 25);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd coef = testutil::normals(30 + k, 4);
    const Eigen::VectorXd score = logistic_score(x, y, coef);
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-5;
      Eigen::VectorXd up = coef, down = coef;
      up[j] += h;
      down[j] -= h;
      const double fd = (logistic_log_likelihood(y, x * up) - logistic_log_likelihood(y, x * down)) / (2 * h);
      EXPECT_LE(std::abs(fd - score[j]), 1e-5 * std::max(1.0, std::abs(score[j])));
    }
  }
}

TEST(Lasso, SeparationWarning) {
  Eigen::VectorXd e = Eigen::VectorXd::LinSpaced(20, -1, 1);
  const Eigen::VectorXd y = (e.array() > 0).cast<double>();
  const Eigen::MatrixXd design = e;
  const auto fit = lasso_solve(Feature::binary(y), design, no_covariates(20), Family::Logistic, 0.0);
  EXPECT_TRUE(fit.separation_warning);
}

TEST(Lasso, Errors) {
  const Eigen::MatrixXd e = candidate_columns(3, 30, 5);
  const auto cont = Feature::continuous(testutil::normals(4, 30));
  EXPECT_ERROR_CODE(lasso_solve(cont, e, no_covariates(30), Family::Logistic, 0.1), WrongKind);
  EXPECT_ERROR_CODE(lasso_solve(cont, e, no_covariates(30), Family::Linear, -1.0), InvalidArgument);
  EXPECT_ERROR_CODE(lasso_solve(cont, e.topRows(20), no_covariates(30), Family::Linear, 0.1), ShapeError);
  EXPECT_ERROR_CODE(lasso_solve(Feature::binary(Eigen::VectorXd::Ones(30)), e, no_covariates(30), Family::Logistic, 0.1),
                    ConstantFeature);
  LassoOptions tight;
  tight.max_sweeps = 1;
  const auto f = Feature::continuous(e * testutil::normals(5, 5) + 0.1 * testutil::normals(6, 30));
  EXPECT_ERROR_CODE(lasso_solve(f, e, no_covariates(30), Family::Linear, 1e-6, tight), NumericalFailure);
}

TEST(Lasso, LogLikelihoods) {
  EXPECT_NEAR(gaussian_log_likelihood(10.0, 10), -5.0 * (std::log(2 * M_PI) + 1.0), 1e-12);
  const Eigen::VectorXd y = Eigen::Vector2d(1, 0);
  EXPECT_NEAR(logistic_log_likelihood(y, Eigen::Vector2d(0, 0)), 2 * std::log(0.5), 1e-15);
  EXPECT_DOUBLE_EQ(information_criterion(Criterion::AIC, -10.0, 3, 100), 26.0);
  EXPECT_DOUBLE_EQ(information_criterion(Criterion::BIC, -10.0, 3, 100), 3 * std::log(100.0) + 20.0);
}
