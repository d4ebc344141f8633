#include <algorithm>
#include <cmath>
#include <limits>

#include "spatialbias/error.hpp"
#include "spatialbias/esf.hpp"

namespace spatialbias {

namespace {

constexpr double kSeparationEta = 30.0;
constexpr int kMaxIrls = 100;
constexpr double kMinWeight = 1e-5;

double soft_threshold(double value, double threshold) {
  // Rounding slack, so a score equal to lambda_max in exact arithmetic stays at zero.
  const double edge = threshold * (1.0 + 1e-10);
  if (value > edge) return value - threshold;
  if (value < -edge) return value + threshold;
  return 0.0;
}

double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& eta) {
  return eta.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::MatrixXd unpenalized_columns(const Eigen::MatrixXd& covariates, Eigen::Index n) {
  const Eigen::Index q = covariates.size() == 0 ? 0 : covariates.cols();
  Eigen::MatrixXd u(n, 1 + q);
  u.col(0).setOnes();
  if (q > 0) u.rightCols(q) = covariates;
  return u;
}

/// Least squares on the unpenalized columns, with their span projected out
/// of everything else (Frisch-Waugh), so the lasso only sees the eigenvectors.
class Projector {
 public:
  explicit Projector(const Eigen::MatrixXd& u) : qr_(u) {
    const Eigen::Index rank = qr_.rank();
    q_ = qr_.householderQ() * Eigen::MatrixXd::Identity(u.rows(), rank);
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& v) const { return v - q_ * (q_.transpose() * v); }
  Eigen::MatrixXd residual(const Eigen::MatrixXd& m) const { return m - q_ * (q_.transpose() * m); }
  Eigen::VectorXd solve(const Eigen::VectorXd& target) const { return qr_.solve(target); }

 private:
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd q_;
};

/// Cyclic coordinate descent for (1/2n)||t - Z g||^2 + lambda ||g||_1 with an
/// active-set inner loop. Stops once the KKT conditions hold within `tol`.
class CoordinateDescent {
 public:
  CoordinateDescent(const Eigen::MatrixXd& z, const Eigen::VectorXd& target, double n)
      : z_(z), t_(target), n_(n), colsq_(z.colwise().squaredNorm().transpose() / n) {}

  struct Outcome {
    bool converged = false;
    int sweeps = 0;
    double violation = 0.0;
  };

  Outcome run(double lambda, Eigen::VectorXd& g, double tol, int max_sweeps,
              std::vector<double>* trace) const {
    const Eigen::Index p = z_.cols();
    Eigen::VectorXd r = t_ - z_ * g;
    Outcome out;
    const double skip = 1e-12 * std::max(1.0, colsq_.size() > 0 ? colsq_.maxCoeff() : 1.0);

    auto update = [&](Eigen::Index j) {
      if (colsq_[j] <= skip) {
        if (g[j] != 0.0) {
          r += z_.col(j) * g[j];
          g[j] = 0.0;
        }
        return 0.0;
      }
      const double old = g[j];
      const double rho = z_.col(j).dot(r) / n_ + colsq_[j] * old;
      const double next = soft_threshold(rho, lambda) / colsq_[j];
      if (next != old) {
        r.noalias() -= z_.col(j) * (next - old);
        g[j] = next;
      }
      return std::abs(next - old) * std::sqrt(colsq_[j]);
    };

    auto objective = [&] { return 0.5 * r.squaredNorm() / n_ + lambda * g.lpNorm<1>(); };

    while (out.sweeps < max_sweeps) {
      for (Eigen::Index j = 0; j < p; ++j) update(j);
      ++out.sweeps;
      if (trace) trace->push_back(objective());

      out.violation = kkt_violation(r, g, lambda, skip);
      if (out.violation <= tol) {
        out.converged = true;
        return out;
      }

      std::vector<Eigen::Index> active;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (g[j] != 0.0) active.push_back(j);
      }
      for (int k = 0; k < kActiveSweeps && !active.empty() && out.sweeps < max_sweeps; ++k) {
        double change = 0.0;
        for (Eigen::Index j : active) change = std::max(change, update(j));
        ++out.sweeps;
        if (trace) trace->push_back(objective());
        if (change <= 0.1 * tol) break;
      }
      if (!active.empty() && out.sweeps < max_sweeps && active_set_step(active, lambda, g, r)) {
        ++out.sweeps;
        if (trace) trace->push_back(objective());
      }
    }
    out.violation = kkt_violation(r, g, lambda, skip);
    out.converged = out.violation <= tol;
    return out;
  }

 private:
  static constexpr int kActiveSweeps = 10;

  /// Minimizes the objective over the current active set with signs held
  /// fixed (one linear solve), stopping where the first coefficient would
  /// change sign. Plain CD crawls when the projected columns are nearly
  /// collinear, which happens for eigenvectors close to the constant vector.
  bool active_set_step(const std::vector<Eigen::Index>& active, double lambda, Eigen::VectorXd& g,
                       Eigen::VectorXd& r) const {
    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd za(z_.rows(), m);
    Eigen::VectorXd ga(m), sign(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      za.col(k) = z_.col(active[static_cast<std::size_t>(k)]);
      ga[k] = g[active[static_cast<std::size_t>(k)]];
      sign[k] = ga[k] > 0.0 ? 1.0 : -1.0;
    }
    const Eigen::MatrixXd gram = za.transpose() * za / n_;
    const Eigen::VectorXd rhs = za.transpose() * t_ / n_ - lambda * sign;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd target = ldlt.solve(rhs);
    if (!target.allFinite()) return false;

    double step = 1.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (target[k] * sign[k] < 0.0) step = std::min(step, ga[k] / (ga[k] - target[k]));
    }
    Eigen::VectorXd next = ga + step * (target - ga);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (next[k] * sign[k] <= 0.0) next[k] = 0.0;
    }
    const Eigen::VectorXd r_next = r - za * (next - ga);
    const double before = 0.5 * r.squaredNorm() / n_ + lambda * ga.lpNorm<1>();
    const double after = 0.5 * r_next.squaredNorm() / n_ + lambda * next.lpNorm<1>();
    if (!(after < before)) return false;
    for (Eigen::Index k = 0; k < m; ++k) g[active[static_cast<std::size_t>(k)]] = next[k];
    r = t_ - z_ * g;
    return true;
  }

  double kkt_violation(const Eigen::VectorXd& r, const Eigen::VectorXd& g, double lambda,
                       double skip) const {
    const Eigen::VectorXd grad = z_.transpose() * r / n_;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      if (colsq_[j] <= skip) continue;
      const double v = g[j] == 0.0 ? std::max(0.0, std::abs(grad[j]) - lambda)
                                   : std::abs(grad[j] - lambda * (g[j] > 0.0 ? 1.0 : -1.0));
      worst = std::max(worst, v);
    }
    return worst;
  }

  const Eigen::MatrixXd& z_;
  const Eigen::VectorXd& t_;
  double n_;
  Eigen::VectorXd colsq_;
};

/// KKT violation of the original (unprojected) problem given the score
/// vectors of the unpenalized and penalized coefficients.
double original_kkt(const Eigen::VectorXd& grad_u, const Eigen::VectorXd& grad_e,
                    const Eigen::VectorXd& g, double lambda) {
  double worst = grad_u.size() > 0 ? grad_u.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double v = g[j] == 0.0 ? std::max(0.0, std::abs(grad_e[j]) - lambda)
                                 : std::abs(grad_e[j] - lambda * (g[j] > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

void check_inputs(const Feature& response, const Eigen::MatrixXd& design,
                  const Eigen::MatrixXd& covariates, double lambda) {
  const Eigen::Index n = response.size();
  require(design.rows() == n, ErrorCode::ShapeError, "design rows do not match the response length");
  require(covariates.size() == 0 || covariates.rows() == n, ErrorCode::ShapeError,
          "covariate rows do not match the response length");
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorCode::InvalidArgument, "lambda must be >= 0");
  require(design.allFinite() && (covariates.size() == 0 || covariates.allFinite()),
          ErrorCode::InvalidArgument, "design and covariates must be finite");
}

void finish_fit(ESFFit& fit, const Eigen::MatrixXd& design, const Eigen::VectorXd& g,
                const Eigen::VectorXd& b) {
  fit.coefficients = g;
  fit.intercept = b[0];
  fit.beta = b.tail(b.size() - 1);
  fit.selected.clear();
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (g[j] != 0.0) fit.selected.push_back(j);
  }
  fit.gamma.resize(static_cast<Eigen::Index>(fit.selected.size()));
  for (std::size_t k = 0; k < fit.selected.size(); ++k) {
    fit.gamma[static_cast<Eigen::Index>(k)] = g[fit.selected[k]];
  }
  fit.spatial_component = design * g;
  fit.n_params = static_cast<int>(fit.selected.size() + static_cast<std::size_t>(b.size()));
}

ESFFit solve_linear(const Feature& response, const Eigen::MatrixXd& design,
                    const Eigen::MatrixXd& covariates, double lambda, const LassoOptions& options,
                    const ESFFit* warm) {
  const Eigen::VectorXd& y = response.values();
  const Eigen::Index n = y.size();
  const auto nd = static_cast<double>(n);
  const Eigen::MatrixXd u = unpenalized_columns(covariates, n);
  const Projector proj(u);
  const Eigen::MatrixXd z = proj.residual(design);
  const Eigen::VectorXd t = proj.residual(y);

  Eigen::VectorXd g = Eigen::VectorXd::Zero(design.cols());
  if (warm && warm->coefficients.size() == design.cols()) g = warm->coefficients;

  ESFFit fit;
  fit.family = Family::Linear;
  fit.lambda = lambda;
  const CoordinateDescent cd(z, t, nd);
  const auto outcome = cd.run(lambda, g, options.kkt_tolerance, options.max_sweeps,
                              options.record_objective ? &fit.objective_trace : nullptr);
  require(outcome.converged, ErrorCode::NumericalFailure,
          "coordinate descent did not reach the KKT tolerance within " +
              std::to_string(options.max_sweeps) + " sweeps");
  fit.sweeps = outcome.sweeps;

  const Eigen::VectorXd b = proj.solve(y - design * g);
  finish_fit(fit, design, g, b);
  fit.fitted = u * b + fit.spatial_component;
  fit.residuals = y - fit.fitted;
  const double rss = fit.residuals.squaredNorm();
  fit.log_likelihood = gaussian_log_likelihood(rss, n);
  fit.objective = 0.5 * rss / nd + lambda * g.lpNorm<1>();
  fit.kkt_violation = original_kkt(u.transpose() * fit.residuals / nd,
                                   design.transpose() * fit.residuals / nd, g, lambda);
  return fit;
}

double logistic_objective(const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                          const Eigen::VectorXd& g, double lambda) {
  return -logistic_log_likelihood(y, eta) / static_cast<double>(y.size()) + lambda * g.lpNorm<1>();
}

ESFFit solve_logistic(const Feature& response, const Eigen::MatrixXd& design,
                      const Eigen::MatrixXd& covariates, double lambda, const LassoOptions& options,
                      const ESFFit* warm) {
  require(response.is_binary(), ErrorCode::WrongKind, "logistic family needs a binary response");
  require(!response.is_constant(), ErrorCode::ConstantFeature,
          "logistic fit is undefined for a constant response");
  const Eigen::VectorXd& y = response.values();
  const Eigen::Index n = y.size();
  const auto nd = static_cast<double>(n);
  const Eigen::MatrixXd u = unpenalized_columns(covariates, n);

  Eigen::VectorXd g = Eigen::VectorXd::Zero(design.cols());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(u.cols());
  if (warm && warm->coefficients.size() == design.cols() && warm->beta.size() == u.cols() - 1) {
    g = warm->coefficients;
    b[0] = warm->intercept;
    b.tail(b.size() - 1) = warm->beta;
  } else {
    const double mean = y.mean();
    b[0] = std::log(mean / (1.0 - mean));
  }

  ESFFit fit;
  fit.family = Family::Logistic;
  fit.lambda = lambda;

  Eigen::VectorXd eta = u * b + design * g;
  double current = logistic_objective(y, eta, g, lambda);
  bool converged = false;
  for (int iter = 0; iter < kMaxIrls && fit.sweeps < options.max_sweeps; ++iter) {
    const Eigen::VectorXd p = sigmoid(eta);
    const Eigen::VectorXd resid = y - p;
    fit.kkt_violation = original_kkt(u.transpose() * resid / nd, design.transpose() * resid / nd, g, lambda);
    if (fit.kkt_violation <= options.kkt_tolerance) {
      converged = true;
      break;
    }

    // Weighted least-squares step on the working response.
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).max(kMinWeight);
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::VectorXd work = eta.array() + resid.array() / w.array();
    const Eigen::MatrixXd uw = sw.asDiagonal() * u;
    const Eigen::MatrixXd ew = sw.asDiagonal() * design;
    const Eigen::VectorXd tw = sw.cwiseProduct(work);
    const Projector proj(uw);
    const Eigen::MatrixXd z = proj.residual(ew);
    const Eigen::VectorXd t = proj.residual(tw);

    // Inexact Newton: the inner problem only needs to beat the current outer violation.
    const double inner_tol = std::max(0.01 * options.kkt_tolerance, 0.1 * fit.kkt_violation);
    Eigen::VectorXd g_next = g;
    const CoordinateDescent cd(z, t, nd);
    const auto outcome = cd.run(lambda, g_next, inner_tol, options.max_sweeps - fit.sweeps, nullptr);
    fit.sweeps += outcome.sweeps;
    const Eigen::VectorXd b_next = proj.solve(tw - ew * g_next);

    // Backtrack toward the previous iterate until the penalized objective drops.
    double step = 1.0;
    Eigen::VectorXd g_try = g_next;
    Eigen::VectorXd b_try = b_next;
    Eigen::VectorXd eta_try = u * b_try + design * g_try;
    double trial = logistic_objective(y, eta_try, g_try, lambda);
    while (trial > current + 1e-15 * std::abs(current) && step > 1e-6) {
      step *= 0.5;
      g_try = g + step * (g_next - g);
      b_try = b + step * (b_next - b);
      eta_try = u * b_try + design * g_try;
      trial = logistic_objective(y, eta_try, g_try, lambda);
    }
    if (trial > current + 1e-15 * std::abs(current)) break;  // no descent left
    g = g_try;
    b = b_try;
    eta = eta_try;
    current = trial;
    if (options.record_objective) fit.objective_trace.push_back(current);
  }
  if (!converged) {
    const Eigen::VectorXd resid = y - sigmoid(eta);
    fit.kkt_violation = original_kkt(u.transpose() * resid / nd, design.transpose() * resid / nd, g, lambda);
    converged = fit.kkt_violation <= options.kkt_tolerance;
  }
  fit.separation_warning = eta.cwiseAbs().maxCoeff() > kSeparationEta;
  // Under separation the optimum sits at infinity; the fit is returned with the warning set.
  require(converged || fit.separation_warning, ErrorCode::NumericalFailure,
          "logistic coordinate descent did not reach the KKT tolerance (violation " +
              std::to_string(fit.kkt_violation) + ")");

  finish_fit(fit, design, g, b);
  fit.fitted = eta;
  fit.fitted_probs = sigmoid(eta).cwiseMax(1e-12).cwiseMin(1.0 - 1e-12);
  fit.log_likelihood = logistic_log_likelihood(y, eta);
  fit.objective = current;
  return fit;
}

}  // namespace

double gaussian_log_likelihood(double rss, Eigen::Index n) {
  const auto nd = static_cast<double>(n);
  const double sigma2 = std::max(rss / nd, std::numeric_limits<double>::min());
  return -0.5 * nd * (std::log(2.0 * M_PI * sigma2) + 1.0);
}

double logistic_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += y[i] * eta[i] - softplus(eta[i]);
  return total;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& coef) {
  const Eigen::VectorXd p = sigmoid(Eigen::VectorXd(x * coef));
  return x.transpose() * (y - p);
}

double lasso_objective(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
                       const Eigen::MatrixXd& covariates, double intercept,
                       const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma, double lambda) {
  Eigen::VectorXd eta = design * gamma;
  eta.array() += intercept;
  if (beta.size() > 0) eta += covariates * beta;
  if (family == Family::Linear) {
    return 0.5 * (y - eta).squaredNorm() / static_cast<double>(y.size()) + lambda * gamma.lpNorm<1>();
  }
  return logistic_objective(y, eta, gamma, lambda);
}

double lambda_max(const Feature& response, const Eigen::MatrixXd& design,
                  const Eigen::MatrixXd& covariates, Family family) {
  check_inputs(response, design, covariates, 0.0);
  const auto nd = static_cast<double>(response.size());
  if (design.cols() == 0) return 0.0;
  if (family == Family::Linear) {
    const Projector proj(unpenalized_columns(covariates, response.size()));
    return (design.transpose() * proj.residual(response.values())).cwiseAbs().maxCoeff() / nd;
  }
  // Score of the eigenvector coefficients at the unpenalized null model.
  const Eigen::MatrixXd none(response.size(), 0);
  const ESFFit null = solve_logistic(response, none, covariates, 0.0, LassoOptions{}, nullptr);
  return (design.transpose() * (response.values() - sigmoid(null.fitted))).cwiseAbs().maxCoeff() / nd;
}

ESFFit lasso_solve(const Feature& response, const Eigen::MatrixXd& design,
                   const Eigen::MatrixXd& covariates, Family family, double lambda,
                   const LassoOptions& options, const ESFFit* warm_start) {
  check_inputs(response, design, covariates, lambda);
  return family == Family::Linear
             ? solve_linear(response, design, covariates, lambda, options, warm_start)
             : solve_logistic(response, design, covariates, lambda, options, warm_start);
}

}  // namespace spatialbias
