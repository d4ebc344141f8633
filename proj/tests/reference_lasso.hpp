#pragma once

// Independent reference for the penalized fits: accelerated projected
// gradient on the split form g = u - v with u, v >= 0 and an unpenalized
// intercept. Slow but simple.

#include <cmath>

#include <Eigen/Dense>

#include "spatialbias/esf.hpp"

namespace reference {

struct Solution {
  double intercept = 0.0;
  Eigen::VectorXd gamma;
  double objective = 0.0;
};

inline double objective(spatialbias::Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& e,
                        double c, const Eigen::VectorXd& g, double lambda) {
  const Eigen::VectorXd eta = (e * g).array() + c;
  const double n = static_cast<double>(y.size());
  double loss = 0.0;
  if (family == spatialbias::Family::Linear) {
    loss = 0.5 * (y - eta).squaredNorm() / n;
  } else {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double t = eta[i];
      const double sp = t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
      loss += sp - y[i] * t;
    }
    loss /= n;
  }
  return loss + lambda * g.lpNorm<1>();
}

inline Solution projected_gradient(spatialbias::Family family, const Eigen::VectorXd& y,
                                   const Eigen::MatrixXd& e, double lambda, int iterations = 200000) {
  const Eigen::Index n = y.size();
  const Eigen::Index p = e.cols();
  const double nd = static_cast<double>(n);
  Eigen::MatrixXd a(n, 1 + 2 * p);
  a.col(0).setOnes();
  a.middleCols(1, p) = e;
  a.rightCols(p) = -e;
  const double curvature = family == spatialbias::Family::Linear ? 1.0 : 0.25;
  const double step = 1.0 / (curvature * (a.transpose() * a).eval().selfadjointView<Eigen::Upper>().eigenvalues().maxCoeff() / nd);

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(1 + 2 * p, lambda);
  penalty[0] = 0.0;
  auto split_objective = [&](const Eigen::VectorXd& t) {
    return objective(family, y, e, t[0], t.segment(1, p) - t.tail(p), lambda);
  };
  auto gradient = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd eta = a * t;
    Eigen::VectorXd resid;
    if (family == spatialbias::Family::Linear) {
      resid = eta - y;
    } else {
      resid = (1.0 / (1.0 + (-eta.array()).exp())).matrix() - y;
    }
    return Eigen::VectorXd(a.transpose() * resid / nd + penalty);
  };
  auto project = [&](Eigen::VectorXd t) {
    t.tail(2 * p) = t.tail(2 * p).cwiseMax(0.0);
    return t;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(1 + 2 * p);
  Eigen::VectorXd z = x;
  double t_k = 1.0;
  double last = split_objective(x);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd next = project(z - step * gradient(z));
    const double value = split_objective(next);
    if (value > last) {  // adaptive restart
      z = x;
      t_k = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
    z = next + ((t_k - 1.0) / t_next) * (next - x);
    if ((next - x).cwiseAbs().maxCoeff() < 1e-15 && it > 100) {
      x = next;
      last = value;
      break;
    }
    x = next;
    last = value;
    t_k = t_next;
  }
  Solution s;
  s.intercept = x[0];
  s.gamma = x.segment(1, p) - x.tail(p);
  s.objective = split_objective(x);
  return s;
}

/// Largest KKT violation of a fit: stationarity of the unpenalized
/// intercept, and the subgradient conditions for gamma.
inline double kkt_violation(spatialbias::Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& e,
                            double c, const Eigen::VectorXd& g, double lambda) {
  const Eigen::VectorXd eta = (e * g).array() + c;
  Eigen::VectorXd r;
  if (family == spatialbias::Family::Linear) {
    r = y - eta;
  } else {
    r = y - (1.0 / (1.0 + (-eta.array()).exp())).matrix();
  }
  const double nd = static_cast<double>(y.size());
  double worst = std::abs(r.sum() / nd);
  const Eigen::VectorXd score = e.transpose() * r / nd;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double v = g[j] != 0.0 ? std::abs(score[j] - lambda * (g[j] > 0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(score[j]) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace reference
