#include "spatialbias/moran.hpp"

#include <algorithm>
#include <cmath>

#include "spatialbias/error.hpp"

namespace spatialbias {

namespace {

constexpr Eigen::Index kBlock = 256;

Eigen::VectorXd centered(const Eigen::Ref<const Eigen::VectorXd>& values) {
  return values.array() - values.mean();
}

}  // namespace

bool at_least(double a, double b) {
  if (std::isinf(b)) return a >= b;
  return a >= b - 1e-12 * std::max(1.0, std::abs(b));
}

bool at_most(double a, double b) {
  if (std::isinf(b)) return a <= b;
  return a <= b + 1e-12 * std::max(1.0, std::abs(b));
}

MoranMoments closed_form_moments(const WeightMatrix& w) {
  const Eigen::MatrixXd& m = w.weights();
  const auto n = static_cast<double>(w.n());
  MoranMoments out;
  out.s0 = m.sum();
  out.s1 = 0.5 * (m + m.transpose()).array().square().sum();
  out.s2 = (m.rowwise().sum() + m.colwise().sum().transpose()).array().square().sum();
  out.mean = -1.0 / (n - 1.0);
  if (out.s0 > 0.0) {
    out.variance = (n * n * out.s1 - n * out.s2 + 3.0 * out.s0 * out.s0) /
                       ((n * n - 1.0) * out.s0 * out.s0) -
                   out.mean * out.mean;
  }
  return out;
}

MoranEvaluator::MoranEvaluator(const WeightMatrix& w)
    : n_(w.n()), sym_(w.symmetrized()), moments_(closed_form_moments(w)) {
  require(moments_.s0 > 0.0, ErrorCode::ZeroMatrix, "weight matrix is all zero");
}

double MoranEvaluator::statistic(const Eigen::Ref<const Eigen::VectorXd>& values) const {
  require(values.size() == n_, ErrorCode::ShapeError,
          "feature length " + std::to_string(values.size()) + " does not match W of size " +
              std::to_string(n_));
  require(values.maxCoeff() != values.minCoeff(), ErrorCode::ConstantFeature,
          "Moran's I is undefined for a constant feature");
  const Eigen::VectorXd z = centered(values);
  const double ss = z.squaredNorm();
  require(ss > 0.0, ErrorCode::ConstantFeature, "feature has zero variance");
  return static_cast<double>(n_) / moments_.s0 * z.dot(sym_ * z) / ss;
}

std::vector<double> MoranEvaluator::permuted_statistics(
    const Eigen::Ref<const Eigen::VectorXd>& values, std::span<const Permutation> perms) const {
  statistic(values);  // validation
  const Eigen::VectorXd z = centered(values);
  const double scale = static_cast<double>(n_) / moments_.s0 / z.squaredNorm();

  std::vector<double> out(perms.size());
  Eigen::MatrixXd block(n_, kBlock);
  Eigen::MatrixXd product(n_, kBlock);
  for (std::size_t start = 0; start < perms.size(); start += kBlock) {
    const auto count = static_cast<Eigen::Index>(
        std::min<std::size_t>(kBlock, perms.size() - start));
    for (Eigen::Index c = 0; c < count; ++c) {
      const auto& perm = perms[start + static_cast<std::size_t>(c)];
      for (Eigen::Index i = 0; i < n_; ++i) block(i, c) = z[perm[static_cast<std::size_t>(i)]];
    }
    product.leftCols(count).noalias() = sym_ * block.leftCols(count);
    for (Eigen::Index c = 0; c < count; ++c) {
      out[start + static_cast<std::size_t>(c)] = scale * block.col(c).dot(product.col(c));
    }
  }
  return out;
}

double MoranEvaluator::standardize(double raw_i) const {
  const double var = moments_.variance;
  require(var > 1e-10 * moments_.mean * moments_.mean, ErrorCode::NumericalFailure,
          "closed-form null variance of Moran's I is zero for this weight matrix");
  return (raw_i - moments_.mean) / std::sqrt(var);
}

double morans_i(const Feature& f, const WeightMatrix& w) {
  return MoranEvaluator(w).statistic(f.values());
}

MoranResult standardized_morans_i(const Feature& f, const WeightMatrix& w, Standardization mode,
                                  std::size_t permutations, std::uint64_t seed) {
  const MoranEvaluator eval(w);
  MoranResult result;
  result.raw_i = eval.statistic(f.values());
  result.standardization = mode;
  if (mode == Standardization::ClosedForm) {
    result.mean_null = eval.moments().mean;
    result.var_null = eval.moments().variance;
    result.z = eval.standardize(result.raw_i);
    return result;
  }

  require(permutations >= 100, ErrorCode::InvalidArgument, "empirical standardization needs M >= 100");
  PermutationStream stream(static_cast<std::size_t>(w.n()), seed);
  const auto perms = stream.take(permutations);
  const auto null = eval.permuted_statistics(f.values(), perms);
  const Eigen::Map<const Eigen::VectorXd> v(null.data(), static_cast<Eigen::Index>(null.size()));
  const double mean = v.mean();
  const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
  require(var > 0.0, ErrorCode::NumericalFailure, "permutation variance of Moran's I is zero");

  result.mean_null = mean;
  result.var_null = var;
  result.z = (result.raw_i - mean) / std::sqrt(var);
  const double observed = std::abs(result.raw_i - mean);
  std::size_t count = 0;
  for (double s : null) count += at_least(std::abs(s - mean), observed) ? 1 : 0;
  result.p_value = static_cast<double>(count + 1) / static_cast<double>(permutations + 1);
  result.permutations_used = permutations;
  return result;
}

double moran_permutation_pvalue(const Feature& f, const WeightMatrix& w, std::size_t permutations,
                                std::uint64_t seed, Alternative alternative) {
  require(permutations >= 100, ErrorCode::InvalidArgument, "permutation test needs M >= 100");
  const MoranEvaluator eval(w);
  const double observed = eval.statistic(f.values());
  PermutationStream stream(static_cast<std::size_t>(w.n()), seed);
  const auto perms = stream.take(permutations);
  const auto null = eval.permuted_statistics(f.values(), perms);

  // |z| ordering equals |I - E[I]| ordering, which stays defined when the
  // closed-form variance is zero.
  const double mean = eval.moments().mean;
  std::size_t count = 0;
  for (double s : null) {
    const bool extreme = alternative == Alternative::TwoSided
                             ? at_least(std::abs(s - mean), std::abs(observed - mean))
                             : at_least(s, observed);
    count += extreme ? 1 : 0;
  }
  return static_cast<double>(count + 1) / static_cast<double>(permutations + 1);
}

}  // namespace spatialbias
