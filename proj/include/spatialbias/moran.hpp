#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spatialbias/feature.hpp"
#include "spatialbias/random.hpp"
#include "spatialbias/weights.hpp"

namespace spatialbias {

enum class Standardization { ClosedForm, Empirical };
enum class Alternative { TwoSided, Greater };

struct MoranResult {
  double raw_i = 0.0;
  double z = 0.0;
  double mean_null = 0.0;
  double var_null = 0.0;
  Standardization standardization = Standardization::ClosedForm;
  std::optional<double> p_value;
  std::optional<std::size_t> permutations_used;
};

/// Weight sums S0, S1, S2 and the normality-assumption moments of I.
struct MoranMoments {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

MoranMoments closed_form_moments(const WeightMatrix& w);

/// Reusable evaluator for one weight matrix. Permuted statistics only need
/// the quadratic form, since centering and the sum of squares are invariant
/// under relabelling.
class MoranEvaluator {
 public:
  explicit MoranEvaluator(const WeightMatrix& w);

  Eigen::Index n() const { return n_; }
  const MoranMoments& moments() const { return moments_; }

  /// Raw Moran's I. Throws ConstantFeature / ShapeError.
  double statistic(const Eigen::Ref<const Eigen::VectorXd>& values) const;

  /// I for each permutation of `values`, evaluated in blocks.
  std::vector<double> permuted_statistics(const Eigen::Ref<const Eigen::VectorXd>& values,
                                          std::span<const Permutation> perms) const;

  /// (I - mean) / sd under the closed-form moments. NumericalFailure when the
  /// null variance vanishes (e.g. complete graphs with equal weights).
  double standardize(double raw_i) const;

 private:
  Eigen::Index n_;
  Eigen::MatrixXd sym_;
  MoranMoments moments_;
};

double morans_i(const Feature& f, const WeightMatrix& w);

MoranResult standardized_morans_i(const Feature& f, const WeightMatrix& w,
                                  Standardization mode = Standardization::ClosedForm,
                                  std::size_t permutations = 999, std::uint64_t seed = 0);

/// Add-one corrected permutation p-value (count + 1) / (M + 1).
double moran_permutation_pvalue(const Feature& f, const WeightMatrix& w, std::size_t permutations,
                                std::uint64_t seed, Alternative alternative = Alternative::TwoSided);

/// `a >= b` with a small relative allowance so that statistics which are
/// equal in exact arithmetic count as ties.
bool at_least(double a, double b);
bool at_most(double a, double b);

}  // namespace spatialbias
