#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "spatialbias/feature.hpp"

namespace spatialbias {

enum class BiasMetric { DisparateImpact, Pearson, Spearman, KS };
enum class PValueMethod { Asymptotic, Permutation, BootstrapNull };

std::string_view to_string(BiasMetric metric);
std::string_view to_string(PValueMethod method);
BiasMetric parse_bias_metric(std::string_view text);

struct BiasMetricReport {
  BiasMetric metric = BiasMetric::Pearson;
  double value = 0.0;
  std::optional<double> f_ratio;  // disparate impact only: rate(a=1) / rate(a=0)
  std::optional<double> p_value;
  Eigen::Index n = 0;
  std::optional<PValueMethod> method;
};

/// DI = max(f, 1/f) with f = P(y=1 | a=1) / P(y=1 | a=0). When exactly one
/// rate is zero DI is +infinity.
BiasMetricReport disparate_impact(const Feature& y, const Feature& a);

/// Pearson or Spearman (average ranks) with the two-sided t-test p-value on n-2 df.
BiasMetricReport correlation(const Feature& x, const Feature& y, BiasMetric method);

/// Two-sample Kolmogorov-Smirnov distance between the values in group 1 and group 0.
BiasMetricReport ks_statistic(const Feature& values, const Feature& groups);

double correlation_pvalue(double r, Eigen::Index n);

// Unchecked kernels used by resampling loops. They return nullopt where the
// Feature-level functions would throw.
std::optional<double> disparate_impact_value(const Eigen::VectorXd& y, const Eigen::VectorXd& a);
std::optional<double> pearson_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
std::optional<double> spearman_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
std::optional<double> ks_value(const Eigen::VectorXd& values, const Eigen::VectorXd& groups);

Eigen::VectorXd average_ranks(const Eigen::VectorXd& values);

/// KS against many group labelings of the same values; sorts once.
class KsEvaluator {
 public:
  explicit KsEvaluator(const Eigen::VectorXd& values);
  std::optional<double> operator()(const Eigen::VectorXd& groups) const;

 private:
  std::vector<Eigen::Index> order_;
  std::vector<bool> block_end_;  // true where the next sorted value differs
};

/// metric(first, second): DI(y=first, a=second), correlations of the pair, or
/// KS with `first` as the binary grouping and `second` as the values.
std::optional<double> metric_value(BiasMetric metric, const Eigen::VectorXd& first,
                                   const Eigen::VectorXd& second);

/// Upper-tail permutation p-value of a metric, permuting `first` against
/// fixed `second`; add-one corrected. Correlations are compared in absolute value.
double permutation_metric_pvalue(const Eigen::VectorXd& first, const Eigen::VectorXd& second,
                                 BiasMetric metric, std::size_t permutations, std::uint64_t seed);

}  // namespace spatialbias
