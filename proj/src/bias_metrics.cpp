#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "spatialbias/bias_metrics.hpp"
#include "spatialbias/error.hpp"
#include "spatialbias/moran.hpp"
#include "spatialbias/random.hpp"

namespace spatialbias {

std::string_view to_string(BiasMetric metric) {
  switch (metric) {
    case BiasMetric::DisparateImpact: return "disparate_impact";
    case BiasMetric::Pearson: return "pearson";
    case BiasMetric::Spearman: return "spearman";
    case BiasMetric::KS: return "ks";
  }
  return "?";
}

std::string_view to_string(PValueMethod method) {
  switch (method) {
    case PValueMethod::Asymptotic: return "asymptotic";
    case PValueMethod::Permutation: return "permutation";
    case PValueMethod::BootstrapNull: return "bootstrap_null";
  }
  return "?";
}

BiasMetric parse_bias_metric(std::string_view text) {
  if (text == "disparate_impact" || text == "di") return BiasMetric::DisparateImpact;
  if (text == "pearson") return BiasMetric::Pearson;
  if (text == "spearman") return BiasMetric::Spearman;
  if (text == "ks") return BiasMetric::KS;
  fail(ErrorCode::InvalidArgument, "unknown metric '" + std::string(text) + "'");
}

namespace {

/// Positive rates of y in groups a=1 and a=0; nullopt when a group is empty.
std::optional<std::pair<double, double>> group_rates(const Eigen::VectorXd& y, const Eigen::VectorXd& a) {
  double n1 = 0, n0 = 0, y1 = 0, y0 = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (a[i] > 0.5) {
      n1 += 1;
      y1 += y[i];
    } else {
      n0 += 1;
      y0 += y[i];
    }
  }
  if (n1 == 0 || n0 == 0) return std::nullopt;
  return std::make_pair(y1 / n1, y0 / n0);
}

void require_same_length(const Feature& x, const Feature& y) {
  require(x.size() == y.size(), ErrorCode::ShapeError,
          "feature lengths differ (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
}

}  // namespace

std::optional<double> disparate_impact_value(const Eigen::VectorXd& y, const Eigen::VectorXd& a) {
  const auto rates = group_rates(y, a);
  if (!rates) return std::nullopt;
  const auto [r1, r0] = *rates;
  if (r1 == 0.0 && r0 == 0.0) return std::nullopt;
  if (r1 == 0.0 || r0 == 0.0) return std::numeric_limits<double>::infinity();
  const double f = r1 / r0;
  return std::max(f, 1.0 / f);
}

BiasMetricReport disparate_impact(const Feature& y, const Feature& a) {
  require(y.is_binary() && a.is_binary(), ErrorCode::WrongKind, "disparate impact needs two binary features");
  require_same_length(y, a);
  const auto rates = group_rates(y.values(), a.values());
  require(rates.has_value(), ErrorCode::DegenerateGroups, "sensitive feature has an empty group");
  const auto [r1, r0] = *rates;
  require(r1 > 0.0 || r0 > 0.0, ErrorCode::UndefinedRatio, "outcome has no positives in either group");
  BiasMetricReport report;
  report.metric = BiasMetric::DisparateImpact;
  report.n = y.size();
  report.f_ratio = r0 == 0.0 ? std::numeric_limits<double>::infinity() : r1 / r0;
  report.value = *disparate_impact_value(y.values(), a.values());
  return report;
}

std::optional<double> pearson_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp((dx * dy).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

Eigen::VectorXd average_ranks(const Eigen::VectorXd& values) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  Eigen::VectorXd ranks(n);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return pearson_value(average_ranks(x), average_ranks(y));
}

double correlation_pvalue(double r, Eigen::Index n) {
  require(n >= 3, ErrorCode::InvalidArgument, "correlation test needs n >= 3");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

BiasMetricReport correlation(const Feature& x, const Feature& y, BiasMetric method) {
  require(method == BiasMetric::Pearson || method == BiasMetric::Spearman, ErrorCode::InvalidArgument,
          "correlation method must be pearson or spearman");
  require_same_length(x, y);
  require(!x.is_constant() && !y.is_constant(), ErrorCode::ConstantFeature, "correlation of a constant feature");
  const auto r = method == BiasMetric::Pearson ? pearson_value(x.values(), y.values())
                                               : spearman_value(x.values(), y.values());
  require(r.has_value(), ErrorCode::ConstantFeature, "correlation of a constant feature");
  BiasMetricReport report;
  report.metric = method;
  report.value = *r;
  report.n = x.size();
  report.p_value = correlation_pvalue(*r, x.size());
  report.method = PValueMethod::Asymptotic;
  return report;
}

KsEvaluator::KsEvaluator(const Eigen::VectorXd& values) : order_(static_cast<std::size_t>(values.size())) {
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  block_end_.resize(order_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) {
    block_end_[k] = k + 1 == order_.size() || values[order_[k + 1]] != values[order_[k]];
  }
}

std::optional<double> KsEvaluator::operator()(const Eigen::VectorXd& groups) const {
  double n1 = 0;
  for (Eigen::Index i = 0; i < groups.size(); ++i) n1 += groups[i] > 0.5 ? 1.0 : 0.0;
  const double n0 = static_cast<double>(groups.size()) - n1;
  if (n1 == 0 || n0 == 0) return std::nullopt;
  double c1 = 0, c0 = 0, best = 0;
  for (std::size_t k = 0; k < order_.size(); ++k) {
    if (groups[order_[k]] > 0.5) {
      c1 += 1;
    } else {
      c0 += 1;
    }
    if (block_end_[k]) best = std::max(best, std::abs(c1 / n1 - c0 / n0));
  }
  return best;
}

std::optional<double> ks_value(const Eigen::VectorXd& values, const Eigen::VectorXd& groups) {
  return KsEvaluator(values)(groups);
}

BiasMetricReport ks_statistic(const Feature& values, const Feature& groups) {
  require(groups.is_binary(), ErrorCode::WrongKind, "KS groups must be a binary feature");
  require_same_length(values, groups);
  const auto d = ks_value(values.values(), groups.values());
  require(d.has_value(), ErrorCode::DegenerateGroups, "KS needs both groups non-empty");
  BiasMetricReport report;
  report.metric = BiasMetric::KS;
  report.value = *d;
  report.n = values.size();
  return report;
}

std::optional<double> metric_value(BiasMetric metric, const Eigen::VectorXd& first, const Eigen::VectorXd& second) {
  switch (metric) {
    case BiasMetric::DisparateImpact: return disparate_impact_value(first, second);
    case BiasMetric::Pearson: return pearson_value(first, second);
    case BiasMetric::Spearman: return spearman_value(first, second);
    case BiasMetric::KS: return ks_value(second, first);
  }
  return std::nullopt;
}

double permutation_metric_pvalue(const Eigen::VectorXd& first, const Eigen::VectorXd& second, BiasMetric metric,
                                 std::size_t permutations, std::uint64_t seed) {
  require(first.size() == second.size(), ErrorCode::ShapeError, "metric inputs differ in length");
  require(permutations >= 1, ErrorCode::InvalidArgument, "need at least one permutation");
  const bool absolute = metric == BiasMetric::Pearson || metric == BiasMetric::Spearman;
  auto score = [&](const std::optional<double>& v) { return absolute ? std::abs(*v) : *v; };

  std::optional<KsEvaluator> ks;
  if (metric == BiasMetric::KS) ks.emplace(second);
  auto evaluate = [&](const Eigen::VectorXd& f) { return ks ? (*ks)(f) : metric_value(metric, f, second); };

  const auto observed = evaluate(first);
  require(observed.has_value(), ErrorCode::DegenerateGroups, "metric undefined on the observed data");
  const double target = score(observed);

  PermutationStream stream(static_cast<std::size_t>(first.size()), seed);
  std::size_t count = 0;
  for (std::size_t m = 0; m < permutations; ++m) {
    const auto v = evaluate(apply_permutation(first, stream.next()));
    if (v && at_least(score(v), target)) ++count;
  }
  return static_cast<double>(count + 1) / static_cast<double>(permutations + 1);
}

}  // namespace spatialbias
