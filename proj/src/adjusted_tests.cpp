#include <numeric>
#include <string>

#include "spatialbias/adjusted_tests.hpp"
#include "spatialbias/error.hpp"
#include "spatialbias/moran.hpp"
#include "spatialbias/random.hpp"

namespace spatialbias {

std::string_view to_string(AdjustedCase c) {
  switch (c) {
    case AdjustedCase::I: return "I";
    case AdjustedCase::II: return "II";
    case AdjustedCase::III: return "III";
  }
  return "?";
}

namespace {

// Sub-stream indices under the test seed.
constexpr std::uint64_t kPermutationStream = 1;
constexpr std::uint64_t kBootstrapStream = 2;

void check_pair(const Feature& y, const Feature& a) {
  require(y.size() == a.size(), ErrorCode::ShapeError,
          "feature lengths differ (" + std::to_string(y.size()) + " vs " + std::to_string(a.size()) + ")");
}

void check_bootstrap(std::size_t replicates) {
  require(replicates >= 100, ErrorCode::InvalidArgument,
          "bootstrap needs at least 100 replicates, got " + std::to_string(replicates));
}

double upper_tail(const std::vector<double>& null, double observed) {
  std::size_t count = 0;
  for (double v : null) count += at_least(v, observed) ? 1 : 0;
  return static_cast<double>(count + 1) / static_cast<double>(null.size() + 1);
}

}  // namespace

BootstrapNull bootstrap_pair_null(const Eigen::VectorXd& p_y, const Eigen::VectorXd& p_a, BiasMetric metric,
                                  std::size_t replicates, std::uint64_t seed) {
  require(p_y.size() == p_a.size(), ErrorCode::ShapeError, "probability vectors differ in length");
  BootstrapNull out;
  out.metrics.reserve(replicates);
  for (std::size_t b = 0; b < replicates; ++b) {
    Rng rng(derive_seed(seed, b));
    for (;;) {
      const Eigen::VectorXd y = bernoulli_vector(rng, p_y);
      const Eigen::VectorXd a = bernoulli_vector(rng, p_a);
      if (const auto v = metric_value(metric, y, a)) {
        out.metrics.push_back(metric == BiasMetric::Pearson || metric == BiasMetric::Spearman ? std::abs(*v) : *v);
        break;
      }
      require(++out.resamples <= replicates, ErrorCode::DegenerateBootstrap,
              "more than " + std::to_string(replicates) + " degenerate bootstrap draws");
    }
  }
  return out;
}

BootstrapNull bootstrap_ks_null(const Eigen::VectorXd& probs, const Eigen::VectorXd& fitted,
                                const Eigen::VectorXd& residuals, MixedNullNoise noise, std::size_t replicates,
                                std::uint64_t seed) {
  require(probs.size() == fitted.size(), ErrorCode::ShapeError, "probabilities and fitted values differ in length");
  require(noise == MixedNullNoise::None || residuals.size() == fitted.size(), ErrorCode::ShapeError,
          "residuals and fitted values differ in length");
  BootstrapNull out;
  out.metrics.reserve(replicates);
  std::optional<KsEvaluator> fixed;
  if (noise == MixedNullNoise::None) fixed.emplace(fitted);
  std::vector<std::uint32_t> perm(static_cast<std::size_t>(fitted.size()));

  for (std::size_t b = 0; b < replicates; ++b) {
    Rng rng(derive_seed(seed, b));
    Eigen::VectorXd groups;
    for (;;) {
      groups = bernoulli_vector(rng, probs);
      const double ones = groups.sum();
      if (ones > 0.0 && ones < static_cast<double>(groups.size())) break;
      require(++out.resamples <= replicates, ErrorCode::DegenerateBootstrap,
              "more than " + std::to_string(replicates) + " degenerate bootstrap draws");
    }
    if (fixed) {
      out.metrics.push_back(*(*fixed)(groups));
    } else {
      std::iota(perm.begin(), perm.end(), 0u);
      shuffle_indices(rng, perm);
      const Eigen::VectorXd values = fitted + apply_permutation(residuals, perm);
      out.metrics.push_back(*ks_value(values, groups));
    }
  }
  return out;
}

AdjustedTestResult adjusted_test_continuous(const Feature& y, const Feature& a, const EigenBasis& basis,
                                            const Eigen::MatrixXd& covariates, const AdjustedTestOptions& options) {
  require(!y.is_binary() && !a.is_binary(), ErrorCode::WrongKind, "Case I needs two continuous features");
  check_pair(y, a);
  const BiasMetric metric = options.metric.value_or(BiasMetric::Pearson);
  require(metric == BiasMetric::Pearson || metric == BiasMetric::Spearman, ErrorCode::InvalidArgument,
          "Case I uses pearson or spearman");

  AdjustedTestResult result;
  result.test_case = AdjustedCase::I;
  result.metric = metric;
  result.seed = options.seed;
  const auto raw = correlation(y, a, metric);
  result.metric_unadjusted = raw.value;
  result.p_unadjusted = *raw.p_value;

  result.fits.push_back(esf_fit(y, basis, covariates, Family::Linear, options.esf));
  result.fits.push_back(esf_fit(a, basis, covariates, Family::Linear, options.esf));
  const auto adjusted = correlation(sanitize(y, result.fits[0]), sanitize(a, result.fits[1]), metric);
  result.metric_adjusted = adjusted.value;
  result.p_adjusted = *adjusted.p_value;
  return result;
}

AdjustedTestResult adjusted_test_discrete(const Feature& y, const Feature& a, const EigenBasis& basis,
                                          const Eigen::MatrixXd& covariates, const AdjustedTestOptions& options) {
  require(y.is_binary() && a.is_binary(), ErrorCode::WrongKind, "Case II needs two binary features");
  check_pair(y, a);
  check_bootstrap(options.bootstrap);
  const BiasMetric metric = options.metric.value_or(BiasMetric::DisparateImpact);
  require(metric != BiasMetric::KS, ErrorCode::InvalidArgument, "KS needs a continuous feature");

  AdjustedTestResult result;
  result.test_case = AdjustedCase::II;
  result.metric = metric;
  result.seed = options.seed;
  result.bootstrap = options.bootstrap;
  double observed = 0.0;
  if (metric == BiasMetric::DisparateImpact) {
    observed = disparate_impact(y, a).value;
  } else {
    observed = std::abs(correlation(y, a, metric).value);
  }
  result.metric_unadjusted = observed;
  result.p_unadjusted = permutation_metric_pvalue(y.values(), a.values(), metric, options.permutations,
                                                  derive_seed(options.seed, kPermutationStream));

  result.fits.push_back(esf_fit(y, basis, covariates, Family::Logistic, options.esf));
  result.fits.push_back(esf_fit(a, basis, covariates, Family::Logistic, options.esf));
  auto null = bootstrap_pair_null(result.fits[0].fitted_probs, result.fits[1].fitted_probs, metric,
                                  options.bootstrap, derive_seed(options.seed, kBootstrapStream));
  result.resamples = null.resamples;
  result.p_adjusted = upper_tail(null.metrics, observed);
  if (options.keep_null) result.null_metrics = std::move(null.metrics);
  return result;
}

AdjustedTestResult adjusted_test_mixed(const Feature& discrete, const Feature& continuous, const EigenBasis& basis,
                                       const Eigen::MatrixXd& covariates, const AdjustedTestOptions& options) {
  require(discrete.is_binary() && !continuous.is_binary(), ErrorCode::WrongKind,
          "Case III needs one binary and one continuous feature");
  check_pair(discrete, continuous);
  check_bootstrap(options.bootstrap);
  require(!options.metric || *options.metric == BiasMetric::KS, ErrorCode::InvalidArgument, "Case III uses KS");

  AdjustedTestResult result;
  result.test_case = AdjustedCase::III;
  result.metric = BiasMetric::KS;
  result.seed = options.seed;
  result.bootstrap = options.bootstrap;
  const double observed = ks_statistic(continuous, discrete).value;
  result.metric_unadjusted = observed;
  result.p_unadjusted = permutation_metric_pvalue(discrete.values(), continuous.values(), BiasMetric::KS,
                                                  options.permutations, derive_seed(options.seed, kPermutationStream));

  result.fits.push_back(esf_fit(discrete, basis, covariates, Family::Logistic, options.esf));
  result.fits.push_back(esf_fit(continuous, basis, covariates, Family::Linear, options.esf));
  auto null = bootstrap_ks_null(result.fits[0].fitted_probs, result.fits[1].fitted, result.fits[1].residuals,
                                options.mixed_noise, options.bootstrap, derive_seed(options.seed, kBootstrapStream));
  result.resamples = null.resamples;
  result.p_adjusted = upper_tail(null.metrics, observed);
  if (options.keep_null) result.null_metrics = std::move(null.metrics);
  return result;
}

AdjustedTestResult adjusted_test(const Feature& y, const Feature& a, const EigenBasis& basis,
                                 const Eigen::MatrixXd& covariates, const AdjustedTestOptions& options) {
  if (!y.is_binary() && !a.is_binary()) return adjusted_test_continuous(y, a, basis, covariates, options);
  if (y.is_binary() && a.is_binary()) return adjusted_test_discrete(y, a, basis, covariates, options);
  return y.is_binary() ? adjusted_test_mixed(y, a, basis, covariates, options)
                       : adjusted_test_mixed(a, y, basis, covariates, options);
}

}  // namespace spatialbias
