#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spatialbias/error.hpp"
#include "spatialbias/random.hpp"
#include "spatialbias/synthgen.hpp"

namespace spatialbias {

namespace {

struct ScenarioName {
  Scenario scenario;
  std::string_view name;
};

constexpr ScenarioName kScenarioNames[] = {
    {Scenario::AssocByAutocorr, "assoc_by_autocorr"},
    {Scenario::AssocAndAutocorrAOnly, "assoc_and_autocorr_a_only"},
    {Scenario::AssocAndAutocorrBoth, "assoc_and_autocorr_both"},
    {Scenario::Proxy, "proxy"},
    {Scenario::EsfContinuous, "esf_continuous"},
    {Scenario::EsfDiscretePair, "esf_discrete_pair"},
    {Scenario::EsfBetaAOnly, "esf_beta_a_only"},
    {Scenario::EsfBetaBoth, "esf_beta_both"},
};

Eigen::VectorXd indicator(const Eigen::VectorXd& v) {
  return (v.array() > 0.0).cast<double>().matrix();
}

Feature make_feature(const Eigen::VectorXd& v, bool binary) {
  return binary ? Feature::binary(indicator(v)) : Feature::continuous(v);
}

}  // namespace

std::string_view to_string(Scenario scenario) {
  for (const auto& entry : kScenarioNames) {
    if (entry.scenario == scenario) return entry.name;
  }
  return "?";
}

Scenario parse_scenario(std::string_view text) {
  for (const auto& entry : kScenarioNames) {
    if (entry.name == text) return entry.scenario;
  }
  fail(ErrorCode::InvalidArgument, "unknown scenario '" + std::string(text) + "'");
}

bool inherently_discrete(Scenario scenario) {
  return scenario == Scenario::EsfDiscretePair || scenario == Scenario::EsfBetaAOnly ||
         scenario == Scenario::EsfBetaBoth;
}

SarSampler::SarSampler(const WeightMatrix& w, double rho) : rho_(rho) {
  require(std::isfinite(rho), ErrorCode::InvalidArgument, "rho must be finite");
  system_ = Eigen::MatrixXd::Identity(w.n(), w.n()) - rho * w.symmetrized();
  lu_.compute(system_);
  require(lu_.rcond() > 1e-13, ErrorCode::SingularSystem,
          "I - rho W is singular at rho = " + std::to_string(rho));
}

Eigen::VectorXd SarSampler::sample(const Eigen::VectorXd& noise) const {
  require(noise.size() == system_.rows(), ErrorCode::ShapeError, "noise length does not match W");
  if (rho_ == 0.0) return noise;
  Eigen::VectorXd v = lu_.solve(noise);
  const double residual = (system_ * v - noise).lpNorm<Eigen::Infinity>();
  require(residual < 1e-8, ErrorCode::SingularSystem,
          "SAR solve residual " + std::to_string(residual) + " exceeds 1e-8");
  return v;
}

Eigen::VectorXd sar_sample(const WeightMatrix& w, double rho, const Eigen::VectorXd& noise) {
  return SarSampler(w, rho).sample(noise);
}

ScenarioGenerator::ScenarioGenerator(const WeightMatrix& w)
    : w_(normalize_weights(w, Normalization::SpectralRadius)) {}

const SarSampler& ScenarioGenerator::sampler(double rho) const {
  std::lock_guard lock(mutex_);
  auto& slot = samplers_[rho];
  if (!slot) slot = std::make_unique<SarSampler>(w_, rho);
  return *slot;
}

SyntheticDataset ScenarioGenerator::generate(const ScenarioSpec& spec) const {
  const Eigen::Index n = spec.n == 0 ? w_.n() : spec.n;
  require(n == w_.n(), ErrorCode::ShapeError,
          "scenario n = " + std::to_string(n) + " but W has " + std::to_string(w_.n()) + " locations");
  require(std::abs(spec.rho) < 1.0 && std::abs(spec.rho2) < 1.0, ErrorCode::InvalidArgument,
          "|rho| must be < 1 on a spectral-radius normalized W");
  require(std::isfinite(spec.beta), ErrorCode::InvalidArgument, "beta must be finite");

  Rng rng(spec.seed);
  const Eigen::VectorXd e1 = standard_normal_vector(rng, n);
  const Eigen::VectorXd e2 = standard_normal_vector(rng, n);
  const bool binary = spec.discretize || inherently_discrete(spec.scenario);
  auto sar = [&](double rho, const Eigen::VectorXd& noise) { return sampler(rho).sample(noise); };

  Eigen::VectorXd y, a;
  std::optional<Eigen::VectorXd> x;
  switch (spec.scenario) {
    case Scenario::AssocByAutocorr:
      y = sar(spec.rho, e1);
      a = sar(spec.rho, e2);
      break;
    case Scenario::AssocAndAutocorrAOnly:
      y = spec.beta * e2 + e1;
      a = sar(spec.rho, e2);
      break;
    case Scenario::AssocAndAutocorrBoth:
      a = sar(spec.rho, e2);
      y = spec.beta * a + e1;
      break;
    case Scenario::Proxy:
      x = sar(spec.rho, e2);
      y = spec.beta * *x + e1;
      a = *x;
      break;
    case Scenario::EsfContinuous:
    case Scenario::EsfDiscretePair:
      y = sar(spec.rho, e1);
      a = sar(spec.rho2, e2);
      break;
    case Scenario::EsfBetaAOnly:
      a = sar(spec.rho, e2);
      y = spec.beta * e2 + e1;
      break;
    case Scenario::EsfBetaBoth:
      a = indicator(sar(spec.rho, e2));
      y = spec.beta * a + e1;
      break;
  }

  SyntheticDataset out{make_feature(y, binary), make_feature(a, binary), std::nullopt, spec};
  out.spec.n = n;
  if (x) out.x = make_feature(*x, binary);
  return out;
}

SyntheticDataset generate(const ScenarioSpec& spec, const WeightMatrix& w) {
  return ScenarioGenerator(w).generate(spec);
}

std::vector<Eigen::Index> subsample_indices(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  require(m >= 1 && m <= n, ErrorCode::InvalidArgument,
          "subsample size " + std::to_string(m) + " must lie in [1, " + std::to_string(n) + "]");
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0u);
  Rng rng(seed);
  shuffle_indices(rng, idx);
  std::vector<Eigen::Index> out(idx.begin(), idx.begin() + m);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Location> subsample(const std::vector<Location>& locations, const std::vector<Eigen::Index>& indices) {
  std::vector<Location> out;
  out.reserve(indices.size());
  for (Eigen::Index i : indices) {
    require(i >= 0 && static_cast<std::size_t>(i) < locations.size(), ErrorCode::InvalidArgument,
            "subsample index out of range");
    out.push_back(locations[static_cast<std::size_t>(i)]);
  }
  return out;
}

Feature subsample(const Feature& feature, const std::vector<Eigen::Index>& indices) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    require(indices[k] >= 0 && indices[k] < feature.size(), ErrorCode::InvalidArgument,
            "subsample index out of range");
    v[static_cast<Eigen::Index>(k)] = feature.values()[indices[k]];
  }
  return Feature::of_kind(feature.kind(), std::move(v));
}

}  // namespace spatialbias
