#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spatialbias/feature.hpp"
#include "spatialbias/weights.hpp"

namespace spatialbias {

enum class Scenario {
  AssocByAutocorr,        // y = sar(rho, e1), a = sar(rho, e2)
  AssocAndAutocorrAOnly,  // a0 = e2, y = beta a0 + e1, a = sar(rho, a0)
  AssocAndAutocorrBoth,   // a = sar(rho, e2), y = beta a + e1
  Proxy,                  // x = sar(rho, e2), y = beta x + e1, a = sar(rho, e2)
  EsfContinuous,          // y = sar(rho, e1), a = sar(rho2, e2)
  EsfDiscretePair,        // thresholded EsfContinuous
  EsfBetaAOnly,           // a = 1(sar(rho, e2) > 0), y = 1(beta e2 + e1 > 0)
  EsfBetaBoth,            // a = 1(sar(rho, e2) > 0), y = 1(beta a + e1 > 0)
};

std::string_view to_string(Scenario scenario);
Scenario parse_scenario(std::string_view text);
/// Scenarios whose outputs are always {0,1}.
bool inherently_discrete(Scenario scenario);

struct ScenarioSpec {
  Scenario scenario = Scenario::AssocByAutocorr;
  double rho = 0.0;
  double rho2 = 0.0;
  double beta = 5.0;
  Eigen::Index n = 0;
  bool discretize = false;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  Feature y;
  Feature a;
  std::optional<Feature> x;
  ScenarioSpec spec;
};

/// Solves (I - rho W) v = noise by LU on the symmetrized W, factorized once.
class SarSampler {
 public:
  SarSampler(const WeightMatrix& w, double rho);

  double rho() const { return rho_; }
  Eigen::VectorXd sample(const Eigen::VectorXd& noise) const;

 private:
  double rho_;
  Eigen::MatrixXd system_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

Eigen::VectorXd sar_sample(const WeightMatrix& w, double rho, const Eigen::VectorXd& noise);

/// Generates scenario datasets on one weight matrix, which is
/// spectral-radius normalized on construction. LU factors are cached per rho;
/// safe to share between threads.
class ScenarioGenerator {
 public:
  explicit ScenarioGenerator(const WeightMatrix& w);

  const WeightMatrix& weights() const { return w_; }
  SyntheticDataset generate(const ScenarioSpec& spec) const;

 private:
  const SarSampler& sampler(double rho) const;

  WeightMatrix w_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::unique_ptr<SarSampler>> samplers_;
};

SyntheticDataset generate(const ScenarioSpec& spec, const WeightMatrix& w);

/// m distinct indices of {0..n-1}, sorted, drawn without replacement.
std::vector<Eigen::Index> subsample_indices(Eigen::Index n, Eigen::Index m, std::uint64_t seed);

std::vector<Location> subsample(const std::vector<Location>& locations,
                                const std::vector<Eigen::Index>& indices);
Feature subsample(const Feature& feature, const std::vector<Eigen::Index>& indices);

}  // namespace spatialbias
