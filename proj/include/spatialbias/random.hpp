#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/mersenne_twister.hpp>

namespace spatialbias {

// Boost distributions are used throughout instead of <random> ones because
// their output is specified, so seeded streams agree across standard libraries.
using Rng = boost::random::mt19937_64;

/// Mixes a parent seed with a stream index (splitmix64 finalizer). Used to
/// hand every replicate, bootstrap draw or sub-stream its own generator.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b);

Eigen::VectorXd standard_normal_vector(Rng& rng, Eigen::Index n);

/// Component-wise Bernoulli draws with the given success probabilities.
Eigen::VectorXd bernoulli_vector(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& probs);

using Permutation = std::vector<std::uint32_t>;

/// Uniform random permutations of {0..n-1} drawn with Fisher-Yates from a
/// single seeded stream.
/// Seeded stream of uniform random permutations of 0..n-1. For n <= 8 the
/// stream draws without replacement from the n! - 1 non-identity permutations,
/// starting a fresh cycle once they are used up, so M = n! - 1 draws reproduce
/// full enumeration.
class PermutationStream {
 public:
  PermutationStream(std::size_t n, std::uint64_t seed);

  Permutation next();
  std::vector<Permutation> take(std::size_t count);

  static constexpr std::size_t kExhaustiveMaxN = 8;

 private:
  std::size_t n_;
  Rng rng_;
  std::set<Permutation> used_;
  std::size_t cycle_ = 0;
};

/// Fisher-Yates shuffle of indices using the supplied generator.
void shuffle_indices(Rng& rng, std::span<std::uint32_t> indices);

Eigen::VectorXd apply_permutation(const Eigen::Ref<const Eigen::VectorXd>& values,
                                  std::span<const std::uint32_t> perm);

}  // namespace spatialbias
