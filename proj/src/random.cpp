#include "spatialbias/random.hpp"

#include <numeric>
#include <utility>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace spatialbias {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return splitmix64(splitmix64(parent) ^ (index + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(parent, a), b);
}

Eigen::VectorXd standard_normal_vector(Rng& rng, Eigen::Index n) {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Eigen::VectorXd bernoulli_vector(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& probs) {
  Eigen::VectorXd v(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    boost::random::bernoulli_distribution<double> coin(probs[i]);
    v[i] = coin(rng) ? 1.0 : 0.0;
  }
  return v;
}

void shuffle_indices(Rng& rng, std::span<std::uint32_t> indices) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(indices[i - 1], indices[pick(rng)]);
  }
}

PermutationStream::PermutationStream(std::size_t n, std::uint64_t seed) : n_(n), rng_(seed) {
  if (n_ >= 2 && n_ <= kExhaustiveMaxN) {
    cycle_ = 1;
    for (std::size_t k = 2; k <= n_; ++k) cycle_ *= k;
    cycle_ -= 1;
  }
}

Permutation PermutationStream::next() {
  Permutation perm(n_);
  std::iota(perm.begin(), perm.end(), 0u);
  const Permutation identity = perm;
  if (cycle_ == 0) {
    shuffle_indices(rng_, perm);
    return perm;
  }
  if (used_.size() == cycle_) used_.clear();
  do {
    perm = identity;
    shuffle_indices(rng_, perm);
  } while (perm == identity || used_.count(perm) > 0);
  used_.insert(perm);
  return perm;
}

std::vector<Permutation> PermutationStream::take(std::size_t count) {
  std::vector<Permutation> out;
  out.reserve(count);
  for (std::size_t m = 0; m < count; ++m) out.push_back(next());
  return out;
}

Eigen::VectorXd apply_permutation(const Eigen::Ref<const Eigen::VectorXd>& values,
                                  std::span<const std::uint32_t> perm) {
  Eigen::VectorXd out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) out[i] = values[perm[static_cast<std::size_t>(i)]];
  return out;
}

}  // namespace spatialbias
