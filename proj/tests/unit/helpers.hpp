#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "spatialbias/error.hpp"
#include "spatialbias/random.hpp"
#include "spatialbias/weights.hpp"

namespace testutil {

using namespace spatialbias;

// Expects `stmt` to throw spatialbias::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected)                                   \
  do {                                                                      \
    try {                                                                   \
      stmt;                                                                 \
      ADD_FAILURE() << "no exception from " #stmt;                          \
    } catch (const spatialbias::Error& e) {                                 \
      EXPECT_EQ(e.code(), spatialbias::ErrorCode::expected) << e.what();    \
    }                                                                       \
  } while (0)

inline Eigen::MatrixXd ring(int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, (i + 1) % n) = 1.0;
    a((i + 1) % n, i) = 1.0;
  }
  return a;
}

inline Eigen::MatrixXd path(int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = 1.0;
  return a;
}

inline WeightMatrix grid_weights(int side, Kernel k = Kernel::inverse_distance(2.0)) {
  const auto locs = grid_locations(side, side);
  return build_weights(std::span<const Location>(locs), k);
}

// Every permutation of {0..n-1} in lexicographic order.
inline std::vector<Permutation> all_permutations(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0u);
  std::vector<Permutation> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline Eigen::VectorXd normals(std::uint64_t seed, Eigen::Index n) {
  Rng rng(seed);
  return standard_normal_vector(rng, n);
}

inline Eigen::VectorXd coins(std::uint64_t seed, Eigen::Index n, double p = 0.5) {
  Rng rng(seed);
  return bernoulli_vector(rng, Eigen::VectorXd::Constant(n, p));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spatialbias_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testutil
