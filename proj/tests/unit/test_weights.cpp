#include "helpers.hpp"

#include "spatialbias/weights.hpp"

using namespace spatialbias;
using testutil::ring;

TEST(Weights, InverseDistanceAndExponential) {
  const std::vector<Location> locs{{"a", 0, 0}, {"b", 3, 4}, {"c", 0, 1}};
  const auto w = build_weights(std::span<const Location>(locs), Kernel::inverse_distance());
  EXPECT_DOUBLE_EQ(w.weights()(0, 1), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(w.weights()(0, 2), 1.0);
  EXPECT_EQ(w.weights().diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(w.is_symmetric());

  const auto sq = build_weights(std::span<const Location>(locs), Kernel::inverse_distance(2.0));
  EXPECT_DOUBLE_EQ(sq.weights()(0, 1), 1.0 / 25.0);

  const auto e = build_weights(std::span<const Location>(locs), Kernel::exponential(2.0));
  EXPECT_DOUBLE_EQ(e.weights()(0, 1), std::exp(-2.5));
}

TEST(Weights, KHopReachability) {
  const Eigen::MatrixXd path = testutil::path(5);
  const auto one = build_weights(path, Kernel::k_hop(1));
  EXPECT_TRUE(one.weights().isApprox(path));
  const auto two = build_weights(path, Kernel::k_hop(2));
  EXPECT_EQ(two.weights()(0, 2), 1.0);
  EXPECT_EQ(two.weights()(0, 3), 0.0);
  EXPECT_EQ(two.weights()(2, 2), 0.0);
  const auto four = build_weights(path, Kernel::k_hop(4));
  EXPECT_EQ(four.weights().sum(), 20.0);
}

TEST(Weights, Errors) {
  const std::vector<Location> dup{{"a", 1, 1}, {"b", 1, 1}};
  EXPECT_ERROR_CODE(build_weights(std::span<const Location>(dup), Kernel::inverse_distance()),
                    DegenerateGeometry);
  const std::vector<Location> ok{{"a", 0, 0}, {"b", 1, 1}};
  EXPECT_ERROR_CODE(build_weights(std::span<const Location>(ok), Kernel::k_hop(1)), MissingAdjacency);
  EXPECT_ERROR_CODE(normalize_weights(WeightMatrix(Eigen::MatrixXd::Zero(3, 3)), Normalization::SpectralRadius),
                    ZeroMatrix);
  Eigen::MatrixXd bad = ring(4);
  bad(0, 0) = 1.0;
  EXPECT_ERROR_CODE(WeightMatrix{bad}, InvalidArgument);
  bad = ring(4);
  bad(0, 1) = -1.0;
  EXPECT_ERROR_CODE(WeightMatrix{bad}, InvalidArgument);
  EXPECT_ERROR_CODE(WeightMatrix{Eigen::MatrixXd::Zero(2, 3)}, ShapeError);
  EXPECT_ERROR_CODE(parse_kernel("gaussian"), InvalidArgument);
  EXPECT_ERROR_CODE(Kernel::exponential(0.0), InvalidArgument);
}

TEST(Weights, ParseKernelRoundTrip) {
  for (const std::string text : {"inverse_distance", "inverse_distance:2", "exponential:0.5", "k_hop:3", "custom"}) {
    EXPECT_EQ(parse_kernel(text).describe(), text);
  }
  EXPECT_EQ(parse_normalization(to_string(Normalization::RowStandardized)), Normalization::RowStandardized);
}

TEST(Weights, SpectralNormalizationOfRing) {
  const auto w = normalize_weights(WeightMatrix(ring(4)), Normalization::SpectralRadius);
  EXPECT_NEAR(spectral_radius(WeightMatrix(ring(4))), 2.0, 1e-12);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(w.weights()(i, (i + 1) % 4), 0.5, 1e-12);
    EXPECT_EQ(w.weights()(i, (i + 2) % 4), 0.0);
  }
  EXPECT_EQ(w.normalization(), Normalization::SpectralRadius);
}

TEST(Weights, RowStandardization) {
  Eigen::MatrixXd a = testutil::path(3);
  a(0, 2) = 3.0;
  const auto w = normalize_weights(WeightMatrix(a), Normalization::RowStandardized);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w.weights().row(i).sum(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(w.weights()(0, 2), 0.75);
}

TEST(Weights, EigenReconstructionAndSigns) {
  testutil::Rng rng(7);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) m(i, j) = m(j, i) = std::abs(testutil::normals(rng(), 1)[0]);
  const WeightMatrix w(m);
  const auto basis = spectral_decompose(w);
  const Eigen::MatrixXd rebuilt =
      basis.eigenvectors * basis.eigenvalues.asDiagonal() * basis.eigenvectors.transpose();
  EXPECT_LT((rebuilt - m).cwiseAbs().maxCoeff(), 1e-6);
  for (Eigen::Index k = 1; k < basis.size(); ++k) EXPECT_GE(basis.eigenvalues[k - 1], basis.eigenvalues[k]);
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    const auto col = basis.eigenvectors.col(k);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) > 1e-10) {
        EXPECT_GT(col[i], 0.0);
        break;
      }
    }
  }
}

TEST(Weights, DoubleCenteredBasisIsOrthogonalToOnes) {
  const auto w = testutil::grid_weights(5);
  const auto basis = spectral_decompose(w, true);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(25);
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    if (std::abs(basis.eigenvalues[k]) > 1e-8) EXPECT_LT(std::abs(ones.dot(basis.eigenvectors.col(k))), 1e-8);
  }
}

TEST(Weights, GridAdjacency) {
  const auto a = grid_adjacency(3, 4);
  EXPECT_EQ(a.sum(), 2.0 * (3 * 3 + 2 * 4));
  const auto locs = grid_locations(3, 4);
  EXPECT_EQ(locs[5].id, "r1c1");
  EXPECT_EQ(locs[5].x, 1.0);
}
