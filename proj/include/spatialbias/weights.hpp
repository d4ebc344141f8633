#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spatialbias {

struct Location {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

enum class KernelType { InverseDistance, Exponential, KHop, Custom };

/// Weight kernel. Inverse distance is w = 1/d^power (power 1 unless set);
/// exponential is w = exp(-d/scale); k-hop marks every location reachable
/// within `hops` adjacency steps.
struct Kernel {
  KernelType type = KernelType::InverseDistance;
  double scale = 1.0;
  double power = 1.0;
  int hops = 1;

  static Kernel inverse_distance(double power = 1.0);
  static Kernel exponential(double scale);
  static Kernel k_hop(int hops);
  static Kernel custom();

  std::string describe() const;
};

/// Parses "inverse_distance", "inverse_distance:2", "exponential:0.1",
/// "k_hop:2" or "custom".
Kernel parse_kernel(const std::string& text);

enum class Normalization { None, SpectralRadius, RowStandardized };

std::string to_string(Normalization mode);
Normalization parse_normalization(const std::string& text);

/// Dense nonnegative spatial weights with a zero diagonal.
class WeightMatrix {
 public:
  /// Validates a user-supplied matrix (square, finite, nonnegative, zero diagonal).
  WeightMatrix(Eigen::MatrixXd weights, Kernel kernel = Kernel::custom(),
               Normalization normalization = Normalization::None);

  Eigen::Index n() const { return weights_.rows(); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Kernel& kernel() const { return kernel_; }
  Normalization normalization() const { return normalization_; }

  /// (W + W^T) / 2
  Eigen::MatrixXd symmetrized() const;
  bool is_symmetric(double tol = 0.0) const;

 private:
  Eigen::MatrixXd weights_;
  Kernel kernel_;
  Normalization normalization_;
};

WeightMatrix build_weights(std::span<const Location> locations, const Kernel& kernel);

/// Adjacency input: used by k_hop, and taken as-is for the custom kernel.
WeightMatrix build_weights(const Eigen::MatrixXd& adjacency, const Kernel& kernel);

WeightMatrix normalize_weights(const WeightMatrix& w, Normalization mode);

/// Largest absolute eigenvalue of the symmetrized matrix.
double spectral_radius(const WeightMatrix& w);

struct EigenBasis {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column k pairs with eigenvalues[k]

  Eigen::Index size() const { return eigenvalues.size(); }
};

/// Eigendecomposition of (W + W^T)/2, or of M W M with M = I - 11^T/n when
/// `double_center` is set. Each eigenvector's first non-negligible entry is
/// made positive.
EigenBasis spectral_decompose(const WeightMatrix& w, bool double_center = false);

/// rows x cols integer lattice, ids "r<row>c<col>", row-major.
std::vector<Location> grid_locations(int rows, int cols);

/// Rook (4-neighbour) adjacency of the lattice produced by grid_locations.
Eigen::MatrixXd grid_adjacency(int rows, int cols);

}  // namespace spatialbias
