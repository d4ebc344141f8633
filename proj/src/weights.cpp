#include "spatialbias/weights.hpp"

#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spatialbias/error.hpp"
#include "spatialbias/io.hpp"

namespace spatialbias {

Kernel Kernel::inverse_distance(double power) {
  require(power > 0.0 && std::isfinite(power), ErrorCode::InvalidArgument,
          "inverse-distance power must be positive");
  Kernel k;
  k.type = KernelType::InverseDistance;
  k.power = power;
  return k;
}

Kernel Kernel::exponential(double scale) {
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::InvalidArgument,
          "exponential scale V must be positive");
  Kernel k;
  k.type = KernelType::Exponential;
  k.scale = scale;
  return k;
}

Kernel Kernel::k_hop(int hops) {
  require(hops >= 1, ErrorCode::InvalidArgument, "k_hop needs k >= 1");
  Kernel k;
  k.type = KernelType::KHop;
  k.hops = hops;
  return k;
}

Kernel Kernel::custom() {
  Kernel k;
  k.type = KernelType::Custom;
  return k;
}

std::string Kernel::describe() const {
  switch (type) {
    case KernelType::InverseDistance:
      return power == 1.0 ? "inverse_distance" : "inverse_distance:" + format_double(power);
    case KernelType::Exponential: return "exponential:" + format_double(scale);
    case KernelType::KHop: return "k_hop:" + std::to_string(hops);
    case KernelType::Custom: return "custom";
  }
  return "custom";
}

Kernel parse_kernel(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const bool has_arg = colon != std::string::npos;
  const std::string arg = has_arg ? text.substr(colon + 1) : std::string();
  if (name == "inverse_distance") {
    return Kernel::inverse_distance(has_arg ? parse_double(arg, "kernel power") : 1.0);
  }
  if (name == "exponential") {
    require(has_arg, ErrorCode::InvalidArgument, "exponential kernel needs a scale, e.g. exponential:0.1");
    return Kernel::exponential(parse_double(arg, "kernel scale"));
  }
  if (name == "k_hop") {
    require(has_arg, ErrorCode::InvalidArgument, "k_hop kernel needs k, e.g. k_hop:2");
    const double k = parse_double(arg, "k_hop k");
    require(k == std::floor(k), ErrorCode::InvalidArgument, "k_hop k must be an integer");
    return Kernel::k_hop(static_cast<int>(k));
  }
  if (name == "custom") return Kernel::custom();
  fail(ErrorCode::InvalidArgument, "unknown kernel '" + text + "'");
}

std::string to_string(Normalization mode) {
  switch (mode) {
    case Normalization::None: return "none";
    case Normalization::SpectralRadius: return "spectral_radius";
    case Normalization::RowStandardized: return "row_standardized";
  }
  return "none";
}

Normalization parse_normalization(const std::string& text) {
  if (text == "none") return Normalization::None;
  if (text == "spectral_radius") return Normalization::SpectralRadius;
  if (text == "row_standardized") return Normalization::RowStandardized;
  fail(ErrorCode::InvalidArgument, "unknown normalization '" + text + "'");
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd weights, Kernel kernel, Normalization normalization)
    : weights_(std::move(weights)), kernel_(kernel), normalization_(normalization) {
  require(weights_.rows() == weights_.cols(), ErrorCode::ShapeError, "weight matrix must be square");
  require(weights_.rows() >= 2, ErrorCode::ShapeError, "weight matrix needs n >= 2");
  require(weights_.allFinite(), ErrorCode::InvalidArgument, "weights must be finite");
  require((weights_.array() >= 0.0).all(), ErrorCode::InvalidArgument, "weights must be nonnegative");
  require((weights_.diagonal().array() == 0.0).all(), ErrorCode::InvalidArgument,
          "weight matrix diagonal must be zero");
}

Eigen::MatrixXd WeightMatrix::symmetrized() const {
  return 0.5 * (weights_ + weights_.transpose());
}

bool WeightMatrix::is_symmetric(double tol) const {
  return (weights_ - weights_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

WeightMatrix build_weights(std::span<const Location> locations, const Kernel& kernel) {
  require(kernel.type != KernelType::KHop, ErrorCode::MissingAdjacency,
          "k_hop weights need an adjacency matrix");
  require(kernel.type != KernelType::Custom, ErrorCode::InvalidArgument,
          "custom weights are supplied as a matrix, not built from locations");
  const auto n = static_cast<Eigen::Index>(locations.size());
  require(n >= 2, ErrorCode::ShapeError, "need at least 2 locations");

  std::set<std::string> ids;
  for (const auto& loc : locations) {
    require(std::isfinite(loc.x) && std::isfinite(loc.y), ErrorCode::InvalidArgument,
            "location '" + loc.id + "' has non-finite coordinates");
    require(ids.insert(loc.id).second, ErrorCode::InvalidArgument, "duplicate location id '" + loc.id + "'");
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& a = locations[static_cast<std::size_t>(i)];
      const auto& b = locations[static_cast<std::size_t>(j)];
      const double d = std::hypot(a.x - b.x, a.y - b.y);
      if (d <= 0.0) {
        fail(ErrorCode::DegenerateGeometry,
             "locations '" + a.id + "' and '" + b.id + "' coincide");
      }
      const double v = kernel.type == KernelType::InverseDistance ? std::pow(d, -kernel.power)
                                                                   : std::exp(-d / kernel.scale);
      w(i, j) = v;
      w(j, i) = v;
    }
  }
  return WeightMatrix(std::move(w), kernel, Normalization::None);
}

WeightMatrix build_weights(const Eigen::MatrixXd& adjacency, const Kernel& kernel) {
  require(adjacency.rows() == adjacency.cols(), ErrorCode::ShapeError, "adjacency must be square");
  const Eigen::Index n = adjacency.rows();
  if (kernel.type == KernelType::Custom) return WeightMatrix(adjacency, kernel, Normalization::None);
  require(kernel.type == KernelType::KHop, ErrorCode::InvalidArgument,
          "distance kernels are built from locations");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = adjacency(i, j);
      require(v == 0.0 || v == 1.0, ErrorCode::InvalidArgument, "adjacency entries must be 0 or 1");
    }
  }

  // Breadth-first search to depth k from every location.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> depth(static_cast<std::size_t>(n));
  for (Eigen::Index src = 0; src < n; ++src) {
    std::fill(depth.begin(), depth.end(), -1);
    std::deque<Eigen::Index> queue{src};
    depth[static_cast<std::size_t>(src)] = 0;
    while (!queue.empty()) {
      const Eigen::Index u = queue.front();
      queue.pop_front();
      const int du = depth[static_cast<std::size_t>(u)];
      if (du == kernel.hops) continue;
      for (Eigen::Index v = 0; v < n; ++v) {
        if (v == u || adjacency(u, v) == 0.0 || depth[static_cast<std::size_t>(v)] >= 0) continue;
        depth[static_cast<std::size_t>(v)] = du + 1;
        queue.push_back(v);
      }
    }
    for (Eigen::Index v = 0; v < n; ++v) {
      if (v != src && depth[static_cast<std::size_t>(v)] > 0) w(src, v) = 1.0;
    }
  }
  return WeightMatrix(std::move(w), kernel, Normalization::None);
}

double spectral_radius(const WeightMatrix& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w.symmetrized(), Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorCode::NumericalFailure, "eigensolver did not converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

WeightMatrix normalize_weights(const WeightMatrix& w, Normalization mode) {
  require(w.weights().cwiseAbs().maxCoeff() > 0.0, ErrorCode::ZeroMatrix, "weight matrix is all zero");
  Eigen::MatrixXd out = w.weights();
  switch (mode) {
    case Normalization::None:
      break;
    case Normalization::SpectralRadius: {
      const double radius = spectral_radius(w);
      require(radius > 0.0, ErrorCode::ZeroMatrix, "symmetrized weights have zero spectral radius");
      out /= radius;
      break;
    }
    case Normalization::RowStandardized:
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double s = out.row(i).sum();
        if (s > 0.0) out.row(i) /= s;
      }
      break;
  }
  return WeightMatrix(std::move(out), w.kernel(), mode);
}

EigenBasis spectral_decompose(const WeightMatrix& w, bool double_center) {
  Eigen::MatrixXd target = w.symmetrized();
  const Eigen::Index n = w.n();
  if (double_center) {
    const Eigen::MatrixXd m =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    target = m * target * m;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(target);
  require(solver.info() == Eigen::Success, ErrorCode::NumericalFailure, "eigensolver did not converge");

  EigenBasis basis;
  basis.eigenvalues = solver.eigenvalues().reverse();
  basis.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < n; ++k) {
    auto col = basis.eigenvectors.col(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col[i]) > 1e-10) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
  }
  return basis;
}

std::vector<Location> grid_locations(int rows, int cols) {
  require(rows >= 1 && cols >= 1 && rows * cols >= 2, ErrorCode::InvalidArgument,
          "grid needs at least 2 cells");
  std::vector<Location> out;
  out.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out.push_back({"r" + std::to_string(r) + "c" + std::to_string(c), static_cast<double>(c),
                     static_cast<double>(r)});
    }
  }
  return out;
}

Eigen::MatrixXd grid_adjacency(int rows, int cols) {
  const int n = rows * cols;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      if (c + 1 < cols) a(i, i + 1) = a(i + 1, i) = 1.0;
      if (r + 1 < rows) a(i, i + cols) = a(i + cols, i) = 1.0;
    }
  }
  return a;
}

}  // namespace spatialbias
