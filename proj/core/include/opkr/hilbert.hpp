#pragma once

#include <Eigen/Core>
#include <memory>
#include <stdexcept>

namespace opkr {

/// Raised when two values from different output spaces are combined.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SpaceKind { FiniteDim, DiscretizedL2 };

/// The output Hilbert space Y: either R^d with the plain dot product, or
/// L^2 over an interval discretized on a strictly increasing grid with
/// trapezoidal quadrature weights. Immutable after construction.
class OutputSpace {
 public:
  static std::shared_ptr<const OutputSpace> finite(int dim);
  static std::shared_ptr<const OutputSpace> discretized_l2(Eigen::VectorXd grid);
  /// Uniform grid with n points over [a, b].
  static std::shared_ptr<const OutputSpace> uniform_l2(double a, double b, int n);

  SpaceKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Eigen::VectorXd& grid() const { return grid_; }
  const Eigen::VectorXd& quad_weights() const { return weights_; }

  /// Weighted inner product of two coordinate vectors.
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double norm(const Eigen::VectorXd& a) const;

  bool same_as(const OutputSpace& other) const;

 private:
  OutputSpace(SpaceKind kind, int dim, Eigen::VectorXd grid, Eigen::VectorXd weights);

  SpaceKind kind_;
  int dim_;
  Eigen::VectorXd grid_;     // empty for FiniteDim
  Eigen::VectorXd weights_;  // all-ones for FiniteDim
};

using SpacePtr = std::shared_ptr<const OutputSpace>;

/// An element of an OutputSpace: coordinate values tagged with their space.
struct OutVec {
  SpacePtr space;
  Eigen::VectorXd values;

  OutVec() = default;
  OutVec(SpacePtr s, Eigen::VectorXd v);
};

OutVec zero_vec(const SpacePtr& space);

double inner(const OutVec& a, const OutVec& b);
double norm(const OutVec& a);
/// alpha * a + b
OutVec axpy(double alpha, const OutVec& a, const OutVec& b);

namespace detail {
void require_same_space(const OutVec& a, const OutVec& b);
}

}  // namespace opkr
