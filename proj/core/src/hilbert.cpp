#include "opkr/hilbert.hpp"

#include <cmath>

namespace opkr {

OutputSpace::OutputSpace(SpaceKind kind, int dim, Eigen::VectorXd grid,
                         Eigen::VectorXd weights)
    : kind_(kind), dim_(dim), grid_(std::move(grid)), weights_(std::move(weights)) {}

std::shared_ptr<const OutputSpace> OutputSpace::finite(int dim) {
  if (dim <= 0) throw std::invalid_argument("OutputSpace::finite: dim must be positive");
  return std::shared_ptr<const OutputSpace>(new OutputSpace(
      SpaceKind::FiniteDim, dim, Eigen::VectorXd(), Eigen::VectorXd::Ones(dim)));
}

std::shared_ptr<const OutputSpace> OutputSpace::discretized_l2(Eigen::VectorXd grid) {
  const auto n = static_cast<int>(grid.size());
  if (n < 2) throw std::invalid_argument("discretized_l2: need at least 2 grid points");
  for (int i = 1; i < n; ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("discretized_l2: grid must be strictly increasing");
  }
  // Trapezoidal weights: w_0 = h_1/2, w_i = (h_i + h_{i+1})/2, w_{n-1} = h_{n-1}/2.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int i = 0; i + 1 < n; ++i) {
    const double h = grid[i + 1] - grid[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return std::shared_ptr<const OutputSpace>(
      new OutputSpace(SpaceKind::DiscretizedL2, n, std::move(grid), std::move(w)));
}

std::shared_ptr<const OutputSpace> OutputSpace::uniform_l2(double a, double b, int n) {
  if (!(b > a)) throw std::invalid_argument("uniform_l2: need b > a");
  return discretized_l2(Eigen::VectorXd::LinSpaced(n, a, b));
}

double OutputSpace::inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (a.size() != dim_ || b.size() != dim_)
    throw DimensionError("OutputSpace::inner: size mismatch");
  if (kind_ == SpaceKind::FiniteDim) return a.dot(b);
  return a.cwiseProduct(weights_).dot(b);
}

double OutputSpace::norm(const Eigen::VectorXd& a) const {
  return std::sqrt(std::max(0.0, inner(a, a)));
}

bool OutputSpace::same_as(const OutputSpace& other) const {
  if (this == &other) return true;
  if (kind_ != other.kind_ || dim_ != other.dim_) return false;
  if (kind_ == SpaceKind::FiniteDim) return true;
  return grid_ == other.grid_;
}

OutVec::OutVec(SpacePtr s, Eigen::VectorXd v) : space(std::move(s)), values(std::move(v)) {
  if (!space) throw std::invalid_argument("OutVec: null space");
  if (values.size() != space->dim()) throw DimensionError("OutVec: size mismatch");
}

OutVec zero_vec(const SpacePtr& space) {
  return OutVec(space, Eigen::VectorXd::Zero(space->dim()));
}

namespace detail {
void require_same_space(const OutVec& a, const OutVec& b) {
  if (!a.space || !b.space || !a.space->same_as(*b.space))
    throw DimensionError("operands live in different output spaces");
}
}  // namespace detail

double inner(const OutVec& a, const OutVec& b) {
  detail::require_same_space(a, b);
  return a.space->inner(a.values, b.values);
}

double norm(const OutVec& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

OutVec axpy(double alpha, const OutVec& a, const OutVec& b) {
  detail::require_same_space(a, b);
  return OutVec(a.space, alpha * a.values + b.values);
}

}  // namespace opkr
