#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "opkr/hilbert.hpp"

namespace opkr {

using Input = Eigen::VectorXd;

enum class ScalarKernelKind { Gaussian, Linear, Constant };
enum class InputKind { Vector, Function };

/// Scalar-valued positive-definite kernel k on vector or (discretized)
/// function inputs. Function inputs use the quadrature-weighted inner
/// product of their space.
struct ScalarKernel {
  ScalarKernelKind kind = ScalarKernelKind::Gaussian;
  double bandwidth = 1.0;         // Gaussian
  double constant_value = 1.0;    // Constant
  double input_norm_bound = 1.0;  // Linear: declared bound on ||x||

  static ScalarKernel gaussian(double bandwidth);
  static ScalarKernel linear(double input_norm_bound);
  static ScalarKernel constant(double value);

  /// weights is null for plain vector inputs.
  double eval(const Input& x, const Input& z, const Eigen::VectorXd* weights) const;
  /// sup_x k(x,x) (over the declared input domain for Linear).
  double sup_diag() const;
};

enum class OperatorKernelKind {
  ScalarTimesIdentity,
  SeparableMultiplication,
  NonSeparableMultiplication,
  RankOneSum,
  RankOneOnly,
};

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

enum class HSVerdict { HSLikely, NotHS };

struct HSAuditResult {
  HSVerdict verdict;
  double slope;  // log-log slope of trace vs resolution
  std::vector<int> resolutions;
  std::vector<double> traces;
};

class OperatorKernel;

/// Structure-tagged Gram of [K(x_i, x_j)] over m training inputs.
struct GramOperator {
  enum class Structure { PerGridPoint, RankOneSplit };
  Structure structure;
  int m = 0;
  SpacePtr space;

  // Scalar kernel matrix [k(x_i,x_j)] (all-ones for the non-separable kind).
  Eigen::MatrixXd kmat;

  // PerGridPoint: A_t = kmat .* (p_t p_t^T) with p_t = point_factor.col(t).
  Eigen::MatrixXd point_factor;  // m x dim

  // RankOneSplit: K(x_i,x_j) = k_ij (along y0hat0hat + perp (I - y0hat y0hat*)).
  Eigen::VectorXd y0hat;
  double along_factor = 1.0;
  double perp_factor = 1.0;

  /// Per-grid-point coefficient matrix A_t (m x m).
  Eigen::MatrixXd point_matrix(int t) const;

  /// Dense (m*dim x m*dim) symmetric matrix in the W^(1/2)-orthonormal
  /// coordinates of Y^m. Refused above the size cap: dense block systems
  /// scale as (m*dim)^3.
  Eigen::MatrixXd dense(int max_size = 4096) const;

  /// Smallest and largest eigenvalue of the dense form (PSD audit).
  std::pair<double, double> eigen_range(int max_size = 4096) const;
};

/// Operator-valued kernel K(x,z) in L(Y) with an analytic bound kappa_sq
/// on sup_x ||K(x,x)||_op.
class OperatorKernel {
 public:
  static OperatorKernel scalar_times_identity(ScalarKernel k, SpacePtr output_space,
                                              InputKind input_kind,
                                              SpacePtr input_space = nullptr);
  /// |multiplier(t)| <= sup_bound_C must hold on the whole grid.
  static OperatorKernel separable_multiplication(ScalarKernel k, OutVec multiplier,
                                                 double sup_bound_C,
                                                 InputKind input_kind = InputKind::Function,
                                                 SpacePtr input_space = nullptr);
  /// Inputs are functions on the output grid with ||x||_inf <= sup_bound_B;
  /// the bound is validated on every supplied input.
  static OperatorKernel non_separable_multiplication(double sup_bound_B,
                                                     SpacePtr output_space);
  static OperatorKernel rank_one_sum(ScalarKernel k, OutVec y0, InputKind input_kind,
                                     SpacePtr input_space = nullptr);
  /// K(x,z)y = k(x,z) <y,y0> y0 (the Hilbert-Schmidt summand on its own).
  static OperatorKernel rank_one_only(ScalarKernel k, OutVec y0, InputKind input_kind,
                                      SpacePtr input_space = nullptr);

  OperatorKernelKind kind() const { return kind_; }
  const SpacePtr& output_space() const { return output_space_; }
  InputKind input_kind() const { return input_kind_; }
  const SpacePtr& input_space() const { return input_space_; }
  const ScalarKernel& scalar() const { return scalar_; }
  const OutVec& multiplier() const { return multiplier_; }
  const OutVec& y0() const { return y0_; }
  double sup_bound() const { return sup_bound_; }

  double kappa_sq() const { return kappa_sq_; }
  double kappa() const;

  /// k(x1,x2); 1 for the non-separable kind (absorbed in the multiplier).
  double scalar_eval(const Input& x1, const Input& x2) const;

  /// K(x1,x2) y
  OutVec apply(const Input& x1, const Input& x2, const OutVec& y) const;

  /// Largest eigenvalue of the self-adjoint PSD operator K(x,x) by power
  /// iteration in the Y geometry.
  PowerIterationResult operator_norm_numeric(const Input& x, double tol,
                                             int max_iters = 10000) const;

  /// Trace of K(x,x) in the quadrature-orthonormal basis at the current
  /// resolution.
  double trace_discretized(const Input& x) const;

  GramOperator gram(const std::vector<Input>& xs) const;

  /// ||sum_j K(., x_j) c_j||_H^2 = sum_ij <K(x_i,x_j) c_j, c_i>_Y
  double reproducing_norm_sq(const std::vector<Input>& xs,
                             const std::vector<OutVec>& coeffs) const;

  /// Throws on wrong input size or violated sup-norm bound.
  void validate_input(const Input& x) const;

 private:
  OperatorKernel() = default;

  const Eigen::VectorXd* input_weights() const;

  OperatorKernelKind kind_ = OperatorKernelKind::ScalarTimesIdentity;
  SpacePtr output_space_;
  InputKind input_kind_ = InputKind::Vector;
  SpacePtr input_space_;  // set for function inputs
  ScalarKernel scalar_;
  OutVec multiplier_;     // SeparableMultiplication
  OutVec y0_;             // RankOneSum / RankOneOnly
  double sup_bound_ = 0;  // C or B, per kind
  double kappa_sq_ = 0;
};

/// Fits the log-log growth of trace vs resolution for a kernel family
/// rebuilt at each grid size; slope >= 0.5 reads as trace divergence.
/// at_resolution(n) must return the kernel and a probe input at that n.
HSAuditResult hilbert_schmidt_audit(
    const std::function<std::pair<OperatorKernel, Input>(int)>& at_resolution,
    const std::vector<int>& resolutions);

}  // namespace opkr
