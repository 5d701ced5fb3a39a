#pragma once

#include <optional>
#include <string>

#include "opkr/kernels.hpp"
#include "opkr/losses.hpp"

namespace opkr {

struct DatasetMeta {
  std::uint64_t seed = 0;
  std::string generator;
};

/// Training set Z with a certified output-norm bound C_y.
struct Dataset {
  std::vector<Input> inputs;
  Eigen::MatrixXd outputs;  // m x dim, row i = y_i
  SpacePtr space;
  double C_y = 1.0;
  DatasetMeta meta;

  int size() const { return static_cast<int>(inputs.size()); }
  OutVec output(int i) const { return OutVec(space, outputs.row(i).transpose()); }

  /// Checks |inputs| == |outputs|, m >= 1 and max_i ||y_i|| <= C_y.
  void validate() const;

  /// Z with sample i removed.
  Dataset without(int i) const;
};

struct SolverLog {
  int iterations = 0;
  double objective = 0.0;
  bool converged = true;
  double tolerance = 0.0;
};

struct SolverOptions {
  int max_iters = 5000;
  double step0 = 1.0;
  double tol = 1e-7;
  /// Optional coefficient warm start (m x dim), e.g. from a previous fit.
  std::optional<Eigen::MatrixXd> init_coeffs;
};

/// Fitted minimizer f_Z stored as coefficients over the training inputs,
/// f(x) = sum_j K(x, anchors_j) coeffs_j.
struct RepresenterModel {
  OperatorKernel kernel;
  std::vector<Input> anchors;
  Eigen::MatrixXd coeffs;  // |anchors| x dim
  double lambda = 1.0;
  Loss loss;
  SolverLog solver_log;

  OutVec predict(const Input& x) const;
  double rkhs_norm() const;
};

/// f(x_i) for all training inputs of a structured Gram, coeffs m x dim.
Eigen::MatrixXd gram_apply(const GramOperator& G, const Eigen::MatrixXd& coeffs);

/// Exact square-loss fit: solves (G + m*lambda*Id) c = y structure-wise.
RepresenterModel fit_square(const OperatorKernel& K, const Dataset& Z, double lambda);

/// First-order fit for the nonsmooth/smooth convex losses. EpsInsensitive
/// runs proximal gradient (FISTA) on the dual with a duality-gap stopping
/// rule; Logistic runs gradient descent in the RKHS geometry with
/// backtracking line search.
RepresenterModel fit_subgradient(const OperatorKernel& K, const Dataset& Z, double lambda,
                                 const Loss& loss, const SolverOptions& opts = {});

double empirical_risk(const RepresenterModel& model, const Dataset& Z);

/// R_emp(f, Z) + lambda * ||f||_H^2
double regularized_objective(const RepresenterModel& model, const Dataset& Z);

}  // namespace opkr
