#pragma once

#include "opkr/datagen.hpp"
#include "opkr/solvers.hpp"

namespace opkr {

struct StabilityOptions {
  SolverOptions solver;
  int workers = 0;  // 0 = default pool size
};

/// Empirical uniform-stability measurement against the theoretical constant.
struct StabilityReport {
  LossKind algo = LossKind::Square;
  int m = 0;
  double lambda = 0.0;
  double kappa = 0.0;
  double C_y = 0.0;
  double beta_theoretical = 0.0;
  double beta_empirical = 0.0;
  std::vector<double> per_i_deviations;
  int probe_count = 0;
  std::uint64_t seed = 0;
  /// Solver slack added on the theoretical side of the headline comparison.
  double slack = 0.0;
  bool valid = true;
  /// max_i ||f_Z - f_{Z\i}||_H and its bound C*kappa/(2 m lambda).
  double max_coeff_perturbation = 0.0;
  double perturbation_bound = 0.0;
};

struct BoundReport {
  double delta = 0.0;
  double R_emp = 0.0;
  double beta = 0.0;
  double M = 0.0;
  double bound_value = 0.0;
  double risk_mc_estimate = 0.0;
  double mc_standard_error = 0.0;
  int mc_samples = 0;
  std::uint64_t seed = 0;
  bool holds = false;
};

struct ScalingPoint {
  int m;
  double median_beta_empirical;
  double beta_theoretical;
};

struct ScalingCurve {
  std::vector<ScalingPoint> points;
  double empirical_slope = 0.0;  // log-log slope of median beta vs m
};

/// Closed-form beta per loss kind: square 2 C_y^2 kappa^2 (1+kappa/sqrt(l))^2/(m l),
/// eps-insensitive and logistic kappa^2/(2 m l). C_y is required for square.
double theoretical_beta(LossKind kind, double kappa, int m, double lambda,
                        std::optional<double> C_y = std::nullopt);

/// Fits f_Z and every f_{Z\i}; deviations are maximized over the probes plus
/// all training pairs. The sup over (x,y) is approximated from below, so the
/// comparison is sound only on the <= side.
StabilityReport measure_beta(const OperatorKernel& K, const Dataset& Z, double lambda,
                             const Loss& loss, const std::vector<std::pair<Input, OutVec>>& probes,
                             const StabilityOptions& opts = {});

/// Median empirical beta across seeds at each m, plus the fitted decay rate.
ScalingCurve beta_scaling_curve(const OperatorKernel& K, GeneratorSpec spec,
                                const SpacePtr& space, const Loss& loss, double lambda,
                                const std::vector<int>& m_list,
                                const std::vector<std::uint64_t>& seeds, int probe_count,
                                const StabilityOptions& opts = {});

/// R_emp + 2 beta + (4 m beta + M) sqrt(ln(1/delta) / (2m))
double generalization_bound(double R_emp, double beta, double M, int m, double delta);

/// reps independent datasets; per rep the fitted model's Monte Carlo risk
/// estimate is compared against the bound. A rep violates only if
/// risk - bound > 2 * MC standard error.
std::vector<BoundReport> bound_check(const OperatorKernel& K, GeneratorSpec spec,
                                     const SpacePtr& space, const Loss& loss, double lambda,
                                     int m, double delta, int reps, int mc_samples,
                                     const StabilityOptions& opts = {});

}  // namespace opkr
