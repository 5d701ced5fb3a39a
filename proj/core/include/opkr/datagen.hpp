#pragma once

#include <utility>

#include "opkr/solvers.hpp"

namespace opkr {

enum class GeneratorKind {
  LinearFunctional,     // y(t) = alpha(t) + beta(t) x(t) + noise(t)
  NonlinearFunctional,  // smooth nonlinear response of a random curve
  MultiTaskVector,      // y = A x + correlated task noise
  LogisticPairs,        // signed outputs with a margin along a target direction
};

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::LinearFunctional;
  int m = 50;
  std::uint64_t seed = 0;
  /// Outputs are rescaled into the ball of radius clip_C_y; recorded as the
  /// dataset's certified C_y.
  double clip_C_y = 1.0;
  /// Inputs are clipped to this sup-norm bound (multiplication kernels need
  /// ||x||_inf control).
  double input_sup_bound = 1.0;
  double noise_sd = 0.1;

  // LinearFunctional coefficient curves on the output grid; empty means the
  // built-in defaults.
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta_fn;

  // MultiTaskVector
  int input_dim = 4;
  double task_correlation = 0.5;  // rho in [0, 1]

  // LogisticPairs
  double margin = 0.5;
};

/// Deterministic per (spec, seed); outputs satisfy ||y|| <= clip_C_y exactly.
Dataset generate(const GeneratorSpec& spec, const SpacePtr& space);

/// n independent draws from the same law on a stream disjoint from the
/// dataset stream of any seed.
std::vector<std::pair<Input, OutVec>> fresh_probes(const GeneratorSpec& spec,
                                                   const SpacePtr& space, int n,
                                                   std::uint64_t seed);

const char* generator_kind_name(GeneratorKind kind);

}  // namespace opkr
