#pragma once

#include "opkr/hilbert.hpp"

namespace opkr {

enum class LossKind { Square, EpsInsensitive, Logistic };

struct Loss {
  LossKind kind = LossKind::Square;
  double epsilon = 0.0;  // EpsInsensitive tube radius

  static Loss square();
  static Loss eps_insensitive(double epsilon);
  static Loss logistic();
};

/// Lipschitz constant C and uniform bound M for a loss under the
/// reachable-set constants (C_y, kappa, lambda). Square is not globally
/// Lipschitz; its surrogate constant needs the dataset's C_y.
struct LossConstants {
  double C;
  double M;
};

double eval(const Loss& loss, const OutVec& y, const OutVec& fx);

/// A subgradient of eval with respect to fx.
OutVec subgradient_fx(const Loss& loss, const OutVec& y, const OutVec& fx);

LossConstants constants(const Loss& loss, double C_y, double kappa, double lambda);

const char* loss_kind_name(LossKind kind);

}  // namespace opkr
