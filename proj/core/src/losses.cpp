#include "opkr/losses.hpp"

#include <cmath>

namespace opkr {

Loss Loss::square() { return Loss{LossKind::Square, 0.0}; }

Loss Loss::eps_insensitive(double epsilon) {
  if (epsilon < 0) throw std::invalid_argument("eps_insensitive: epsilon must be >= 0");
  return Loss{LossKind::EpsInsensitive, epsilon};
}

Loss Loss::logistic() { return Loss{LossKind::Logistic, 0.0}; }

double eval(const Loss& loss, const OutVec& y, const OutVec& fx) {
  detail::require_same_space(y, fx);
  switch (loss.kind) {
    case LossKind::Square: {
      const OutVec r = axpy(-1.0, fx, y);
      return inner(r, r);
    }
    case LossKind::EpsInsensitive: {
      const OutVec r = axpy(-1.0, fx, y);
      return std::max(norm(r) - loss.epsilon, 0.0);
    }
    case LossKind::Logistic: {
      const double t = inner(y, fx);
      // ln(1 + e^{-t}) without overflow for large |t|
      return t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
    }
  }
  throw std::logic_error("unreachable");
}

OutVec subgradient_fx(const Loss& loss, const OutVec& y, const OutVec& fx) {
  detail::require_same_space(y, fx);
  switch (loss.kind) {
    case LossKind::Square: {
      const OutVec r = axpy(-1.0, fx, y);
      return OutVec(y.space, -2.0 * r.values);
    }
    case LossKind::EpsInsensitive: {
      const OutVec r = axpy(-1.0, fx, y);
      const double rn = norm(r);
      // Zero on and inside the tube (a valid subdifferential element at the kink).
      if (rn <= loss.epsilon || rn == 0.0) return zero_vec(y.space);
      return OutVec(y.space, -r.values / rn);
    }
    case LossKind::Logistic: {
      const double t = inner(y, fx);
      const double sigma = 1.0 / (1.0 + std::exp(t));  // sigma(-t)
      return OutVec(y.space, -sigma * y.values);
    }
  }
  throw std::logic_error("unreachable");
}

LossConstants constants(const Loss& loss, double C_y, double kappa, double lambda) {
  if (!(C_y > 0) || !(kappa > 0) || !(lambda > 0))
    throw std::invalid_argument("constants: C_y, kappa and lambda must be > 0");
  switch (loss.kind) {
    case LossKind::Square: {
      const double C = 2.0 * C_y * (1.0 + kappa / std::sqrt(lambda));
      return {C, (C / 2.0) * (C / 2.0)};
    }
    case LossKind::EpsInsensitive:
      return {1.0, C_y * (1.0 + kappa / std::sqrt(lambda))};
    case LossKind::Logistic:
      return {1.0, std::log(2.0)};
  }
  throw std::logic_error("unreachable");
}

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::Square:
      return "square";
    case LossKind::EpsInsensitive:
      return "eps_insensitive";
    case LossKind::Logistic:
      return "logistic";
  }
  return "?";
}

}  // namespace opkr
