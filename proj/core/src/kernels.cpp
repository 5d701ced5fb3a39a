#include "opkr/kernels.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "opkr/rng.hpp"

namespace opkr {

ScalarKernel ScalarKernel::gaussian(double bandwidth) {
  if (!(bandwidth > 0)) throw std::invalid_argument("gaussian: bandwidth must be > 0");
  ScalarKernel k;
  k.kind = ScalarKernelKind::Gaussian;
  k.bandwidth = bandwidth;
  return k;
}

ScalarKernel ScalarKernel::linear(double input_norm_bound) {
  if (!(input_norm_bound > 0))
    throw std::invalid_argument("linear: input_norm_bound must be > 0");
  ScalarKernel k;
  k.kind = ScalarKernelKind::Linear;
  k.input_norm_bound = input_norm_bound;
  return k;
}

ScalarKernel ScalarKernel::constant(double value) {
  if (!(value > 0)) throw std::invalid_argument("constant: value must be > 0");
  ScalarKernel k;
  k.kind = ScalarKernelKind::Constant;
  k.constant_value = value;
  return k;
}

double ScalarKernel::eval(const Input& x, const Input& z,
                          const Eigen::VectorXd* weights) const {
  if (x.size() != z.size()) throw DimensionError("ScalarKernel::eval: size mismatch");
  switch (kind) {
    case ScalarKernelKind::Gaussian: {
      const Eigen::VectorXd d = x - z;
      const double sq = weights ? d.cwiseProduct(*weights).dot(d) : d.squaredNorm();
      return std::exp(-bandwidth * sq);
    }
    case ScalarKernelKind::Linear:
      return weights ? x.cwiseProduct(*weights).dot(z) : x.dot(z);
    case ScalarKernelKind::Constant:
      return constant_value;
  }
  return 0.0;
}

double ScalarKernel::sup_diag() const {
  switch (kind) {
    case ScalarKernelKind::Gaussian:
      return 1.0;
    case ScalarKernelKind::Linear:
      return input_norm_bound * input_norm_bound;
    case ScalarKernelKind::Constant:
      return constant_value;
  }
  return 0.0;
}

namespace {

OutVec unit_or_zero(const OutVec& y0, double& norm_sq_out) {
  const double n = norm(y0);
  norm_sq_out = n * n;
  if (n == 0.0) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(y0.space->dim());
    e[0] = 1.0 / std::sqrt(y0.space->quad_weights()[0]);
    return OutVec(y0.space, std::move(e));
  }
  return OutVec(y0.space, y0.values / n);
}

}  // namespace

OperatorKernel OperatorKernel::scalar_times_identity(ScalarKernel k, SpacePtr output_space,
                                                     InputKind input_kind,
                                                     SpacePtr input_space) {
  OperatorKernel K;
  K.kind_ = OperatorKernelKind::ScalarTimesIdentity;
  K.scalar_ = k;
  K.output_space_ = std::move(output_space);
  K.input_kind_ = input_kind;
  K.input_space_ = std::move(input_space);
  if (input_kind == InputKind::Function && !K.input_space_)
    throw std::invalid_argument("function inputs need an input space");
  K.kappa_sq_ = k.sup_diag();
  return K;
}

OperatorKernel OperatorKernel::separable_multiplication(ScalarKernel k, OutVec multiplier,
                                                        double sup_bound_C,
                                                        InputKind input_kind,
                                                        SpacePtr input_space) {
  if (!(sup_bound_C > 0)) throw std::invalid_argument("sup_bound_C must be > 0");
  const double mult_inf = multiplier.values.cwiseAbs().maxCoeff();
  if (mult_inf > sup_bound_C * (1 + 1e-12))
    throw std::invalid_argument("multiplier exceeds its declared sup bound");
  OperatorKernel K;
  K.kind_ = OperatorKernelKind::SeparableMultiplication;
  K.scalar_ = k;
  K.output_space_ = multiplier.space;
  K.input_kind_ = input_kind;
  K.input_space_ = input_space ? std::move(input_space) : multiplier.space;
  K.multiplier_ = std::move(multiplier);
  K.sup_bound_ = sup_bound_C;
  K.kappa_sq_ = k.sup_diag() * mult_inf * mult_inf;
  return K;
}

OperatorKernel OperatorKernel::non_separable_multiplication(double sup_bound_B,
                                                            SpacePtr output_space) {
  if (!(sup_bound_B > 0)) throw std::invalid_argument("sup_bound_B must be > 0");
  OperatorKernel K;
  K.kind_ = OperatorKernelKind::NonSeparableMultiplication;
  K.output_space_ = output_space;
  K.input_kind_ = InputKind::Function;
  K.input_space_ = std::move(output_space);
  K.sup_bound_ = sup_bound_B;
  K.kappa_sq_ = sup_bound_B * sup_bound_B;
  return K;
}

OperatorKernel OperatorKernel::rank_one_sum(ScalarKernel k, OutVec y0, InputKind input_kind,
                                            SpacePtr input_space) {
  OperatorKernel K;
  K.kind_ = OperatorKernelKind::RankOneSum;
  K.scalar_ = k;
  K.output_space_ = y0.space;
  K.input_kind_ = input_kind;
  K.input_space_ = std::move(input_space);
  if (input_kind == InputKind::Function && !K.input_space_)
    throw std::invalid_argument("function inputs need an input space");
  const double s = inner(y0, y0);
  K.y0_ = std::move(y0);
  K.kappa_sq_ = k.sup_diag() * (1.0 + s);
  return K;
}

OperatorKernel OperatorKernel::rank_one_only(ScalarKernel k, OutVec y0, InputKind input_kind,
                                             SpacePtr input_space) {
  OperatorKernel K;
  K.kind_ = OperatorKernelKind::RankOneOnly;
  K.scalar_ = k;
  K.output_space_ = y0.space;
  K.input_kind_ = input_kind;
  K.input_space_ = std::move(input_space);
  if (input_kind == InputKind::Function && !K.input_space_)
    throw std::invalid_argument("function inputs need an input space");
  const double s = inner(y0, y0);
  K.y0_ = std::move(y0);
  K.kappa_sq_ = k.sup_diag() * s;
  if (!(K.kappa_sq_ > 0)) throw std::invalid_argument("rank_one_only: y0 must be nonzero");
  return K;
}

double OperatorKernel::kappa() const { return std::sqrt(kappa_sq_); }

const Eigen::VectorXd* OperatorKernel::input_weights() const {
  if (input_kind_ == InputKind::Function && input_space_ &&
      input_space_->kind() == SpaceKind::DiscretizedL2)
    return &input_space_->quad_weights();
  return nullptr;
}

void OperatorKernel::validate_input(const Input& x) const {
  if (input_kind_ == InputKind::Function) {
    if (x.size() != input_space_->dim())
      throw DimensionError("input size does not match the input grid");
  } else if (x.size() == 0) {
    throw DimensionError("empty input");
  }
  if (kind_ == OperatorKernelKind::NonSeparableMultiplication) {
    if (x.cwiseAbs().maxCoeff() > sup_bound_ * (1 + 1e-12))
      throw std::invalid_argument("input violates the declared sup-norm bound");
  }
}

double OperatorKernel::scalar_eval(const Input& x1, const Input& x2) const {
  if (kind_ == OperatorKernelKind::NonSeparableMultiplication) return 1.0;
  return scalar_.eval(x1, x2, input_weights());
}

OutVec OperatorKernel::apply(const Input& x1, const Input& x2, const OutVec& y) const {
  validate_input(x1);
  validate_input(x2);
  if (!y.space->same_as(*output_space_))
    throw DimensionError("apply: y is not in the kernel's output space");
  switch (kind_) {
    case OperatorKernelKind::ScalarTimesIdentity:
      return OutVec(y.space, scalar_eval(x1, x2) * y.values);
    case OperatorKernelKind::SeparableMultiplication: {
      const Eigen::VectorXd f2 = multiplier_.values.array().square();
      return OutVec(y.space, scalar_eval(x1, x2) * f2.cwiseProduct(y.values));
    }
    case OperatorKernelKind::NonSeparableMultiplication:
      return OutVec(y.space, x1.cwiseProduct(x2).cwiseProduct(y.values));
    case OperatorKernelKind::RankOneSum: {
      const double proj = inner(y, y0_);
      return OutVec(y.space, scalar_eval(x1, x2) * (y.values + proj * y0_.values));
    }
    case OperatorKernelKind::RankOneOnly: {
      const double proj = inner(y, y0_);
      return OutVec(y.space, scalar_eval(x1, x2) * proj * y0_.values);
    }
  }
  throw std::logic_error("unreachable");
}

PowerIterationResult OperatorKernel::operator_norm_numeric(const Input& x, double tol,
                                                           int max_iters) const {
  if (!(tol > 0)) throw std::invalid_argument("operator_norm_numeric: tol must be > 0");
  const int n = output_space_->dim();
  Rng rng(12345, "power-iteration");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * rng.uniform();
  OutVec vec(output_space_, std::move(v));
  const double vnorm = norm(vec);
  vec.values /= vnorm;

  PowerIterationResult res;
  double lambda_prev = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    OutVec av = apply(x, x, vec);
    const double lambda = inner(av, vec);  // Rayleigh quotient, ||vec||_Y = 1
    const double avn = norm(av);
    res.iterations = it;
    if (avn == 0.0) {  // operator annihilates the iterate
      res.value = 0.0;
      res.converged = true;
      return res;
    }
    res.value = lambda;
    if (it > 1 && std::abs(lambda - lambda_prev) <= tol * std::max(std::abs(lambda), 1e-300)) {
      res.converged = true;
      return res;
    }
    lambda_prev = lambda;
    vec = OutVec(output_space_, av.values / avn);
  }
  res.converged = false;
  return res;
}

double OperatorKernel::trace_discretized(const Input& x) const {
  validate_input(x);
  const int n = output_space_->dim();
  const Eigen::VectorXd& w = output_space_->quad_weights();
  // In the quadrature-orthonormal basis e_i = delta_i / sqrt(w_i),
  // <K e_i, e_i> = w_i^{-1} <K delta_i, delta_i> = (K delta_i)_i, which avoids
  // the 1/sqrt(w) round trip and keeps the identity-kernel trace exactly n.
  (void)w;
  double trace = 0.0;
  Eigen::VectorXd basis = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    basis[i] = 1.0;
    const OutVec e(output_space_, basis);
    trace += std::abs(apply(x, x, e).values[i]);
    basis[i] = 0.0;
  }
  return trace;
}

GramOperator OperatorKernel::gram(const std::vector<Input>& xs) const {
  const int m = static_cast<int>(xs.size());
  if (m < 1) throw std::invalid_argument("gram: need at least one input");
  for (const auto& x : xs) validate_input(x);
  const int dim = output_space_->dim();

  GramOperator G;
  G.m = m;
  G.space = output_space_;
  G.kmat = Eigen::MatrixXd(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = scalar_eval(xs[i], xs[j]);
      G.kmat(i, j) = v;
      G.kmat(j, i) = v;
    }

  switch (kind_) {
    case OperatorKernelKind::ScalarTimesIdentity:
      G.structure = GramOperator::Structure::PerGridPoint;
      G.point_factor = Eigen::MatrixXd::Ones(m, dim);
      break;
    case OperatorKernelKind::SeparableMultiplication:
      G.structure = GramOperator::Structure::PerGridPoint;
      G.point_factor = multiplier_.values.transpose().replicate(m, 1);
      break;
    case OperatorKernelKind::NonSeparableMultiplication: {
      G.structure = GramOperator::Structure::PerGridPoint;
      G.point_factor = Eigen::MatrixXd(m, dim);
      for (int i = 0; i < m; ++i) G.point_factor.row(i) = xs[i].transpose();
      break;
    }
    case OperatorKernelKind::RankOneSum:
    case OperatorKernelKind::RankOneOnly: {
      G.structure = GramOperator::Structure::RankOneSplit;
      double s = 0.0;
      G.y0hat = unit_or_zero(y0_, s).values;
      if (kind_ == OperatorKernelKind::RankOneSum) {
        G.along_factor = 1.0 + s;
        G.perp_factor = 1.0;
      } else {
        G.along_factor = s;
        G.perp_factor = 0.0;
      }
      break;
    }
  }
  return G;
}

double OperatorKernel::reproducing_norm_sq(const std::vector<Input>& xs,
                                           const std::vector<OutVec>& coeffs) const {
  if (xs.size() != coeffs.size())
    throw std::invalid_argument("reproducing_norm_sq: length mismatch");
  const int m = static_cast<int>(xs.size());
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    total += inner(apply(xs[i], xs[i], coeffs[i]), coeffs[i]);
    for (int j = 0; j < i; ++j)
      total += 2.0 * inner(apply(xs[i], xs[j], coeffs[j]), coeffs[i]);
  }
  return total;
}

Eigen::MatrixXd GramOperator::point_matrix(int t) const {
  if (structure != Structure::PerGridPoint)
    throw std::logic_error("point_matrix: Gram is not per-grid-point structured");
  const Eigen::VectorXd p = point_factor.col(t);
  return kmat.cwiseProduct(p * p.transpose());
}

Eigen::MatrixXd GramOperator::dense(int max_size) const {
  const int dim = space->dim();
  const long size = static_cast<long>(m) * dim;
  if (size > max_size)
    throw std::invalid_argument("dense Gram refused: m*dim exceeds the size cap");
  const Eigen::VectorXd sqw = space->quad_weights().cwiseSqrt();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(size, size);
  if (structure == Structure::PerGridPoint) {
    for (int t = 0; t < dim; ++t) {
      const Eigen::MatrixXd A = point_matrix(t);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) D(i * dim + t, j * dim + t) = A(i, j);
    }
  } else {
    // u = W^(1/2) y0hat has unit Euclidean norm.
    const Eigen::VectorXd u = sqw.cwiseProduct(y0hat);
    const Eigen::MatrixXd block = perp_factor * Eigen::MatrixXd::Identity(dim, dim) +
                                  (along_factor - perp_factor) * (u * u.transpose());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) D.block(i * dim, j * dim, dim, dim) = kmat(i, j) * block;
  }
  return D;
}

std::pair<double, double> GramOperator::eigen_range(int max_size) const {
  const Eigen::MatrixXd D = dense(max_size);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

HSAuditResult hilbert_schmidt_audit(
    const std::function<std::pair<OperatorKernel, Input>(int)>& at_resolution,
    const std::vector<int>& resolutions) {
  if (resolutions.size() < 3)
    throw std::invalid_argument("hilbert_schmidt_audit: need at least 3 resolutions");
  HSAuditResult res;
  res.resolutions = resolutions;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(resolutions.size());
  for (int r : resolutions) {
    auto [K, x] = at_resolution(r);
    const double trace = K.trace_discretized(x);
    res.traces.push_back(trace);
    const double lx = std::log(static_cast<double>(r));
    const double ly = std::log(std::max(trace, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  res.verdict = res.slope >= 0.5 ? HSVerdict::NotHS : HSVerdict::HSLikely;
  return res;
}

}  // namespace opkr
