#include "opkr/solvers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "opkr/rng.hpp"

namespace opkr {

void Dataset::validate() const {
  if (size() < 1) throw std::invalid_argument("Dataset: need at least one sample");
  if (outputs.rows() != size()) throw std::invalid_argument("Dataset: inputs/outputs length mismatch");
  if (!space || outputs.cols() != space->dim())
    throw DimensionError("Dataset: outputs do not match the output space");
  if (!(C_y > 0)) throw std::invalid_argument("Dataset: C_y must be > 0");
  for (int i = 0; i < size(); ++i) {
    const double n = space->norm(outputs.row(i).transpose());
    if (n > C_y * (1 + 1e-9))
      throw std::invalid_argument("Dataset: output norm exceeds the certified C_y bound");
  }
}

Dataset Dataset::without(int i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("Dataset::without: index out of range");
  Dataset Z;
  Z.space = space;
  Z.C_y = C_y;
  Z.meta = meta;
  Z.inputs.reserve(static_cast<std::size_t>(size() - 1));
  Z.outputs.resize(size() - 1, outputs.cols());
  int r = 0;
  for (int j = 0; j < size(); ++j) {
    if (j == i) continue;
    Z.inputs.push_back(inputs[static_cast<std::size_t>(j)]);
    Z.outputs.row(r++) = outputs.row(j);
  }
  return Z;
}

namespace {

/// sum_i <A_i, B_i>_Y for row-blocked matrices (m x dim).
double block_inner(const OutputSpace& space, const Eigen::MatrixXd& A,
                   const Eigen::MatrixXd& B) {
  return (A.cwiseProduct(B) * space.quad_weights()).sum();
}

struct RankOneParts {
  Eigen::VectorXd along;   // <c_i, y0hat>_Y
  Eigen::MatrixXd perp;    // c_i - along_i y0hat
};

RankOneParts split_rank_one(const GramOperator& G, const Eigen::MatrixXd& C) {
  RankOneParts parts;
  parts.along = C * G.space->quad_weights().cwiseProduct(G.y0hat);
  parts.perp = C - parts.along * G.y0hat.transpose();
  return parts;
}

}  // namespace

Eigen::MatrixXd gram_apply(const GramOperator& G, const Eigen::MatrixXd& coeffs) {
  const int dim = G.space->dim();
  if (coeffs.rows() != G.m || coeffs.cols() != dim)
    throw DimensionError("gram_apply: coefficient shape mismatch");
  Eigen::MatrixXd F(G.m, dim);
  if (G.structure == GramOperator::Structure::PerGridPoint) {
    for (int t = 0; t < dim; ++t) {
      const Eigen::VectorXd p = G.point_factor.col(t);
      F.col(t) = p.cwiseProduct(G.kmat * p.cwiseProduct(coeffs.col(t)));
    }
  } else {
    const RankOneParts parts = split_rank_one(G, coeffs);
    F = G.perp_factor * (G.kmat * parts.perp) +
        G.along_factor * (G.kmat * parts.along) * G.y0hat.transpose();
  }
  return F;
}

OutVec RepresenterModel::predict(const Input& x) const {
  OutVec acc = zero_vec(kernel.output_space());
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    const OutVec cj(kernel.output_space(), coeffs.row(static_cast<int>(j)).transpose());
    acc = axpy(1.0, kernel.apply(x, anchors[j], cj), acc);
  }
  return acc;
}

double RepresenterModel::rkhs_norm() const {
  std::vector<OutVec> cs;
  cs.reserve(anchors.size());
  for (std::size_t j = 0; j < anchors.size(); ++j)
    cs.emplace_back(kernel.output_space(), coeffs.row(static_cast<int>(j)).transpose());
  return std::sqrt(std::max(0.0, kernel.reproducing_norm_sq(anchors, cs)));
}

double empirical_risk(const RepresenterModel& model, const Dataset& Z) {
  if (Z.size() < 1) throw std::invalid_argument("empirical_risk: empty dataset");
  double total = 0.0;
  for (int i = 0; i < Z.size(); ++i)
    total += eval(model.loss, Z.output(i), model.predict(Z.inputs[static_cast<std::size_t>(i)]));
  return total / Z.size();
}

double regularized_objective(const RepresenterModel& model, const Dataset& Z) {
  const double nrm = model.rkhs_norm();
  return empirical_risk(model, Z) + model.lambda * nrm * nrm;
}

RepresenterModel fit_square(const OperatorKernel& K, const Dataset& Z, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("fit_square: lambda must be > 0");
  Z.validate();
  const int m = Z.size();
  const int dim = K.output_space()->dim();
  if (!Z.space->same_as(*K.output_space()))
    throw DimensionError("fit_square: dataset space does not match the kernel");

  const GramOperator G = K.gram(Z.inputs);
  const double ml = m * lambda;
  Eigen::MatrixXd C(m, dim);

  if (G.structure == GramOperator::Structure::PerGridPoint) {
    // The Gram operator acts independently at each grid point: n solves of
    // size m instead of one (m*dim)^3 block solve.
    for (int t = 0; t < dim; ++t) {
      Eigen::MatrixXd A = G.point_matrix(t);
      A.diagonal().array() += ml;
      C.col(t) = Eigen::LLT<Eigen::MatrixXd>(A).solve(Z.outputs.col(t));
    }
  } else {
    const RankOneParts y_parts = split_rank_one(G, Z.outputs);
    Eigen::MatrixXd Aa = G.along_factor * G.kmat;
    Aa.diagonal().array() += ml;
    const Eigen::VectorXd ca = Eigen::LLT<Eigen::MatrixXd>(Aa).solve(y_parts.along);
    Eigen::MatrixXd Ap = G.perp_factor * G.kmat;
    Ap.diagonal().array() += ml;
    const Eigen::MatrixXd cp = Eigen::LLT<Eigen::MatrixXd>(Ap).solve(y_parts.perp);
    C = cp + ca * G.y0hat.transpose();
  }

  RepresenterModel model{K, Z.inputs, C, lambda, Loss::square(), SolverLog{}};

  // Optimality certificate: (G + m*lambda) c - y residual.
  const Eigen::MatrixXd F = gram_apply(G, C);
  const Eigen::MatrixXd resid = F + ml * C - Z.outputs;
  const double rn = std::sqrt(std::max(0.0, block_inner(*Z.space, resid, resid)));
  const double yn = std::sqrt(std::max(0.0, block_inner(*Z.space, Z.outputs, Z.outputs)));
  model.solver_log.iterations = 1;
  model.solver_log.tolerance = 1e-8;
  model.solver_log.converged = rn <= 1e-8 * (yn + 1.0);
  const Eigen::MatrixXd E = Z.outputs - F;
  model.solver_log.objective =
      block_inner(*Z.space, E, E) / m + lambda * block_inner(*Z.space, F, C);
  if (rn > 1e-6 * (yn + 1.0))
    throw std::runtime_error("fit_square: normal-equation residual too large");
  return model;
}

namespace {

double lambda_max_gram(const GramOperator& G) {
  if (G.structure == GramOperator::Structure::RankOneSplit) {
    const double km = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G.kmat, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .maxCoeff();
    return std::max(G.along_factor, G.perp_factor) * std::max(km, 0.0);
  }
  // Power iteration on the stacked operator.
  const int dim = G.space->dim();
  Rng rng(999, "gram-lambda-max");
  Eigen::MatrixXd V(G.m, dim);
  for (int i = 0; i < G.m; ++i)
    for (int t = 0; t < dim; ++t) V(i, t) = 1.0 + 0.1 * rng.uniform();
  double lam = 0.0, lam_prev = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double vn = std::sqrt(std::max(block_inner(*G.space, V, V), 1e-300));
    V /= vn;
    const Eigen::MatrixXd GV = gram_apply(G, V);
    lam = block_inner(*G.space, GV, V);
    if (it > 0 && std::abs(lam - lam_prev) <= 1e-8 * std::max(std::abs(lam), 1e-12)) break;
    lam_prev = lam;
    V = GV;
  }
  return std::max(lam, 1e-12);
}

struct LossEval {
  double total;  // sum of per-sample losses
};

double sum_losses(const Loss& loss, const Dataset& Z, const Eigen::MatrixXd& F) {
  double total = 0.0;
  for (int i = 0; i < Z.size(); ++i)
    total += eval(loss, Z.output(i), OutVec(Z.space, F.row(i).transpose()));
  return total;
}

RepresenterModel fit_eps_insensitive(const OperatorKernel& K, const Dataset& Z, double lambda,
                                     const Loss& loss, const SolverOptions& opts) {
  const int m = Z.size();
  const int dim = Z.space->dim();
  const GramOperator G = K.gram(Z.inputs);
  const Eigen::VectorXd& w = Z.space->quad_weights();
  const double eps = loss.epsilon;
  const double mlam = m * lambda;

  const double L = lambda_max_gram(G) / (2.0 * lambda * m * m);
  const double eta = 1.0 / std::max(L, 1e-12);

  auto project_blocks = [&](Eigen::MatrixXd& V, double shrink) {
    for (int i = 0; i < m; ++i) {
      double n = Z.space->norm(V.row(i).transpose());
      if (n > 0.0 && shrink > 0.0) {
        const double f = std::max(0.0, 1.0 - shrink / n);
        V.row(i) *= f;
        n *= f;
      }
      if (n > 1.0) V.row(i) /= n;
    }
  };

  // Dual variable v_i, ||v_i||_Y <= 1; primal recovery c = v / (2 m lambda).
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(m, dim);
  if (opts.init_coeffs) {
    V = 2.0 * mlam * (*opts.init_coeffs);
    project_blocks(V, 0.0);
  }

  auto primal_objective = [&](const Eigen::MatrixXd& C, Eigen::MatrixXd* F_out) {
    const Eigen::MatrixXd F = gram_apply(G, C);
    if (F_out) *F_out = F;
    return sum_losses(loss, Z, F) / m + lambda * block_inner(*Z.space, F, C);
  };

  const double R0 = sum_losses(loss, Z, Eigen::MatrixXd::Zero(m, dim)) / m;

  Eigen::MatrixXd Zm = V;  // FISTA extrapolation point
  double theta = 1.0;
  Eigen::MatrixXd best_C = V / (2.0 * mlam);
  double best_J = primal_objective(best_C, nullptr);
  if (best_J > R0) {  // cold start is never worse than f = 0
    V.setZero();
    Zm.setZero();
    best_C.setZero();
    best_J = R0;
  }
  double gap = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;

  for (int it = 1; it <= opts.max_iters; ++it) {
    iters = it;
    const Eigen::MatrixXd GZ = gram_apply(G, Zm);
    const Eigen::MatrixXd grad = GZ / (2.0 * lambda * m * m) - Z.outputs / m;
    Eigen::MatrixXd U = Zm - eta * grad;
    project_blocks(U, eta * eps / m);
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    Zm = U + ((theta - 1.0) / theta_next) * (U - V);
    V = U;
    theta = theta_next;

    if (it % 25 == 0 || it == opts.max_iters) {
      const Eigen::MatrixXd C = V / (2.0 * mlam);
      const double J = primal_objective(C, nullptr);
      if (J < best_J) {
        best_J = J;
        best_C = C;
      }
      const Eigen::MatrixXd GV = gram_apply(G, V);
      double dual = 0.0;
      for (int i = 0; i < m; ++i)
        dual += V.row(i).cwiseProduct(w.transpose()).dot(Z.outputs.row(i)) -
                eps * Z.space->norm(V.row(i).transpose());
      dual = dual / m - block_inner(*Z.space, GV, V) / (4.0 * lambda * m * m);
      gap = best_J - dual;
      if (gap <= opts.tol * (1.0 + std::abs(best_J))) {
        converged = true;
        break;
      }
    }
  }

  RepresenterModel model{K, Z.inputs, best_C, lambda, loss, SolverLog{}};
  model.solver_log.iterations = iters;
  model.solver_log.objective = best_J;
  model.solver_log.converged = converged;
  // Achieved accuracy as a duality gap: downstream slack terms convert it
  // to a prediction-error bound via kappa * sqrt(gap / lambda).
  model.solver_log.tolerance = std::max(gap, 0.0);
  return model;
}

RepresenterModel fit_logistic(const OperatorKernel& K, const Dataset& Z, double lambda,
                              const Loss& loss, const SolverOptions& opts) {
  const int m = Z.size();
  const int dim = Z.space->dim();
  const GramOperator G = K.gram(Z.inputs);
  const Eigen::VectorXd& w = Z.space->quad_weights();

  auto objective = [&](const Eigen::MatrixXd& C, Eigen::MatrixXd* F_out) {
    const Eigen::MatrixXd F = gram_apply(G, C);
    if (F_out) *F_out = F;
    return sum_losses(loss, Z, F) / m + lambda * block_inner(*Z.space, F, C);
  };

  const double R0 = std::log(2.0);  // R_reg(0) for the logistic loss

  double step0 = opts.step0;
  for (int restart = 0; restart <= 3; ++restart) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, dim);
    if (opts.init_coeffs && restart == 0) C = *opts.init_coeffs;
    Eigen::MatrixXd F;
    double J = objective(C, &F);
    if (J > R0) {  // bad warm start; f = 0 is always admissible
      C.setZero();
      J = objective(C, &F);
    }
    double eta = step0;
    int iters = 0;
    bool converged = false;
    double grad_norm = 0.0;
    bool diverged = false;

    for (int it = 1; it <= opts.max_iters; ++it) {
      iters = it;
      // d_i = 2 lambda c_i - (1/m) sigma(-<y_i, f(x_i)>) y_i  (gradient in H)
      Eigen::MatrixXd D = 2.0 * lambda * C;
      for (int i = 0; i < m; ++i) {
        const double t = Z.outputs.row(i).cwiseProduct(w.transpose()).dot(F.row(i));
        const double sigma = 1.0 / (1.0 + std::exp(t));
        D.row(i) -= (sigma / m) * Z.outputs.row(i);
      }
      const double grad_sq = std::max(0.0, block_inner(*Z.space, gram_apply(G, D), D));
      grad_norm = std::sqrt(grad_sq);
      if (grad_norm <= opts.tol * (1.0 + std::abs(J))) {
        converged = true;
        break;
      }
      // Backtracking line search on the RKHS-geometry descent direction.
      eta = std::min(eta * 2.0, 1e6);
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        Eigen::MatrixXd Cn = C - eta * D;
        Eigen::MatrixXd Fn;
        const double Jn = objective(Cn, &Fn);
        if (Jn <= J - 0.25 * eta * grad_sq) {
          C = std::move(Cn);
          F = std::move(Fn);
          J = Jn;
          accepted = true;
          break;
        }
        eta *= 0.5;
      }
      if (!accepted) {
        converged = grad_norm <= 100 * opts.tol * (1.0 + std::abs(J));
        break;
      }
      if (J > 10.0 * R0) {
        diverged = true;
        break;
      }
    }

    if (diverged) {
      step0 *= 0.5;
      if (restart == 3) throw std::runtime_error("fit_subgradient: diverged after 3 restarts");
      continue;
    }

    RepresenterModel model{K, Z.inputs, C, lambda, loss, SolverLog{}};
    model.solver_log.iterations = iters;
    model.solver_log.objective = J;
    model.solver_log.converged = converged;
    // Suboptimality bound from 2*lambda strong convexity in H.
    model.solver_log.tolerance = grad_norm * grad_norm / (4.0 * lambda);
    return model;
  }
  throw std::runtime_error("fit_subgradient: unreachable restart exit");
}

}  // namespace

RepresenterModel fit_subgradient(const OperatorKernel& K, const Dataset& Z, double lambda,
                                 const Loss& loss, const SolverOptions& opts) {
  if (!(lambda > 0)) throw std::invalid_argument("fit_subgradient: lambda must be > 0");
  Z.validate();
  if (!Z.space->same_as(*K.output_space()))
    throw DimensionError("fit_subgradient: dataset space does not match the kernel");
  switch (loss.kind) {
    case LossKind::EpsInsensitive:
      return fit_eps_insensitive(K, Z, lambda, loss, opts);
    case LossKind::Logistic:
      return fit_logistic(K, Z, lambda, loss, opts);
    case LossKind::Square:
      throw std::invalid_argument("fit_subgradient: use fit_square for the square loss");
  }
  throw std::logic_error("unreachable");
}

}  // namespace opkr
