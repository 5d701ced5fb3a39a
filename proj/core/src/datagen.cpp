#include "opkr/datagen.hpp"

#include <cmath>

#include "opkr/rng.hpp"

namespace opkr {

namespace {

Eigen::VectorXd normalized_grid(const OutputSpace& space) {
  if (space.kind() == SpaceKind::FiniteDim)
    return Eigen::VectorXd::LinSpaced(space.dim(), 0.0, 1.0);
  const auto& g = space.grid();
  const double a = g[0], b = g[g.size() - 1];
  return (g.array() - a) / (b - a);
}

/// Random low-order Fourier sum on the grid, clipped to sup-norm bound B.
Eigen::VectorXd random_curve(Rng& rng, const Eigen::VectorXd& tn, double B) {
  const int n = static_cast<int>(tn.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int k = 0; k <= 3; ++k) {
    const double a = rng.uniform(-1.0, 1.0) / (k + 1);
    const double b = rng.uniform(-1.0, 1.0) / (k + 1);
    x += a * (2.0 * M_PI * k * tn.array()).cos().matrix() +
         b * (2.0 * M_PI * k * tn.array()).sin().matrix();
  }
  const double sup = x.cwiseAbs().maxCoeff();
  if (sup > B) x *= B / sup;
  return x;
}

Eigen::VectorXd random_vector(Rng& rng, int dim, double B) {
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.uniform(-B, B);
  return x;
}

Eigen::VectorXd default_alpha(const Eigen::VectorXd& tn) {
  return 0.3 * (2.0 * M_PI * tn.array()).sin();
}

Eigen::VectorXd default_beta(const Eigen::VectorXd& tn) {
  return 1.0 + 0.5 * (M_PI * tn.array()).cos();
}

/// Fixed mixing matrix for MultiTaskVector, derived from the seed's model
/// stream so dataset and probe draws share it.
Eigen::MatrixXd mixing_matrix(std::uint64_t seed, int out_dim, int in_dim) {
  Rng rng(seed, "model");
  Eigen::MatrixXd A(out_dim, in_dim);
  for (int i = 0; i < out_dim; ++i)
    for (int j = 0; j < in_dim; ++j) A(i, j) = rng.normal() / std::sqrt(in_dim);
  return A;
}

struct DrawContext {
  const GeneratorSpec& spec;
  const SpacePtr& space;
  Eigen::VectorXd tn;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::MatrixXd A;  // MultiTaskVector
};

DrawContext make_context(const GeneratorSpec& spec, const SpacePtr& space) {
  DrawContext ctx{spec, space, normalized_grid(*space), {}, {}, {}};
  if (spec.kind == GeneratorKind::LinearFunctional) {
    ctx.alpha = spec.alpha.size() ? spec.alpha : default_alpha(ctx.tn);
    ctx.beta = spec.beta_fn.size() ? spec.beta_fn : default_beta(ctx.tn);
    if (ctx.alpha.size() != space->dim() || ctx.beta.size() != space->dim())
      throw DimensionError("generate: alpha/beta curves do not match the grid");
  }
  if (spec.kind == GeneratorKind::MultiTaskVector) {
    if (space->kind() != SpaceKind::FiniteDim)
      throw std::invalid_argument("MultiTaskVector needs a finite-dimensional space");
    ctx.A = mixing_matrix(spec.seed, space->dim(), spec.input_dim);
  }
  return ctx;
}

std::pair<Input, Eigen::VectorXd> draw_pair(Rng& rng, const DrawContext& ctx) {
  const auto& spec = ctx.spec;
  const int dim = ctx.space->dim();
  switch (spec.kind) {
    case GeneratorKind::LinearFunctional: {
      Input x = random_curve(rng, ctx.tn, spec.input_sup_bound);
      Eigen::VectorXd y = ctx.alpha + ctx.beta.cwiseProduct(x);
      for (int t = 0; t < dim; ++t) y[t] += spec.noise_sd * rng.normal();
      return {std::move(x), std::move(y)};
    }
    case GeneratorKind::NonlinearFunctional: {
      Input x = random_curve(rng, ctx.tn, spec.input_sup_bound);
      Eigen::VectorXd y(dim);
      for (int t = 0; t < dim; ++t)
        y[t] = std::sin(M_PI * x[t]) + 0.3 * x[t] * x[t] + spec.noise_sd * rng.normal();
      return {std::move(x), std::move(y)};
    }
    case GeneratorKind::MultiTaskVector: {
      Input x = random_vector(rng, spec.input_dim, spec.input_sup_bound);
      const double shared = rng.normal();
      Eigen::VectorXd y = ctx.A * x;
      const double rho = spec.task_correlation;
      for (int t = 0; t < dim; ++t)
        y[t] += spec.noise_sd * (std::sqrt(rho) * shared + std::sqrt(1 - rho) * rng.normal());
      return {std::move(x), std::move(y)};
    }
    case GeneratorKind::LogisticPairs: {
      Input x = ctx.space->kind() == SpaceKind::FiniteDim
                    ? random_vector(rng, spec.input_dim, spec.input_sup_bound)
                    : random_curve(rng, ctx.tn, spec.input_sup_bound);
      // Target direction: a smooth transform of x, unit norm in Y.
      Eigen::VectorXd u(dim);
      for (int t = 0; t < dim; ++t) {
        const double xv = x[std::min<int>(t, static_cast<int>(x.size()) - 1)];
        u[t] = std::tanh(xv) + 0.5;
      }
      const double un = ctx.space->norm(u);
      if (un > 0) u /= un;
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      Eigen::VectorXd y = sign * spec.margin * u;
      for (int t = 0; t < dim; ++t) y[t] += 0.1 * spec.noise_sd * rng.normal();
      return {std::move(x), std::move(y)};
    }
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd clip_output(const OutputSpace& space, Eigen::VectorXd y, double C_y) {
  const double n = space.norm(y);
  if (n > C_y) y *= C_y / n;
  return y;
}

}  // namespace

Dataset generate(const GeneratorSpec& spec, const SpacePtr& space) {
  if (spec.m < 1) throw std::invalid_argument("generate: m must be >= 1");
  if (!(spec.clip_C_y > 0)) throw std::invalid_argument("generate: clip_C_y must be > 0");
  const DrawContext ctx = make_context(spec, space);
  Rng rng(spec.seed, "dataset");
  Dataset Z;
  Z.space = space;
  Z.C_y = spec.clip_C_y;
  Z.meta.seed = spec.seed;
  Z.meta.generator = generator_kind_name(spec.kind);
  Z.inputs.reserve(static_cast<std::size_t>(spec.m));
  Z.outputs.resize(spec.m, space->dim());
  for (int i = 0; i < spec.m; ++i) {
    auto [x, y] = draw_pair(rng, ctx);
    Z.inputs.push_back(std::move(x));
    Z.outputs.row(i) = clip_output(*space, std::move(y), spec.clip_C_y).transpose();
  }
  Z.validate();
  return Z;
}

std::vector<std::pair<Input, OutVec>> fresh_probes(const GeneratorSpec& spec,
                                                   const SpacePtr& space, int n,
                                                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("fresh_probes: n must be >= 1");
  const DrawContext ctx = make_context(spec, space);
  Rng rng(seed, "probe");
  std::vector<std::pair<Input, OutVec>> probes;
  probes.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto [x, y] = draw_pair(rng, ctx);
    probes.emplace_back(std::move(x),
                        OutVec(space, clip_output(*space, std::move(y), spec.clip_C_y)));
  }
  return probes;
}

const char* generator_kind_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::LinearFunctional:
      return "linear_functional";
    case GeneratorKind::NonlinearFunctional:
      return "nonlinear_functional";
    case GeneratorKind::MultiTaskVector:
      return "multi_task_vector";
    case GeneratorKind::LogisticPairs:
      return "logistic_pairs";
  }
  return "?";
}

}  // namespace opkr
