#include "opkr/stability.hpp"

#include <algorithm>
#include <cmath>

#include "opkr/parallel.hpp"

namespace opkr {

double theoretical_beta(LossKind kind, double kappa, int m, double lambda,
                        std::optional<double> C_y) {
  if (!(kappa > 0) || m < 1 || !(lambda > 0))
    throw std::invalid_argument("theoretical_beta: kappa, m, lambda must be positive");
  switch (kind) {
    case LossKind::Square: {
      if (!C_y || !(*C_y > 0))
        throw std::invalid_argument("theoretical_beta: square loss needs C_y");
      const double r = 1.0 + kappa / std::sqrt(lambda);
      return 2.0 * (*C_y) * (*C_y) * kappa * kappa * r * r / (m * lambda);
    }
    case LossKind::EpsInsensitive:
    case LossKind::Logistic:
      return kappa * kappa / (2.0 * m * lambda);
  }
  throw std::logic_error("unreachable");
}

namespace {

RepresenterModel fit_any(const OperatorKernel& K, const Dataset& Z, double lambda,
                         const Loss& loss, const SolverOptions& opts) {
  if (loss.kind == LossKind::Square) return fit_square(K, Z, lambda);
  return fit_subgradient(K, Z, lambda, loss, opts);
}

/// Prediction-error bound induced by the solver's achieved accuracy:
/// kappa * sqrt(gap / lambda) via 2*lambda strong convexity of R_reg in H.
double prediction_tolerance(const RepresenterModel& model) {
  if (model.loss.kind == LossKind::Square) return 0.0;
  return model.kernel.kappa() * std::sqrt(std::max(model.solver_log.tolerance, 0.0) /
                                          model.lambda);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

StabilityReport measure_beta(const OperatorKernel& K, const Dataset& Z, double lambda,
                             const Loss& loss, const std::vector<std::pair<Input, OutVec>>& probes,
                             const StabilityOptions& opts) {
  if (Z.size() < 2) throw std::invalid_argument("measure_beta: need m >= 2");
  const int m = Z.size();
  for (const auto& [x, y] : probes) {
    (void)x;
    if (norm(y) > Z.C_y * (1 + 1e-9))
      throw std::invalid_argument("measure_beta: probe output violates C_y");
  }

  StabilityReport report;
  report.algo = loss.kind;
  report.m = m;
  report.lambda = lambda;
  report.kappa = K.kappa();
  report.C_y = Z.C_y;
  report.seed = Z.meta.seed;
  report.probe_count = static_cast<int>(probes.size());
  report.beta_theoretical = theoretical_beta(loss.kind, K.kappa(), m, lambda, Z.C_y);

  const RepresenterModel full = fit_any(K, Z, lambda, loss, opts.solver);

  // Evaluation points: all training pairs plus the fresh probes.
  std::vector<std::pair<Input, OutVec>> points;
  points.reserve(static_cast<std::size_t>(m) + probes.size());
  for (int i = 0; i < m; ++i) points.emplace_back(Z.inputs[static_cast<std::size_t>(i)], Z.output(i));
  for (const auto& p : probes) points.push_back(p);

  std::vector<double> full_losses(points.size());
  for (std::size_t p = 0; p < points.size(); ++p)
    full_losses[p] = eval(loss, points[p].second, full.predict(points[p].first));

  report.per_i_deviations.assign(static_cast<std::size_t>(m), 0.0);
  std::vector<double> perturbations(static_cast<std::size_t>(m), 0.0);
  std::vector<double> loo_tols(static_cast<std::size_t>(m), 0.0);
  std::vector<char> loo_ok(static_cast<std::size_t>(m), 1);

  parallel_for(m, [&](int i) {
    const Dataset Zi = Z.without(i);
    SolverOptions loo_opts = opts.solver;
    if (loss.kind != LossKind::Square) {
      // Warm start from the full fit with row i dropped.
      Eigen::MatrixXd init(m - 1, Z.space->dim());
      int r = 0;
      for (int j = 0; j < m; ++j)
        if (j != i) init.row(r++) = full.coeffs.row(j);
      loo_opts.init_coeffs = std::move(init);
    }
    const RepresenterModel loo = fit_any(K, Zi, lambda, loss, loo_opts);
    if (loss.kind != LossKind::Square && !loo.solver_log.converged &&
        !(loo.solver_log.tolerance < 1.0))
      loo_ok[static_cast<std::size_t>(i)] = 0;
    loo_tols[static_cast<std::size_t>(i)] = prediction_tolerance(loo);

    double dev = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      const double l2 = eval(loss, points[p].second, loo.predict(points[p].first));
      dev = std::max(dev, std::abs(full_losses[p] - l2));
    }
    report.per_i_deviations[static_cast<std::size_t>(i)] = dev;

    // ||f_Z - f_{Z\i}||_H over the union of anchors.
    std::vector<OutVec> diff;
    diff.reserve(static_cast<std::size_t>(m));
    int r2 = 0;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd d = full.coeffs.row(j).transpose();
      if (j != i) d -= loo.coeffs.row(r2++).transpose();
      diff.emplace_back(Z.space, std::move(d));
    }
    perturbations[static_cast<std::size_t>(i)] =
        std::sqrt(std::max(0.0, K.reproducing_norm_sq(Z.inputs, diff)));
  }, opts.workers);

  report.beta_empirical =
      *std::max_element(report.per_i_deviations.begin(), report.per_i_deviations.end());
  report.max_coeff_perturbation = *std::max_element(perturbations.begin(), perturbations.end());

  const double C = constants(loss, Z.C_y, K.kappa(), lambda).C;
  report.perturbation_bound = C * K.kappa() / (2.0 * m * lambda);
  if (loss.kind == LossKind::Square) {
    report.slack = 1e-8;
  } else {
    const double tol_full = prediction_tolerance(full);
    const double tol_loo = *std::max_element(loo_tols.begin(), loo_tols.end());
    report.slack = 10.0 * C * (tol_full + tol_loo);
  }
  report.valid = std::all_of(loo_ok.begin(), loo_ok.end(), [](char c) { return c != 0; }) &&
                 (loss.kind == LossKind::Square ? full.solver_log.converged
                                                : full.solver_log.tolerance < 1.0);
  return report;
}

ScalingCurve beta_scaling_curve(const OperatorKernel& K, GeneratorSpec spec,
                                const SpacePtr& space, const Loss& loss, double lambda,
                                const std::vector<int>& m_list,
                                const std::vector<std::uint64_t>& seeds, int probe_count,
                                const StabilityOptions& opts) {
  if (m_list.size() < 3)
    throw std::invalid_argument("beta_scaling_curve: need at least 3 values of m");
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1])
      throw std::invalid_argument("beta_scaling_curve: m_list must be increasing");

  ScalingCurve curve;
  for (int m : m_list) {
    std::vector<double> betas;
    for (std::uint64_t seed : seeds) {
      GeneratorSpec s = spec;
      s.m = m;
      s.seed = seed;
      const Dataset Z = generate(s, space);
      const auto probes = fresh_probes(s, space, probe_count, seed);
      betas.push_back(measure_beta(K, Z, lambda, loss, probes, opts).beta_empirical);
    }
    curve.points.push_back(
        {m, median(betas),
         theoretical_beta(loss.kind, K.kappa(), m, lambda, spec.clip_C_y)});
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(curve.points.size());
  for (const auto& p : curve.points) {
    const double lx = std::log(static_cast<double>(p.m));
    const double ly = std::log(std::max(p.median_beta_empirical, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  curve.empirical_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return curve;
}

double generalization_bound(double R_emp, double beta, double M, int m, double delta) {
  if (!(delta > 0) || !(delta < 1))
    throw std::invalid_argument("generalization_bound: delta must be in (0,1)");
  if (R_emp < 0 || beta < 0 || M < 0 || m < 1)
    throw std::invalid_argument("generalization_bound: domain violation");
  return R_emp + 2.0 * beta + (4.0 * m * beta + M) * std::sqrt(std::log(1.0 / delta) / (2.0 * m));
}

std::vector<BoundReport> bound_check(const OperatorKernel& K, GeneratorSpec spec,
                                     const SpacePtr& space, const Loss& loss, double lambda,
                                     int m, double delta, int reps, int mc_samples,
                                     const StabilityOptions& opts) {
  if (reps < 1) throw std::invalid_argument("bound_check: reps must be >= 1");
  if (mc_samples < 1) throw std::invalid_argument("bound_check: mc_samples must be >= 1");

  std::vector<BoundReport> reports(static_cast<std::size_t>(reps));
  parallel_for(reps, [&](int r) {
    GeneratorSpec s = spec;
    s.m = m;
    s.seed = spec.seed + static_cast<std::uint64_t>(r);
    const Dataset Z = generate(s, space);
    const RepresenterModel model = fit_any(K, Z, lambda, loss, opts.solver);

    BoundReport rep;
    rep.seed = s.seed;
    rep.delta = delta;
    rep.R_emp = empirical_risk(model, Z);
    rep.beta = theoretical_beta(loss.kind, K.kappa(), m, lambda, Z.C_y);
    rep.M = constants(loss, Z.C_y, K.kappa(), lambda).M;
    rep.bound_value = generalization_bound(rep.R_emp, rep.beta, rep.M, m, delta);

    // Monte Carlo risk on a stream disjoint from the dataset stream.
    const auto mc = fresh_probes(s, space, mc_samples, s.seed ^ 0x6d63u /* "mc" */);
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& [x, y] : mc) {
      const double l = eval(loss, y, model.predict(x));
      sum += l;
      sum_sq += l * l;
    }
    rep.mc_samples = mc_samples;
    rep.risk_mc_estimate = sum / mc_samples;
    const double var =
        std::max(0.0, sum_sq / mc_samples - rep.risk_mc_estimate * rep.risk_mc_estimate);
    rep.mc_standard_error = std::sqrt(var / mc_samples);
    rep.holds = rep.risk_mc_estimate - rep.bound_value <= 2.0 * rep.mc_standard_error;
    reports[static_cast<std::size_t>(r)] = rep;
  }, opts.workers);
  return reports;
}

}  // namespace opkr
