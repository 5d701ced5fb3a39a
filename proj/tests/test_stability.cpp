#include <doctest.h>

#include <Eigen/LU>
#include <cmath>
#include <opkr/rng.hpp>
#include <opkr/stability.hpp>

using namespace opkr;

namespace {

OperatorKernel gaussian_identity(const SpacePtr& space) {
  return OperatorKernel::scalar_times_identity(ScalarKernel::gaussian(1.0), space,
                                               InputKind::Function, space);
}

}  // namespace

TEST_CASE("theoretical beta fixtures") {
  CHECK(theoretical_beta(LossKind::EpsInsensitive, 1.0, 100, 0.1) ==
        doctest::Approx(0.05).epsilon(1e-15));
  CHECK(theoretical_beta(LossKind::Logistic, 1.0, 100, 0.1) ==
        doctest::Approx(0.05).epsilon(1e-15));
  CHECK(theoretical_beta(LossKind::Square, 1.0, 100, 1.0, 1.0) ==
        doctest::Approx(0.08).epsilon(1e-15));

  // beta(2m) = beta(m) / 2 exactly
  for (int m : {10, 50, 128}) {
    CHECK(theoretical_beta(LossKind::Logistic, 1.3, 2 * m, 0.2) ==
          theoretical_beta(LossKind::Logistic, 1.3, m, 0.2) / 2.0);
    CHECK(theoretical_beta(LossKind::Square, 1.3, 2 * m, 0.2, 0.7) ==
          theoretical_beta(LossKind::Square, 1.3, m, 0.2, 0.7) / 2.0);
  }

  CHECK_THROWS(theoretical_beta(LossKind::Square, 1.0, 100, 0.1));  // C_y required
  CHECK_THROWS(theoretical_beta(LossKind::Logistic, 1.0, 0, 0.1));
  CHECK_THROWS(theoretical_beta(LossKind::Logistic, 1.0, 100, 0.0));
}

TEST_CASE("generalization bound arithmetic") {
  CHECK(generalization_bound(0.37, 0.0, 0.0, 50, 0.05) == doctest::Approx(0.37));

  // R_emp=0.1, beta=0.05, m=100, M=1, delta=e^-2:
  // 0.1 + 0.1 + (20 + 1) * sqrt(2/200) = 2.3
  CHECK(generalization_bound(0.1, 0.05, 1.0, 100, std::exp(-2.0)) ==
        doctest::Approx(2.3).epsilon(1e-12));

  // decreasing in delta, limit R_emp + 2 beta as delta -> 1
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {0.01, 0.05, 0.2, 0.9999999}) {
    const double b = generalization_bound(0.1, 0.05, 1.0, 100, delta);
    CHECK(b < prev);
    CHECK(b >= 0.1);
    prev = b;
  }
  CHECK(prev == doctest::Approx(0.1 + 2 * 0.05).epsilon(1e-3));

  CHECK_THROWS(generalization_bound(0.1, 0.05, 1.0, 100, 0.0));
  CHECK_THROWS(generalization_bound(0.1, 0.05, 1.0, 100, 1.0));
}

TEST_CASE("constant dataset: exchangeability makes all deviations equal") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 8);
  const auto K = gaussian_identity(space);
  const int m = 6;
  Dataset Z;
  Z.space = space;
  Z.C_y = 1.0;
  Input x0 = Eigen::VectorXd::Constant(8, 0.5);
  Eigen::VectorXd y0 = Eigen::VectorXd::Constant(8, 0.4);
  for (int i = 0; i < m; ++i) {
    Z.inputs.push_back(x0);
  }
  Z.outputs = y0.transpose().replicate(m, 1);
  GeneratorSpec pspec;
  const auto probes = fresh_probes(pspec, space, 20, 91);
  const auto report = measure_beta(K, Z, 0.1, Loss::square(), probes);
  CHECK(report.valid);
  REQUIRE(static_cast<int>(report.per_i_deviations.size()) == m);
  for (double d : report.per_i_deviations)
    CHECK(d == doctest::Approx(report.per_i_deviations[0]).epsilon(1e-10));
  CHECK(report.beta_empirical ==
        *std::max_element(report.per_i_deviations.begin(), report.per_i_deviations.end()));
}

TEST_CASE("m=2 deviations match a hand-built 2x2 vs 1x1 computation") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 5);
  const auto K = gaussian_identity(space);
  const double lambda = 0.4;
  Rng rng(52, "m2");
  Dataset Z;
  Z.space = space;
  Z.outputs.resize(2, 5);
  for (int i = 0; i < 2; ++i) {
    Input x(5);
    for (int t = 0; t < 5; ++t) x[t] = rng.uniform(-1.0, 1.0);
    Z.inputs.push_back(x);
    for (int t = 0; t < 5; ++t) Z.outputs(i, t) = rng.normal();
  }
  Z.C_y = Z.outputs.rowwise().norm().maxCoeff() * 2;

  GeneratorSpec pspec;
  pspec.clip_C_y = Z.C_y;
  const auto probes = fresh_probes(pspec, space, 30, 92);
  const auto report = measure_beta(K, Z, lambda, Loss::square(), probes);

  // Identity kernel: coefficients solve the same 2x2 scalar system per task.
  const double k11 = K.scalar_eval(Z.inputs[0], Z.inputs[0]);
  const double k12 = K.scalar_eval(Z.inputs[0], Z.inputs[1]);
  const double k22 = K.scalar_eval(Z.inputs[1], Z.inputs[1]);
  Eigen::Matrix2d A;
  A << k11 + 2 * lambda, k12, k12, k22 + 2 * lambda;
  const Eigen::Matrix2d Ainv = A.inverse();
  Eigen::MatrixXd c_full = Ainv * Z.outputs;  // 2 x 5
  // LOO fit on {sample j} alone: (k_jj + lambda) c = y_j
  auto loo_coeff = [&](int keep) {
    const double kjj = K.scalar_eval(Z.inputs[keep], Z.inputs[keep]);
    return Eigen::VectorXd((Z.outputs.row(keep) / (kjj + lambda)).transpose());
  };
  auto predict_full = [&](const Input& x) {
    return Eigen::VectorXd(K.scalar_eval(x, Z.inputs[0]) * c_full.row(0).transpose() +
                           K.scalar_eval(x, Z.inputs[1]) * c_full.row(1).transpose());
  };
  for (int i = 0; i < 2; ++i) {
    const int keep = 1 - i;
    const Eigen::VectorXd cl = loo_coeff(keep);
    double dev = 0.0;
    auto consider = [&](const Input& x, const Eigen::VectorXd& y) {
      const Eigen::VectorXd pf = predict_full(x);
      const Eigen::VectorXd pl = K.scalar_eval(x, Z.inputs[keep]) * cl;
      const double lf = space->norm(y - pf) * space->norm(y - pf);
      const double ll = space->norm(y - pl) * space->norm(y - pl);
      dev = std::max(dev, std::abs(lf - ll));
    };
    for (const auto& [px, py] : probes) consider(px, py.values);
    for (int j = 0; j < 2; ++j) consider(Z.inputs[j], Z.outputs.row(j).transpose());
    CHECK(report.per_i_deviations[i] == doctest::Approx(dev).epsilon(1e-8));
  }
}

TEST_CASE("harness run: ridge on synthetic functional data stays under beta") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 16);
  const auto K = gaussian_identity(space);
  GeneratorSpec spec;
  spec.kind = GeneratorKind::LinearFunctional;
  spec.m = 50;
  spec.seed = 3;
  const Dataset Z = generate(spec, space);
  const auto probes = fresh_probes(spec, space, 100, spec.seed);
  const double lambda = 0.1;
  const auto report = measure_beta(K, Z, lambda, Loss::square(), probes);
  CHECK(report.valid);
  CHECK(report.m == 50);
  CHECK(report.probe_count == 100);
  CHECK(report.kappa == doctest::Approx(K.kappa()));
  CHECK(report.beta_theoretical ==
        doctest::Approx(theoretical_beta(LossKind::Square, K.kappa(), 50, lambda, Z.C_y)));
  CHECK(report.beta_empirical > 0.0);
  CHECK(report.beta_empirical <= report.beta_theoretical + report.slack);
  // coefficient perturbation diagnostic
  CHECK(report.max_coeff_perturbation <= report.perturbation_bound + 1e-12);
  const double C = constants(Loss::square(), Z.C_y, K.kappa(), lambda).C;
  CHECK(report.perturbation_bound ==
        doctest::Approx(C * K.kappa() / (2.0 * 50 * lambda)).epsilon(1e-12));

  // determinism of the whole report
  const auto again = measure_beta(K, Z, lambda, Loss::square(), probes);
  CHECK(again.beta_empirical == report.beta_empirical);
  CHECK(again.per_i_deviations == report.per_i_deviations);
}

TEST_CASE("iterative losses stay under beta plus solver slack") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 12);
  const auto K = gaussian_identity(space);
  GeneratorSpec spec;
  spec.kind = GeneratorKind::LinearFunctional;
  spec.m = 20;
  spec.seed = 8;
  const Dataset Z = generate(spec, space);
  const auto probes = fresh_probes(spec, space, 60, spec.seed);
  for (const Loss& loss : {Loss::eps_insensitive(0.1), Loss::logistic()}) {
    const auto report = measure_beta(K, Z, 0.1, loss, probes);
    CHECK(report.valid);
    CHECK(report.beta_empirical <= report.beta_theoretical + report.slack);
  }
}

TEST_CASE("scaling curve: empirical rate roughly 1/m") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 10);
  const auto K = gaussian_identity(space);
  GeneratorSpec spec;
  spec.kind = GeneratorKind::LinearFunctional;
  const auto curve = beta_scaling_curve(K, spec, space, Loss::square(), 0.1,
                                        {10, 20, 40}, {1, 2, 3}, 40);
  REQUIRE(curve.points.size() == 3);
  for (const auto& p : curve.points) {
    CHECK(p.median_beta_empirical > 0.0);
    CHECK(std::isfinite(p.median_beta_empirical));
    CHECK(p.median_beta_empirical <= p.beta_theoretical);
  }
  // theoretical slope is exactly -1; empirical should clearly decay
  CHECK(curve.empirical_slope <= -0.5);
  const double t_slope =
      std::log(curve.points[2].beta_theoretical / curve.points[0].beta_theoretical) /
      std::log(40.0 / 10.0);
  CHECK(t_slope == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("bound check holds across repetitions and reports recompute") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 10);
  const auto K = gaussian_identity(space);
  GeneratorSpec spec;
  spec.kind = GeneratorKind::LinearFunctional;
  spec.seed = 10;
  const auto reports = bound_check(K, spec, space, Loss::square(), 0.1,
                                   /*m=*/30, /*delta=*/0.05, /*reps=*/20,
                                   /*mc_samples=*/1000);
  REQUIRE(reports.size() == 20);
  int holds = 0;
  for (const auto& r : reports) {
    CHECK(r.bound_value ==
          doctest::Approx(generalization_bound(r.R_emp, r.beta, r.M, 30, r.delta))
              .epsilon(1e-12));
    CHECK(r.mc_samples == 1000);
    CHECK(r.risk_mc_estimate >= 0.0);
    if (r.holds) ++holds;
  }
  CHECK(holds >= 19);  // expected: all of them; the bound is loose
}
