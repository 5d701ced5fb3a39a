#include <doctest.h>

#include <opkr/rng.hpp>
#include <opkr/serialize.hpp>

using namespace opkr;

TEST_CASE("space round-trip") {
  for (const auto& space :
       {OutputSpace::finite(4), OutputSpace::uniform_l2(0.0, 2.0, 17)}) {
    const json j = space_to_json(*space);
    const SpacePtr back = space_from_json(j);
    CHECK(back->same_as(*space));
    CHECK(back->quad_weights() == space->quad_weights());
  }
  CHECK_THROWS(space_from_json(json{{"kind", "mystery"}}));
}

TEST_CASE("loss round-trip") {
  for (const Loss& loss : {Loss::square(), Loss::eps_insensitive(0.37), Loss::logistic()}) {
    const Loss back = loss_from_json(loss_to_json(loss));
    CHECK(back.kind == loss.kind);
    CHECK(back.epsilon == loss.epsilon);
  }
  CHECK_THROWS(loss_from_json(json{{"kind", "hinge"}}));
}

TEST_CASE("named curves evaluate on the target grid") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 5);
  CHECK(curve_from_json(json{{"curve", "constant"}, {"scale", 2.0}}, *space) ==
        Eigen::VectorXd::Constant(5, 2.0));
  const Eigen::VectorXd half = curve_from_json(json{{"curve", "half_exp_plus_one"}}, *space);
  for (int t = 0; t < 5; ++t) {
    const double g = space->grid()[t];
    CHECK(half[t] == doctest::Approx(0.5 * (std::exp(-g * g) + 1.0)).epsilon(1e-14));
  }
  CHECK(curve_from_json(json{{"curve", "ramp"}, {"scale", 3.0}}, *space)[4] ==
        doctest::Approx(3.0));
  // plain arrays pass through, wrong length is rejected
  CHECK(curve_from_json(json::array({1, 2, 3, 4, 5}), *space)[2] == 3.0);
  CHECK_THROWS_AS(curve_from_json(json::array({1, 2}), *space), DimensionError);
  CHECK_THROWS(curve_from_json(json{{"curve", "spiral"}}, *space));
}

TEST_CASE("kernel round-trip preserves kind, kappa and pointwise action") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 7);
  Eigen::VectorXd mult = 0.5 * ((-space->grid().array().square()).exp() + 1.0);
  Eigen::VectorXd y0v = Eigen::VectorXd::Ones(7);
  OutVec y0(space, y0v / norm(OutVec(space, y0v)));
  const std::vector<OperatorKernel> kernels = {
      OperatorKernel::scalar_times_identity(ScalarKernel::gaussian(0.8), space,
                                            InputKind::Function, space),
      OperatorKernel::separable_multiplication(ScalarKernel::linear(2.0), OutVec(space, mult),
                                               1.0, InputKind::Function, space),
      OperatorKernel::non_separable_multiplication(1.5, space),
      OperatorKernel::rank_one_sum(ScalarKernel::constant(1.0), y0, InputKind::Function, space),
      OperatorKernel::rank_one_only(ScalarKernel::gaussian(1.0), y0, InputKind::Function, space),
  };
  Rng rng(61, "ser-kernel");
  for (const auto& K : kernels) {
    const OperatorKernel back = kernel_from_json(kernel_to_json(K), space);
    CHECK(back.kind() == K.kind());
    CHECK(back.kappa_sq() == doctest::Approx(K.kappa_sq()).epsilon(1e-14));
    for (int rep = 0; rep < 5; ++rep) {
      Input x(7), z(7);
      Eigen::VectorXd y(7);
      for (int t = 0; t < 7; ++t) {
        x[t] = rng.uniform(-1.0, 1.0);
        z[t] = rng.uniform(-1.0, 1.0);
        y[t] = rng.normal();
      }
      const OutVec out_a = K.apply(x, z, OutVec(space, y));
      const OutVec out_b = back.apply(x, z, OutVec(space, y));
      CHECK((out_a.values - out_b.values).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("named-curve kernel specs rebuild across resolutions") {
  const json spec = {
      {"kind", "separable_multiplication"},
      {"scalar", {{"kind", "gaussian"}, {"bandwidth", 1.0}}},
      {"params",
       {{"input_kind", "function"},
        {"multiplier", {{"curve", "half_exp_plus_one"}, {"scale", 2.0}}},
        {"sup_bound", 2.0}}},
  };
  for (int n : {8, 32}) {
    auto space = OutputSpace::uniform_l2(0.0, 1.0, n);
    const OperatorKernel K = kernel_from_json(spec, space);
    CHECK(K.output_space()->dim() == n);
    CHECK(K.multiplier().values.size() == n);
    CHECK(K.multiplier().values[0] == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("generator spec round-trip") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::MultiTaskVector;
  spec.m = 33;
  spec.seed = 99;
  spec.clip_C_y = 0.7;
  spec.noise_sd = 0.05;
  spec.input_dim = 6;
  spec.task_correlation = 0.25;
  const GeneratorSpec back = generator_from_json(generator_to_json(spec));
  CHECK(back.kind == spec.kind);
  CHECK(back.m == spec.m);
  CHECK(back.seed == spec.seed);
  CHECK(back.clip_C_y == spec.clip_C_y);
  CHECK(back.noise_sd == spec.noise_sd);
  CHECK(back.input_dim == spec.input_dim);
  CHECK(back.task_correlation == spec.task_correlation);
}

TEST_CASE("dataset round-trip is exact") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 9);
  GeneratorSpec spec;
  spec.m = 12;
  spec.seed = 5;
  const Dataset Z = generate(spec, space);
  const Dataset back = dataset_from_json(dataset_to_json(Z));
  CHECK(back.C_y == Z.C_y);
  CHECK(back.outputs == Z.outputs);
  CHECK(back.meta.seed == Z.meta.seed);
  CHECK(back.meta.generator == Z.meta.generator);
  for (int i = 0; i < Z.size(); ++i) CHECK(back.inputs[i] == Z.inputs[i]);
  CHECK(back.space->same_as(*space));
}

TEST_CASE("model round-trip predicts identically") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 8);
  GeneratorSpec spec;
  spec.m = 10;
  spec.seed = 6;
  const Dataset Z = generate(spec, space);
  const auto K = OperatorKernel::scalar_times_identity(ScalarKernel::gaussian(1.0), space,
                                                       InputKind::Function, space);
  const RepresenterModel model = fit_square(K, Z, 0.2);
  const RepresenterModel back = model_from_json(model_to_json(model));
  CHECK(back.lambda == model.lambda);
  CHECK(back.coeffs == model.coeffs);
  CHECK(back.loss.kind == model.loss.kind);
  CHECK(back.solver_log.iterations == model.solver_log.iterations);
  CHECK(back.solver_log.objective == model.solver_log.objective);
  const auto probes = fresh_probes(spec, space, 10, 77);
  for (const auto& [x, y] : probes)
    CHECK(back.predict(x).values == model.predict(x).values);
}

TEST_CASE("report serialization carries the recomputation fields") {
  StabilityReport r;
  r.algo = LossKind::Square;
  r.m = 20;
  r.lambda = 0.1;
  r.kappa = 1.0;
  r.C_y = 1.0;
  r.beta_theoretical = 0.5;
  r.beta_empirical = 0.12;
  r.per_i_deviations = {0.1, 0.12};
  r.probe_count = 200;
  r.seed = 17;
  const json j = stability_report_to_json(r);
  CHECK(j["algo"] == "square");
  CHECK(j["m"] == 20);
  CHECK(j["beta_empirical"] == 0.12);
  CHECK(j["per_i_deviations"].size() == 2);
  CHECK(j["seed"] == 17);

  BoundReport b;
  b.delta = 0.05;
  b.R_emp = 0.1;
  b.beta = 0.02;
  b.M = 1.0;
  b.bound_value = generalization_bound(b.R_emp, b.beta, b.M, 20, b.delta);
  b.mc_samples = 2000;
  b.holds = true;
  const json bj = bound_report_to_json(b);
  CHECK(bj["bound_value"].get<double>() ==
        doctest::Approx(generalization_bound(bj["R_emp"], bj["beta"], bj["M"], 20,
                                             bj["delta"]))
            .epsilon(1e-15));
  CHECK(bj["holds"] == true);
}
