#include "opkr/serialize.hpp"

#include <cmath>

namespace opkr {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  Eigen::Index i = 0;
  for (const auto& x : j) v[i++] = x.get<double>();
  return v;
}

namespace {

json mat_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(vec_to_json(M.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return {};
  Eigen::MatrixXd M(rows, static_cast<Eigen::Index>(j[0].size()));
  Eigen::Index i = 0;
  for (const auto& row : j) M.row(i++) = vec_from_json(row).transpose();
  return M;
}

}  // namespace

json space_to_json(const OutputSpace& space) {
  json j;
  if (space.kind() == SpaceKind::FiniteDim) {
    j["kind"] = "finite";
    j["dim"] = space.dim();
  } else {
    j["kind"] = "discretized_l2";
    j["dim"] = space.dim();
    j["grid"] = vec_to_json(space.grid());
    j["quad_weights"] = vec_to_json(space.quad_weights());
  }
  return j;
}

SpacePtr space_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finite") return OutputSpace::finite(j.at("dim").get<int>());
  if (kind == "discretized_l2") return OutputSpace::discretized_l2(vec_from_json(j.at("grid")));
  throw std::invalid_argument("space_from_json: unknown kind '" + kind + "'");
}

json loss_to_json(const Loss& loss) {
  json j;
  j["kind"] = loss_kind_name(loss.kind);
  if (loss.kind == LossKind::EpsInsensitive) j["epsilon"] = loss.epsilon;
  return j;
}

Loss loss_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "square") return Loss::square();
  if (kind == "eps_insensitive") return Loss::eps_insensitive(j.value("epsilon", 0.1));
  if (kind == "logistic") return Loss::logistic();
  throw std::invalid_argument("loss_from_json: unknown kind '" + kind + "'");
}

Eigen::VectorXd curve_from_json(const json& j, const OutputSpace& space) {
  if (j.is_array()) {
    Eigen::VectorXd v = vec_from_json(j);
    if (v.size() != space.dim())
      throw DimensionError("curve_from_json: array length does not match the space");
    return v;
  }
  const std::string name = j.at("curve").get<std::string>();
  const double scale = j.value("scale", 1.0);
  Eigen::VectorXd t = space.kind() == SpaceKind::DiscretizedL2
                          ? space.grid()
                          : Eigen::VectorXd::LinSpaced(space.dim(), 0.0, 1.0);
  if (name == "constant") return Eigen::VectorXd::Constant(space.dim(), scale);
  if (name == "half_exp_plus_one")
    return (scale / 2.0) * ((-t.array().square()).exp() + 1.0);
  if (name == "sin_wave") return scale * (2.0 * M_PI * t.array()).sin();
  if (name == "ramp") return scale * t;
  throw std::invalid_argument("curve_from_json: unknown curve '" + name + "'");
}

namespace {

const char* operator_kind_name(OperatorKernelKind k) {
  switch (k) {
    case OperatorKernelKind::ScalarTimesIdentity:
      return "scalar_times_identity";
    case OperatorKernelKind::SeparableMultiplication:
      return "separable_multiplication";
    case OperatorKernelKind::NonSeparableMultiplication:
      return "non_separable_multiplication";
    case OperatorKernelKind::RankOneSum:
      return "rank_one_sum";
    case OperatorKernelKind::RankOneOnly:
      return "rank_one_only";
  }
  return "?";
}

json scalar_to_json(const ScalarKernel& k) {
  json j;
  switch (k.kind) {
    case ScalarKernelKind::Gaussian:
      j["kind"] = "gaussian";
      j["bandwidth"] = k.bandwidth;
      break;
    case ScalarKernelKind::Linear:
      j["kind"] = "linear";
      j["input_norm_bound"] = k.input_norm_bound;
      break;
    case ScalarKernelKind::Constant:
      j["kind"] = "constant";
      j["value"] = k.constant_value;
      break;
  }
  return j;
}

ScalarKernel scalar_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") return ScalarKernel::gaussian(j.value("bandwidth", 1.0));
  if (kind == "linear") return ScalarKernel::linear(j.value("input_norm_bound", 1.0));
  if (kind == "constant") return ScalarKernel::constant(j.value("value", 1.0));
  throw std::invalid_argument("scalar_from_json: unknown kind '" + kind + "'");
}

}  // namespace

json kernel_to_json(const OperatorKernel& K) {
  json j;
  j["kind"] = operator_kind_name(K.kind());
  if (K.kind() != OperatorKernelKind::NonSeparableMultiplication)
    j["scalar"] = scalar_to_json(K.scalar());
  json params;
  params["input_kind"] = K.input_kind() == InputKind::Vector ? "vector" : "function";
  switch (K.kind()) {
    case OperatorKernelKind::SeparableMultiplication:
      params["multiplier"] = vec_to_json(K.multiplier().values);
      params["sup_bound"] = K.sup_bound();
      break;
    case OperatorKernelKind::NonSeparableMultiplication:
      params["sup_bound"] = K.sup_bound();
      break;
    case OperatorKernelKind::RankOneSum:
    case OperatorKernelKind::RankOneOnly:
      params["y0"] = vec_to_json(K.y0().values);
      break;
    default:
      break;
  }
  j["params"] = params;
  return j;
}

OperatorKernel kernel_from_json(const json& j, const SpacePtr& output_space) {
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  const std::string ik = params.value("input_kind", "function");
  const InputKind input_kind = ik == "vector" ? InputKind::Vector : InputKind::Function;
  const SpacePtr input_space = input_kind == InputKind::Function ? output_space : nullptr;

  if (kind == "scalar_times_identity")
    return OperatorKernel::scalar_times_identity(scalar_from_json(j.at("scalar")), output_space,
                                                 input_kind, input_space);
  if (kind == "separable_multiplication") {
    const Eigen::VectorXd mult = curve_from_json(params.at("multiplier"), *output_space);
    const double bound = params.value("sup_bound", mult.cwiseAbs().maxCoeff());
    return OperatorKernel::separable_multiplication(scalar_from_json(j.at("scalar")),
                                                    OutVec(output_space, mult), bound,
                                                    input_kind, input_space);
  }
  if (kind == "non_separable_multiplication")
    return OperatorKernel::non_separable_multiplication(params.value("sup_bound", 1.0),
                                                        output_space);
  if (kind == "rank_one_sum" || kind == "rank_one_only") {
    const Eigen::VectorXd y0 = curve_from_json(params.at("y0"), *output_space);
    if (kind == "rank_one_sum")
      return OperatorKernel::rank_one_sum(scalar_from_json(j.at("scalar")),
                                          OutVec(output_space, y0), input_kind, input_space);
    return OperatorKernel::rank_one_only(scalar_from_json(j.at("scalar")),
                                         OutVec(output_space, y0), input_kind, input_space);
  }
  throw std::invalid_argument("kernel_from_json: unknown kind '" + kind + "'");
}

json generator_to_json(const GeneratorSpec& spec) {
  json j;
  j["kind"] = generator_kind_name(spec.kind);
  j["m"] = spec.m;
  j["seed"] = spec.seed;
  j["clip_C_y"] = spec.clip_C_y;
  j["input_sup_bound"] = spec.input_sup_bound;
  j["noise_sd"] = spec.noise_sd;
  if (spec.alpha.size()) j["alpha"] = vec_to_json(spec.alpha);
  if (spec.beta_fn.size()) j["beta_fn"] = vec_to_json(spec.beta_fn);
  if (spec.kind == GeneratorKind::MultiTaskVector) {
    j["input_dim"] = spec.input_dim;
    j["task_correlation"] = spec.task_correlation;
  }
  if (spec.kind == GeneratorKind::LogisticPairs) {
    j["input_dim"] = spec.input_dim;
    j["margin"] = spec.margin;
  }
  return j;
}

GeneratorSpec generator_from_json(const json& j, const OutputSpace* space) {
  GeneratorSpec spec;
  const std::string kind = j.value("kind", "linear_functional");
  if (kind == "linear_functional")
    spec.kind = GeneratorKind::LinearFunctional;
  else if (kind == "nonlinear_functional")
    spec.kind = GeneratorKind::NonlinearFunctional;
  else if (kind == "multi_task_vector")
    spec.kind = GeneratorKind::MultiTaskVector;
  else if (kind == "logistic_pairs")
    spec.kind = GeneratorKind::LogisticPairs;
  else
    throw std::invalid_argument("generator_from_json: unknown kind '" + kind + "'");
  spec.m = j.value("m", 50);
  spec.seed = j.value("seed", static_cast<std::uint64_t>(0));
  spec.clip_C_y = j.value("clip_C_y", 1.0);
  spec.input_sup_bound = j.value("input_sup_bound", 1.0);
  spec.noise_sd = j.value("noise_sd", 0.1);
  spec.input_dim = j.value("input_dim", 4);
  spec.task_correlation = j.value("task_correlation", 0.5);
  spec.margin = j.value("margin", 0.5);
  if (j.contains("alpha") && space) spec.alpha = curve_from_json(j.at("alpha"), *space);
  if (j.contains("beta_fn") && space) spec.beta_fn = curve_from_json(j.at("beta_fn"), *space);
  return spec;
}

json dataset_to_json(const Dataset& Z) {
  json j;
  j["space"] = space_to_json(*Z.space);
  json inputs = json::array();
  for (const auto& x : Z.inputs) inputs.push_back(vec_to_json(x));
  j["inputs"] = inputs;
  j["outputs"] = mat_to_json(Z.outputs);
  j["C_y"] = Z.C_y;
  j["meta"] = {{"seed", Z.meta.seed}, {"generator", Z.meta.generator}};
  return j;
}

Dataset dataset_from_json(const json& j) {
  Dataset Z;
  Z.space = space_from_json(j.at("space"));
  for (const auto& x : j.at("inputs")) Z.inputs.push_back(vec_from_json(x));
  Z.outputs = mat_from_json(j.at("outputs"));
  Z.C_y = j.at("C_y").get<double>();
  if (j.contains("meta")) {
    Z.meta.seed = j["meta"].value("seed", static_cast<std::uint64_t>(0));
    Z.meta.generator = j["meta"].value("generator", "");
  }
  Z.validate();
  return Z;
}

json model_to_json(const RepresenterModel& model) {
  json j;
  j["space"] = space_to_json(*model.kernel.output_space());
  j["kernel"] = kernel_to_json(model.kernel);
  json anchors = json::array();
  for (const auto& a : model.anchors) anchors.push_back(vec_to_json(a));
  j["anchors"] = anchors;
  j["coeffs"] = mat_to_json(model.coeffs);
  j["lambda"] = model.lambda;
  j["loss"] = loss_to_json(model.loss);
  j["solver_log"] = {{"iterations", model.solver_log.iterations},
                     {"objective", model.solver_log.objective},
                     {"converged", model.solver_log.converged},
                     {"tolerance", model.solver_log.tolerance}};
  return j;
}

RepresenterModel model_from_json(const json& j) {
  const SpacePtr space = space_from_json(j.at("space"));
  RepresenterModel model{kernel_from_json(j.at("kernel"), space), {}, {}, 1.0, Loss{}, {}};
  for (const auto& a : j.at("anchors")) model.anchors.push_back(vec_from_json(a));
  model.coeffs = mat_from_json(j.at("coeffs"));
  model.lambda = j.at("lambda").get<double>();
  model.loss = loss_from_json(j.at("loss"));
  const json& log = j.at("solver_log");
  model.solver_log = {log.value("iterations", 0), log.value("objective", 0.0),
                      log.value("converged", true), log.value("tolerance", 0.0)};
  return model;
}

json stability_report_to_json(const StabilityReport& r) {
  json j;
  j["algo"] = loss_kind_name(r.algo);
  j["m"] = r.m;
  j["lambda"] = r.lambda;
  j["kappa"] = r.kappa;
  j["C_y"] = r.C_y;
  j["beta_theoretical"] = r.beta_theoretical;
  j["beta_empirical"] = r.beta_empirical;
  j["per_i_deviations"] = r.per_i_deviations;
  j["probe_count"] = r.probe_count;
  j["seed"] = r.seed;
  j["slack"] = r.slack;
  j["valid"] = r.valid;
  j["max_coeff_perturbation"] = r.max_coeff_perturbation;
  j["perturbation_bound"] = r.perturbation_bound;
  return j;
}

json bound_report_to_json(const BoundReport& r) {
  json j;
  j["delta"] = r.delta;
  j["R_emp"] = r.R_emp;
  j["beta"] = r.beta;
  j["M"] = r.M;
  j["bound_value"] = r.bound_value;
  j["risk_mc_estimate"] = r.risk_mc_estimate;
  j["mc_standard_error"] = r.mc_standard_error;
  j["mc_samples"] = r.mc_samples;
  j["seed"] = r.seed;
  j["holds"] = r.holds;
  return j;
}

}  // namespace opkr
