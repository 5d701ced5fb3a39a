// opkr: batch experiment front-end for the operator-valued kernel regression
// library. Subcommands: datagen, train, kernel-audit, stability, bound.
// Exit codes: 0 success, 2 config validation error, 3 numerical failure.
#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <Eigen/Cholesky>
#include <opkr/parallel.hpp>
#include <opkr/rng.hpp>
#include <opkr/serialize.hpp>

namespace fs = std::filesystem;
using namespace opkr;

namespace {

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  in >> j;
  if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_report(const fs::path& path, json report) {
  report["timestamp"] = timestamp_utc();
  write_text(path, report.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

SpacePtr space_from_config(const json& cfg) {
  if (!cfg.contains("space")) return OutputSpace::uniform_l2(0.0, 1.0, 16);
  const json& j = cfg["space"];
  if (j.contains("grid")) return space_from_json(j);
  const std::string kind = j.value("kind", "discretized_l2");
  if (kind == "finite") return OutputSpace::finite(j.value("dim", 4));
  if (kind == "discretized_l2")
    return OutputSpace::uniform_l2(j.value("a", 0.0), j.value("b", 1.0), j.value("n", 16));
  throw std::invalid_argument("unknown space kind '" + kind + "'");
}

json named_kernel_json(const std::string& name) {
  const json gaussian = {{"kind", "gaussian"}, {"bandwidth", 1.0}};
  if (name == "gaussian_identity")
    return {{"kind", "scalar_times_identity"},
            {"scalar", gaussian},
            {"params", {{"input_kind", "function"}}}};
  if (name == "separable")
    return {{"kind", "separable_multiplication"},
            {"scalar", gaussian},
            {"params",
             {{"input_kind", "function"},
              {"multiplier", {{"curve", "half_exp_plus_one"}, {"scale", 2.0}}},
              {"sup_bound", 2.0}}}};
  if (name == "non_separable")
    return {{"kind", "non_separable_multiplication"},
            {"params", {{"input_kind", "function"}, {"sup_bound", 1.0}}}};
  if (name == "rank_one_sum")
    return {{"kind", "rank_one_sum"},
            {"scalar", gaussian},
            {"params",
             {{"input_kind", "function"}, {"y0", {{"curve", "constant"}, {"scale", 1.0}}}}}};
  if (name == "rank_one_only")
    return {{"kind", "rank_one_only"},
            {"scalar", gaussian},
            {"params",
             {{"input_kind", "function"}, {"y0", {{"curve", "constant"}, {"scale", 1.0}}}}}};
  throw std::invalid_argument(
      "unknown kernel name '" + name +
      "' (expected gaussian_identity|separable|non_separable|rank_one_sum|rank_one_only)");
}

json loss_config(const json& cfg) {
  return cfg.contains("loss") ? cfg["loss"] : json{{"kind", "square"}};
}

GeneratorSpec generator_from_config(const json& cfg, const SpacePtr& space) {
  GeneratorSpec spec = cfg.contains("generator")
                           ? generator_from_json(cfg["generator"], space.get())
                           : GeneratorSpec{};
  if (cfg.contains("m")) spec.m = cfg["m"].get<int>();
  if (cfg.contains("seed")) spec.seed = cfg["seed"].get<std::uint64_t>();
  return spec;
}

StabilityOptions stability_options(const json& cfg) {
  StabilityOptions opts;
  opts.workers = cfg.value("workers", 0);
  return opts;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  bool workers_set = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--out", out_dir, "output directory");
    auto* s = cmd->add_option("--seed", seed, "master seed");
    s->each([this](const std::string&) { seed_set = true; });
    auto* w = cmd->add_option("--workers", workers, "worker thread count");
    w->each([this](const std::string&) { workers_set = true; });
  }

  /// file < flags precedence; the merged config is what reports embed.
  json merged() const {
    json cfg = load_config(config_path);
    if (seed_set) cfg["seed"] = seed;
    if (workers_set) cfg["workers"] = workers;
    if (!cfg.contains("seed")) cfg["seed"] = static_cast<std::uint64_t>(0);
    return cfg;
  }
};

// ---------------------------------------------------------------------------
// datagen

int cmd_datagen(const json& cfg, const std::string& out_dir) {
  const SpacePtr space = space_from_config(cfg);
  const GeneratorSpec spec = generator_from_config(cfg, space);
  const Dataset Z = generate(spec, space);
  json report;
  report["config"] = cfg;
  report["seed"] = spec.seed;
  report["dataset"] = dataset_to_json(Z);
  write_report(fs::path(out_dir) / "dataset.json", std::move(report));
  return 0;
}

// ---------------------------------------------------------------------------
// train

Dataset dataset_for(const json& cfg, const SpacePtr& space, const std::string& data_path) {
  if (!data_path.empty()) {
    std::ifstream in(data_path);
    if (!in) throw std::invalid_argument("cannot open dataset file: " + data_path);
    json j;
    in >> j;
    return dataset_from_json(j.contains("dataset") ? j["dataset"] : j);
  }
  return generate(generator_from_config(cfg, space), space);
}

int cmd_train(const json& cfg, const std::string& out_dir, const std::string& data_path) {
  const SpacePtr space = space_from_config(cfg);
  const Dataset Z = dataset_for(cfg, space, data_path);
  const OperatorKernel K = kernel_from_json(
      cfg.contains("kernel") ? cfg["kernel"] : named_kernel_json("gaussian_identity"),
      Z.space);
  const Loss loss = loss_from_json(loss_config(cfg));

  std::vector<double> lambdas;
  if (cfg.contains("lambda_grid"))
    for (const auto& l : cfg["lambda_grid"]) lambdas.push_back(l.get<double>());
  else
    lambdas.push_back(cfg.value("lambda", 0.1));
  if (lambdas.empty()) throw std::invalid_argument("empty lambda_grid");
  for (double l : lambdas)
    if (!(l > 0)) throw std::invalid_argument("lambda must be > 0");

  SolverOptions sopts;
  sopts.tol = cfg.value("solver_tol", 1e-7);
  sopts.max_iters = cfg.value("solver_max_iters", 5000);

  json metrics = json::array();
  std::string csv = "lambda,R_emp,rkhs_norm,objective,iterations,converged\n";
  int exit_code = 0;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const double lambda = lambdas[li];
    const RepresenterModel model = loss.kind == LossKind::Square
                                       ? fit_square(K, Z, lambda)
                                       : fit_subgradient(K, Z, lambda, loss, sopts);
    if (!model.solver_log.converged) exit_code = 3;
    const double r_emp = empirical_risk(model, Z);
    metrics.push_back({{"lambda", lambda},
                       {"R_emp", r_emp},
                       {"rkhs_norm", model.rkhs_norm()},
                       {"objective", model.solver_log.objective},
                       {"iterations", model.solver_log.iterations},
                       {"converged", model.solver_log.converged}});
    csv += std::to_string(lambda) + "," + std::to_string(r_emp) + "," +
           std::to_string(model.rkhs_norm()) + "," +
           std::to_string(model.solver_log.objective) + "," +
           std::to_string(model.solver_log.iterations) + "," +
           (model.solver_log.converged ? "1" : "0") + "\n";

    json report;
    report["config"] = cfg;
    report["seed"] = cfg["seed"];
    report["model"] = model_to_json(model);
    report["metrics"] = metrics.back();
    const std::string name =
        lambdas.size() == 1 ? "model.json" : "model_" + std::to_string(li) + ".json";
    write_report(fs::path(out_dir) / name, std::move(report));
  }
  write_text(fs::path(out_dir) / "train_summary.csv", csv);
  json summary;
  summary["config"] = cfg;
  summary["seed"] = cfg["seed"];
  summary["metrics"] = metrics;
  write_report(fs::path(out_dir) / "train_metrics.json", std::move(summary));
  return exit_code;
}

// ---------------------------------------------------------------------------
// kernel-audit

Input random_audit_input(const OperatorKernel& K, Rng& rng) {
  const int n = K.input_kind() == InputKind::Function
                    ? K.input_space()->dim()
                    : (K.output_space()->kind() == SpaceKind::FiniteDim
                           ? K.output_space()->dim()
                           : 4);
  double bound = 1.0;
  if (K.kind() == OperatorKernelKind::NonSeparableMultiplication)
    bound = std::min(bound, K.sup_bound());
  Input x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(-bound, bound);
  if (K.scalar().kind == ScalarKernelKind::Linear) {
    const double nb = K.scalar().input_norm_bound;
    const double xn = K.input_kind() == InputKind::Function
                          ? K.input_space()->norm(x)
                          : x.norm();
    if (xn > nb) x *= nb / xn;
  }
  return x;
}

OutVec random_out(const SpacePtr& space, Rng& rng) {
  Eigen::VectorXd v(space->dim());
  for (int i = 0; i < space->dim(); ++i) v[i] = rng.normal();
  return OutVec(space, v);
}

int cmd_kernel_audit(const json& cfg, const std::string& out_dir) {
  const SpacePtr space = space_from_config(cfg);
  const json kernel_cfg =
      cfg.contains("kernel") ? cfg["kernel"] : named_kernel_json("gaussian_identity");
  const OperatorKernel K = kernel_from_json(kernel_cfg, space);
  const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
  bool ok = true;
  json report;
  report["config"] = cfg;
  report["seed"] = seed;
  report["kernel"] = kernel_to_json(K);
  report["kappa_sq"] = K.kappa_sq();

  {  // Hermitian symmetry: <K(x,z)a, b> = <a, K(z,x)b>
    Rng rng(seed, "audit-hermitian");
    double max_rel = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const Input x = random_audit_input(K, rng), z = random_audit_input(K, rng);
      const OutVec a = random_out(space, rng), b = random_out(space, rng);
      const double lhs = inner(K.apply(x, z, a), b);
      const double rhs = inner(a, K.apply(z, x, b));
      max_rel = std::max(max_rel,
                         std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
    }
    const bool pass = max_rel <= 1e-10;
    ok = ok && pass;
    report["hermitian"] = {{"checks", 100}, {"max_rel_err", max_rel}, {"pass", pass}};
  }

  {  // PSD of small dense Grams
    Rng rng(seed, "audit-psd");
    double worst_ratio = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const int m = 2 + static_cast<int>(rng.uniform_int(4));
      std::vector<Input> xs;
      for (int i = 0; i < m; ++i) xs.push_back(random_audit_input(K, rng));
      const auto [mn, mx] = K.gram(xs).eigen_range();
      if (mx > 0) worst_ratio = std::min(worst_ratio, mn / mx);
    }
    const bool pass = worst_ratio >= -1e-8;
    ok = ok && pass;
    report["psd"] = {{"checks", 20}, {"min_over_max_eig", worst_ratio}, {"pass", pass}};
  }

  {  // numeric operator norm against the analytic kappa_sq bound
    Rng rng(seed, "audit-kappa");
    double max_ratio = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const Input x = random_audit_input(K, rng);
      const auto pi = K.operator_norm_numeric(x, 1e-10);
      max_ratio = std::max(max_ratio, pi.value / K.kappa_sq());
    }
    const bool pass = max_ratio <= 1.0 + 1e-6;
    ok = ok && pass;
    report["kappa_audit"] = {{"checks", 100}, {"max_norm_over_kappa_sq", max_ratio}, {"pass", pass}};
  }

  {  // pointwise bound ||f(x)|| <= kappa ||f||_H on random representers
    Rng rng(seed, "audit-pointwise");
    double max_excess = -1e300;
    for (int rep = 0; rep < 200; ++rep) {
      const int r = 1 + static_cast<int>(rng.uniform_int(4));
      std::vector<Input> xs;
      std::vector<OutVec> cs;
      for (int j = 0; j < r; ++j) {
        xs.push_back(random_audit_input(K, rng));
        cs.push_back(random_out(space, rng));
      }
      const double fnorm = std::sqrt(std::max(0.0, K.reproducing_norm_sq(xs, cs)));
      for (int probe = 0; probe < 5; ++probe) {
        const Input x = random_audit_input(K, rng);
        OutVec fx = zero_vec(space);
        for (int j = 0; j < r; ++j) fx = axpy(1.0, K.apply(x, xs[j], cs[j]), fx);
        max_excess = std::max(max_excess, norm(fx) - K.kappa() * fnorm);
      }
    }
    const bool pass = max_excess <= 1e-8;
    ok = ok && pass;
    report["pointwise_bound"] = {{"checks", 1000}, {"max_excess", max_excess}, {"pass", pass}};
  }

  // Hilbert-Schmidt audit: rebuild the kernel from its (resolution-
  // independent) spec at each grid size. Array-valued curve params cannot be
  // rebuilt across resolutions; the audit is then skipped.
  if (space->kind() == SpaceKind::DiscretizedL2) {
    try {
      const double a = space->grid()[0], b = space->grid()[space->dim() - 1];
      const auto audit = hilbert_schmidt_audit(
          [&](int n) {
            auto sp = OutputSpace::uniform_l2(a, b, n);
            OperatorKernel Kn = kernel_from_json(kernel_cfg, sp);
            Rng rng(seed, "audit-hs", n);
            Input probe = random_audit_input(Kn, rng);
            return std::make_pair(std::move(Kn), std::move(probe));
          },
          {32, 64, 128, 256});
      report["hs_audit"] = {{"verdict", audit.verdict == HSVerdict::HSLikely ? "hs_likely" : "not_hs"},
                           {"slope", audit.slope},
                           {"resolutions", audit.resolutions},
                           {"traces", audit.traces}};
    } catch (const std::exception& e) {
      report["hs_audit"] = {{"skipped", e.what()}};
    }
  } else {
    report["hs_audit"] = {{"skipped", "finite-dimensional output space"}};
  }

  report["pass"] = ok;
  write_report(fs::path(out_dir) / "kernel_audit.json", std::move(report));
  return ok ? 0 : 3;
}

// ---------------------------------------------------------------------------
// stability

int cmd_stability(const json& cfg, const std::string& out_dir) {
  const SpacePtr space = space_from_config(cfg);
  const OperatorKernel K = kernel_from_json(
      cfg.contains("kernel") ? cfg["kernel"] : named_kernel_json("gaussian_identity"), space);
  const Loss loss = loss_from_json(loss_config(cfg));
  const double lambda = cfg.value("lambda", 0.1);
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be > 0");
  const int probe_count = cfg.value("probes", 200);
  const StabilityOptions opts = stability_options(cfg);
  GeneratorSpec spec = generator_from_config(cfg, space);

  if (cfg.contains("m_list")) {  // scaling sweep
    std::vector<int> m_list;
    for (const auto& m : cfg["m_list"]) m_list.push_back(m.get<int>());
    std::vector<std::uint64_t> seeds;
    if (cfg.contains("seeds"))
      for (const auto& s : cfg["seeds"]) seeds.push_back(s.get<std::uint64_t>());
    else
      for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(spec.seed + s);
    const auto curve = beta_scaling_curve(K, spec, space, loss, lambda, m_list, seeds,
                                          probe_count, opts);
    json report;
    report["config"] = cfg;
    report["seed"] = spec.seed;
    report["empirical_slope"] = curve.empirical_slope;
    json points = json::array();
    std::string csv = "m,median_beta_empirical,beta_theoretical\n";
    for (const auto& p : curve.points) {
      points.push_back({{"m", p.m},
                        {"median_beta_empirical", p.median_beta_empirical},
                        {"beta_theoretical", p.beta_theoretical}});
      csv += std::to_string(p.m) + "," + std::to_string(p.median_beta_empirical) + "," +
             std::to_string(p.beta_theoretical) + "\n";
    }
    report["points"] = points;
    write_text(fs::path(out_dir) / "stability_scaling.csv", csv);
    write_report(fs::path(out_dir) / "stability_scaling.json", std::move(report));
    return 0;
  }

  const Dataset Z = generate(spec, space);
  const auto probes = fresh_probes(spec, space, probe_count, spec.seed);
  const StabilityReport r = measure_beta(K, Z, lambda, loss, probes, opts);
  json report;
  report["config"] = cfg;
  report["seed"] = spec.seed;
  report["stability"] = stability_report_to_json(r);
  const bool headline = r.valid && r.beta_empirical <= r.beta_theoretical + r.slack;
  report["headline_pass"] = headline;
  std::string csv =
      "loss,m,lambda,kappa,beta_empirical,beta_theoretical,slack,valid,headline_pass\n";
  csv += std::string(loss_kind_name(r.algo)) + "," + std::to_string(r.m) + "," +
         std::to_string(r.lambda) + "," + std::to_string(r.kappa) + "," +
         std::to_string(r.beta_empirical) + "," + std::to_string(r.beta_theoretical) + "," +
         std::to_string(r.slack) + "," + (r.valid ? "1" : "0") + "," + (headline ? "1" : "0") +
         "\n";
  write_text(fs::path(out_dir) / "stability_summary.csv", csv);
  write_report(fs::path(out_dir) / "stability.json", std::move(report));
  return headline ? 0 : 3;
}

// ---------------------------------------------------------------------------
// bound

int cmd_bound(const json& cfg, const std::string& out_dir) {
  const SpacePtr space = space_from_config(cfg);
  const OperatorKernel K = kernel_from_json(
      cfg.contains("kernel") ? cfg["kernel"] : named_kernel_json("gaussian_identity"), space);
  const Loss loss = loss_from_json(loss_config(cfg));
  const double lambda = cfg.value("lambda", 0.1);
  const double delta = cfg.value("delta", 0.05);
  const int reps = cfg.value("reps", 50);
  const int mc_samples = cfg.value("mc_samples", 2000);
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be > 0");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must be in (0,1)");
  GeneratorSpec spec = generator_from_config(cfg, space);
  const int m = cfg.value("m", spec.m);

  const auto reports =
      bound_check(K, spec, space, loss, lambda, m, delta, reps, mc_samples,
                  stability_options(cfg));
  int holds = 0;
  json rows = json::array();
  std::string csv = "rep,R_emp,beta,M,bound_value,risk_mc_estimate,mc_standard_error,holds\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (r.holds) ++holds;
    rows.push_back(bound_report_to_json(r));
    csv += std::to_string(i) + "," + std::to_string(r.R_emp) + "," + std::to_string(r.beta) +
           "," + std::to_string(r.M) + "," + std::to_string(r.bound_value) + "," +
           std::to_string(r.risk_mc_estimate) + "," + std::to_string(r.mc_standard_error) +
           "," + (r.holds ? "1" : "0") + "\n";
  }
  const double fraction = static_cast<double>(holds) / reports.size();
  json report;
  report["config"] = cfg;
  report["seed"] = spec.seed;
  report["holds_fraction"] = fraction;
  report["reports"] = rows;
  write_text(fs::path(out_dir) / "bound_summary.csv", csv);
  write_report(fs::path(out_dir) / "bound.json", std::move(report));
  return fraction >= 1.0 - delta ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator-valued kernel regression experiment harness"};
  app.require_subcommand(1);

  CommonFlags datagen_flags, train_flags, audit_flags, stab_flags, bound_flags;

  auto* datagen = app.add_subcommand("datagen", "generate a synthetic dataset");
  datagen_flags.attach(datagen);
  int dg_m = 0;
  datagen->add_option("--m", dg_m, "sample count");

  auto* train = app.add_subcommand("train", "fit a regularized model");
  train_flags.attach(train);
  std::string train_data, train_kernel, train_loss;
  double train_lambda = 0.0, train_eps = 0.0;
  train->add_option("--data", train_data, "dataset JSON file (otherwise generated)");
  train->add_option("--kernel", train_kernel, "named kernel");
  train->add_option("--loss", train_loss, "square|eps_insensitive|logistic");
  auto* tl = train->add_option("--lambda", train_lambda, "regularization strength");
  auto* te = train->add_option("--epsilon", train_eps, "eps-insensitive tube radius");
  int tr_m = 0;
  train->add_option("--m", tr_m, "sample count when generating");

  auto* audit = app.add_subcommand("kernel-audit", "kernel axiom and HS audits");
  audit_flags.attach(audit);
  std::string audit_kernel;
  audit->add_option("--kernel", audit_kernel, "named kernel");

  auto* stab = app.add_subcommand("stability", "uniform-stability harness");
  stab_flags.attach(stab);
  std::string stab_kernel, stab_loss;
  double stab_lambda = 0.0, stab_eps = 0.0;
  int stab_m = 0, stab_probes = 0;
  stab->add_option("--kernel", stab_kernel, "named kernel");
  stab->add_option("--loss", stab_loss, "square|eps_insensitive|logistic");
  auto* sl = stab->add_option("--lambda", stab_lambda, "regularization strength");
  auto* se = stab->add_option("--epsilon", stab_eps, "eps-insensitive tube radius");
  auto* sm = stab->add_option("--m", stab_m, "sample count");
  auto* sp = stab->add_option("--probes", stab_probes, "probe count");

  auto* bound = app.add_subcommand("bound", "generalization-bound check");
  bound_flags.attach(bound);
  std::string bound_kernel, bound_loss;
  double bound_lambda = 0.0, bound_delta = 0.0, bound_eps = 0.0;
  int bound_m = 0, bound_reps = 0;
  bound->add_option("--kernel", bound_kernel, "named kernel");
  bound->add_option("--loss", bound_loss, "square|eps_insensitive|logistic");
  auto* bl = bound->add_option("--lambda", bound_lambda, "regularization strength");
  auto* be = bound->add_option("--epsilon", bound_eps, "eps-insensitive tube radius");
  auto* bd = bound->add_option("--delta", bound_delta, "failure probability");
  auto* bm = bound->add_option("--m", bound_m, "sample count");
  auto* br = bound->add_option("--reps", bound_reps, "repetitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto with_loss = [](json& cfg, const std::string& name, const CLI::Option* eps_opt,
                      double eps) {
    if (!name.empty()) {
      json l{{"kind", name}};
      if (name == "eps_insensitive")
        l["epsilon"] = eps_opt->count() ? eps : cfg.contains("loss")
                                                     ? cfg["loss"].value("epsilon", 0.1)
                                                     : 0.1;
      cfg["loss"] = l;
    } else if (eps_opt->count()) {
      if (!cfg.contains("loss")) cfg["loss"] = {{"kind", "eps_insensitive"}};
      cfg["loss"]["epsilon"] = eps;
    }
  };

  try {
    if (datagen->parsed()) {
      json cfg = datagen_flags.merged();
      if (dg_m > 0) cfg["m"] = dg_m;
      return cmd_datagen(cfg, datagen_flags.out_dir);
    }
    if (train->parsed()) {
      json cfg = train_flags.merged();
      if (!train_kernel.empty()) cfg["kernel"] = named_kernel_json(train_kernel);
      with_loss(cfg, train_loss, te, train_eps);
      if (tl->count()) cfg["lambda"] = train_lambda;
      if (tr_m > 0) cfg["m"] = tr_m;
      return cmd_train(cfg, train_flags.out_dir, train_data);
    }
    if (audit->parsed()) {
      json cfg = audit_flags.merged();
      if (!audit_kernel.empty()) cfg["kernel"] = named_kernel_json(audit_kernel);
      return cmd_kernel_audit(cfg, audit_flags.out_dir);
    }
    if (stab->parsed()) {
      json cfg = stab_flags.merged();
      if (!stab_kernel.empty()) cfg["kernel"] = named_kernel_json(stab_kernel);
      with_loss(cfg, stab_loss, se, stab_eps);
      if (sl->count()) cfg["lambda"] = stab_lambda;
      if (sm->count()) cfg["m"] = stab_m;
      if (sp->count()) cfg["probes"] = stab_probes;
      return cmd_stability(cfg, stab_flags.out_dir);
    }
    if (bound->parsed()) {
      json cfg = bound_flags.merged();
      if (!bound_kernel.empty()) cfg["kernel"] = named_kernel_json(bound_kernel);
      with_loss(cfg, bound_loss, be, bound_eps);
      if (bl->count()) cfg["lambda"] = bound_lambda;
      if (bd->count()) cfg["delta"] = bound_delta;
      if (bm->count()) cfg["m"] = bound_m;
      if (br->count()) cfg["reps"] = bound_reps;
      return cmd_bound(cfg, bound_flags.out_dir);
    }
  } catch (const std::invalid_argument& e) {  // includes DimensionError
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
