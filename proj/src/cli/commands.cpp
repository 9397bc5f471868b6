#include "manibo/cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"

#include "manibo/error.hpp"
#include "manibo/experiments.hpp"
#include "manibo/trace_io.hpp"

namespace manibo::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kCustomTargetStream = 101;

json config_json(const ExperimentConfig& config) {
  json out = json::object();
  for (const auto& f : config_fields()) {
    const std::string v = f.get(config);
    json value;
    if (v.empty()) {
      value = nullptr;
    } else {
      value = json::parse(v, nullptr, false);
      if (value.is_discarded() || value.is_object() || value.is_array()) value = v;
    }
    out[f.section][f.key] = value;
  }
  return out;
}

json optional_number(std::optional<double> v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

void write_csv(const fs::path& path, const RunTrace& trace, bool timing) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
  write_trace_csv(os, trace, timing);
}

struct OptimizerReport {
  double final_value;
  std::optional<double> distance;
  int evaluations;
  double wall_ms;
};

json report_json(const OptimizerReport& r, const std::optional<OracleOptimum>& oracle,
                 const std::string& csv) {
  json j;
  j["trace"] = csv;
  j["final_value"] = r.final_value;
  j["evaluations"] = r.evaluations;
  j["wall_ms"] = r.wall_ms;
  j["distance_to_oracle"] = optional_number(r.distance);
  j["err_to_oracle"] =
      optional_number(r.distance ? std::optional(std::log10(*r.distance)) : std::nullopt);
  if (oracle) {
    j["gap_to_oracle_value"] = r.final_value - oracle->value;
    if (oracle->value > 0) {
      j["relative_gap"] = (r.final_value - oracle->value) / oracle->value;
    }
  }
  return j;
}

std::optional<double> distance_to(const std::optional<OracleOptimum>& oracle,
                                  const ManifoldPoint& x) {
  if (!oracle) return std::nullopt;
  return extrinsic_distance(x, oracle->point);
}

fs::path output_root(const ExperimentConfig& config) {
  if (const char* env = std::getenv("MANIBO_OUT"); env && *env) return env;
  return config.out;
}

// Runs one seed; returns false when a run aborted.
bool run_seed(const ExperimentConfig& config, std::uint64_t seed, const fs::path& dir,
              std::ostream& out, std::ostream& err) {
  fs::create_directories(dir);
  const ProblemSetup setup = build_problem(config, seed);
  const auto& oracle = setup.objective.oracle;

  json summary;
  summary["experiment"] = to_string(config.experiment);
  summary["seed"] = seed;
  summary["manifold"] = setup.objective.kind.name();
  summary["config"] = config_json(config);
  summary["oracle"] = oracle ? json{{"value", oracle->value}} : json(nullptr);
  bool ok = true;

  const BoResult bo = run(setup.objective, bo_config(config, seed, setup.design));
  write_csv(dir / "ebo.csv", bo.trace, config.timing);
  {
    const double wall = bo.trace.records.empty() ? 0.0 : bo.trace.records.back().wall_ms;
    json j = report_json({bo.f_best, distance_to(oracle, bo.x_best), bo.evaluations, wall},
                         oracle, "ebo.csv");
    j["status"] = bo.status == RunStatus::Completed ? "completed" : "aborted";
    if (!bo.diagnostic.empty()) j["diagnostic"] = bo.diagnostic;
    j["kernel"] = {{"lengthscale", bo.final_params.lengthscale},
                   {"amplitude", bo.final_params.amplitude},
                   {"noise", bo.final_params.noise}};
    summary["optimizers"]["ebo"] = j;
    out << "seed " << seed << ": ebo f_best " << format_double(bo.f_best);
    if (auto d = distance_to(oracle, bo.x_best)) out << ", err_to_oracle " << std::log10(*d);
    out << '\n';
  }
  if (bo.status == RunStatus::Aborted) {
    err << "seed " << seed << ": eBO aborted: " << bo.diagnostic << '\n';
    ok = false;
  }

  // Baselines start from the first design point so that neither side gets the
  // other's evaluations for free.
  if (ok && config.gd) {
    try {
      GdOptions opts;
      opts.step = config.gd_step;
      opts.max_cost = *config.gd_budget;
      opts.max_iters = *config.gd_budget;
      const GdResult gd = riemannian_gd(*setup.grad, setup.design.front(), opts);
      write_csv(dir / "gd.csv", gd.trace, config.timing);
      const double wall = gd.trace.records.back().wall_ms;
      summary["optimizers"]["gd"] =
          report_json({gd.f, distance_to(oracle, gd.x), gd.f_evals + gd.grad_evals, wall},
                      oracle, "gd.csv");
    } catch (const Error& e) {
      err << "seed " << seed << ": gd failed: " << e.what() << '\n';
      summary["optimizers"]["gd"] = {{"status", "aborted"}, {"diagnostic", e.what()}};
      ok = false;
    }
  }
  if (ok && config.nelder_mead) {
    try {
      NelderMeadOptions opts;
      opts.max_evals = *config.nm_max_evals;
      opts.initial_size = config.nm_size;
      const NelderMeadResult nm = nelder_mead(setup.objective, setup.design.front(), opts);
      write_csv(dir / "nelder_mead.csv", nm.trace, config.timing);
      const double wall = nm.trace.records.empty() ? 0.0 : nm.trace.records.back().wall_ms;
      summary["optimizers"]["nelder-mead"] = report_json(
          {nm.f, distance_to(oracle, nm.x), nm.evaluations, wall}, oracle, "nelder_mead.csv");
    } catch (const Error& e) {
      err << "seed " << seed << ": nelder-mead failed: " << e.what() << '\n';
      summary["optimizers"]["nelder-mead"] = {{"status", "aborted"}, {"diagnostic", e.what()}};
      ok = false;
    }
  }
  summary["status"] = ok ? "completed" : "aborted";

  std::ofstream js(dir / "summary.json", std::ios::binary);
  js << summary.dump(2) << '\n';
  return ok;
}

}  // namespace

ProblemSetup build_problem(const ExperimentConfig& config, std::uint64_t seed) {
  const int k = *config.init;
  switch (config.experiment) {
    case Experiment::FrechetSphere: {
      const FrechetProblem problem = latitude_circle(config.points, config.latitude);
      GradObjective g = frechet_grad_objective(problem);
      auto design = random_design(g.base.kind, k, seed);
      return {g.base, g, std::move(design)};
    }
    case Experiment::GrassmannApprox: {
      const auto problem = random_grassmann_problem(
          config.rows, config.cols, config.rank, derive_seed(config.data_seed, seed));
      Objective obj = grassmann_objective(problem);
      auto design = config.design == "svd-shift" ? shifted_svd_design(problem, k)
                                                 : random_design(obj.kind, k, seed);
      return {obj, std::nullopt, std::move(design)};
    }
    case Experiment::SpdRegression: {
      const auto problem = generate_spd_regression_data(config.locations, config.data_noise,
                                                        config.data_seed, config.bandwidth)
                               .at(config.query);
      GradObjective g = spd_regression_grad_objective(problem);
      auto design = random_design(g.base.kind, k, seed);
      return {g.base, g, std::move(design)};
    }
    case Experiment::Custom: {
      const ManifoldKind kind = parse_manifold(config.manifold);
      const FrechetProblem problem{
          {random_point(kind, derive_seed(config.data_seed ^ seed, kCustomTargetStream))}};
      GradObjective g = frechet_grad_objective(problem);
      auto design = random_design(kind, k, seed);
      return {g.base, g, std::move(design)};
    }
  }
  throw Error(ErrorCode::Config, "unknown experiment");
}

BoConfig bo_config(const ExperimentConfig& config, std::uint64_t seed,
                   std::vector<ManifoldPoint> design) {
  BoConfig bc;
  bc.init = *config.init;
  bc.iters = *config.iters;
  bc.refit_every = config.refit_every;
  bc.ascent.max_steps = config.ascent_max_steps;
  bc.ascent.n_starts = config.ascent_starts;
  bc.ascent.grad_tol = config.grad_tol;
  bc.ascent_step = config.ascent_step;
  if (config.fixed_kernel) {
    bc.kernel = KernelParams{config.lengthscale, config.amplitude, config.noise};
  }
  bc.seed = seed;
  bc.initial_design = std::move(design);
  return bc;
}

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  log::set_level(config.log_level);
  const fs::path root = output_root(config);
  const auto seeds = run_seeds(config);
  const bool fan_out = !config.seeds.empty();
  int code = kExitOk;
  try {
    for (const auto seed : seeds) {
      const fs::path dir = fan_out ? root / ("seed-" + std::to_string(seed)) : root;
      if (!run_seed(config, seed, dir, out, err)) {
        code = kExitAbort;
        break;
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Config ? kExitUsage : kExitAbort;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitAbort;
  }
  if (code == kExitOk) out << "wrote results to " << root.string() << '\n';
  return code;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    apply_config_file(config, path);
    resolve(config);
  } catch (const Error& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitUsage;
  }
  out << to_ini(config);
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Extrinsic Bayesian optimization on manifolds"};
  app.require_subcommand(1);

  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "INI-style config file")
      ->check(CLI::ExistingFile);
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::map<std::string, CLI::Option*> options;
  for (const auto& f : config_fields()) {
    if (f.is_flag) {
      options[f.key] = run_cmd->add_flag("--" + f.key, switches[f.key], f.help);
    } else {
      options[f.key] = run_cmd->add_option("--" + f.key, values[f.key], f.help);
    }
  }

  CLI::App* validate_cmd = app.add_subcommand("validate", "check a config file");
  std::string validate_path;
  validate_cmd->add_option("config", validate_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (validate_cmd->parsed()) return cmd_validate(validate_path, std::cout, std::cerr);

  ExperimentConfig config;
  try {
    if (!config_path.empty()) apply_config_file(config, config_path);
    for (const auto& f : config_fields()) {
      if (options[f.key]->count() == 0) continue;
      if (f.is_flag) apply_setting(config, f.key, switches[f.key] ? "true" : "false");
      else apply_setting(config, f.key, values[f.key]);
    }
    resolve(config);
  } catch (const Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return cmd_run(config, std::cout, std::cerr);
}

}  // namespace manibo::cli
