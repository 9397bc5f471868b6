#pragma once

// Experiment configuration shared by the command-line flags and the INI-style
// config file. File keys mirror flag names and live in fixed sections.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "manibo/log.hpp"
#include "manibo/manifolds.hpp"

namespace manibo::cli {

enum class Experiment { FrechetSphere, GrassmannApprox, SpdRegression, Custom };

std::string to_string(Experiment e);

struct ExperimentConfig {
  Experiment experiment = Experiment::FrechetSphere;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;  ///< fan-out; takes precedence over seed
  std::string out = "manibo-out";
  bool timing = false;
  log::Level log_level = log::Level::Warn;

  // [bo]; unset values get per-experiment defaults in resolve()
  std::optional<int> init;
  std::optional<int> iters;
  int refit_every = 5;
  bool fixed_kernel = false;  ///< kernel = fixed | auto
  double lengthscale = 1.0;
  double amplitude = 1.0;
  double noise = 1e-6;

  // [ascent]
  std::optional<double> ascent_step;
  int ascent_max_steps = 200;
  int ascent_starts = 10;
  double grad_tol = 1e-8;

  // [problem]
  int points = 8;            ///< frechet-sphere data size
  double latitude = -0.5;    ///< frechet-sphere circle height
  int rows = 3;              ///< grassmann-approx F rows (n)
  int cols = 6;              ///< grassmann-approx F columns (m)
  int rank = 2;              ///< grassmann-approx subspace dimension (p)
  std::string design = "random";  ///< random | svd-shift (grassmann only)
  int locations = 75;        ///< spd-regression covariate count
  double data_noise = 0.1;
  std::uint64_t data_seed = 42;
  double bandwidth = 0.1;
  double query = 0.5;
  std::string manifold = "sphere:2";  ///< custom: sphere:N | grassmann:P,N | spd:P

  // [baselines]
  bool gd = false;
  bool nelder_mead = false;
  double gd_step = 0.5;
  std::optional<int> gd_budget;     ///< default: iters
  std::optional<int> nm_max_evals;  ///< default: init + iters
  double nm_size = 0.1;
};

/// One configurable key. The flag is "--" + key; in a file the key appears
/// under [section].
struct ConfigField {
  std::string section;
  std::string key;
  std::string help;
  bool is_flag = false;  ///< boolean switch on the command line
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;  ///< "" when unset
};

const std::vector<ConfigField>& config_fields();

/// Parses `value` into the field named `key`. Throws Error(Config) naming the
/// key on unknown keys or malformed values.
void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value);

/// Reads an INI-style file into `config`. Keys outside a section, unknown
/// sections, keys in the wrong section and unknown keys are rejected.
void apply_config_file(ExperimentConfig& config, const std::string& path);

/// Materializes experiment-dependent defaults and checks consistency. Throws
/// Error(Config) when the configuration cannot be run (missing seed, gd on an
/// experiment without gradient, bad manifold spec, ...).
void resolve(ExperimentConfig& config);

/// "sphere:N", "grassmann:P,N" or "spd:P". Throws Error(Config).
ManifoldKind parse_manifold(const std::string& spec);

/// The seeds to run: `seeds` when non-empty, otherwise the single seed.
std::vector<std::uint64_t> run_seeds(const ExperimentConfig& config);

/// Every field, grouped by section, in a form apply_config_file accepts.
std::string to_ini(const ExperimentConfig& config);

}  // namespace manibo::cli
