#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "manibo/baselines.hpp"
#include "manibo/bo.hpp"
#include "manibo/cli/config.hpp"

namespace manibo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAbort = 1;
inline constexpr int kExitUsage = 2;

/// Objective, optional analytic gradient and initial design for one seed.
struct ProblemSetup {
  Objective objective;
  std::optional<GradObjective> grad;
  std::vector<ManifoldPoint> design;
};

/// Builds the configured experiment. Problem data come from data-seed (and,
/// for grassmann-approx and custom, also from `seed`); the design comes from
/// `seed`. Expects a resolved config.
ProblemSetup build_problem(const ExperimentConfig& config, std::uint64_t seed);

/// BoConfig equivalent of the resolved config for one seed.
BoConfig bo_config(const ExperimentConfig& config, std::uint64_t seed,
                   std::vector<ManifoldPoint> design);

/// Runs every seed, writing ebo.csv, gd.csv / nelder_mead.csv when enabled and
/// summary.json into the output directory (seed-<s>/ subdirectories when
/// several seeds are given). Returns kExitAbort when any run aborted.
int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Parses and resolves a config file, printing the resolved settings.
int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err);

/// Command-line entry point: `run [flags]` or `validate <config>`.
int run_cli(int argc, char** argv);

}  // namespace manibo::cli
