#pragma once

// Extrinsic Bayesian optimization outer loop.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "manibo/acquisition.hpp"
#include "manibo/egp.hpp"
#include "manibo/manifolds.hpp"

namespace manibo {

struct OracleOptimum {
  ManifoldPoint point;
  double value;
};

/// Black-box objective to minimize. Only values are ever requested.
struct Objective {
  ManifoldKind kind;
  std::function<double(const ManifoldPoint&)> eval;
  std::optional<OracleOptimum> oracle;
};

struct BoConfig {
  int init = 5;          ///< k, size of the initial design
  int iters = 25;        ///< T, number of acquisition-driven evaluations
  int refit_every = 5;   ///< hyperparameter refit cadence; 0 disables fitting
  AscentConfig ascent;   ///< `step` is ignored when ascent_step is unset
  std::optional<double> ascent_step;   ///< unset: 0.1 x current lengthscale
  std::optional<KernelParams> kernel;  ///< unset: median heuristic ("auto")
  std::uint64_t seed = 0;
  /// Replaces the random initial design when non-empty (init is ignored).
  std::vector<ManifoldPoint> initial_design;

  void validate() const;
};

/// One row of a convergence trace. Shared by eBO and the baselines.
struct TraceRecord {
  int iter;
  std::optional<ManifoldPoint> proposed;
  double f_next;
  double f_best;
  std::optional<ManifoldPoint> best_point;
  std::optional<double> oracle_distance;  ///< extrinsic distance of best_point
  int evaluations;  ///< cumulative cost charged so far
  double wall_ms;   ///< since the start of the run
};

struct RunTrace {
  std::vector<TraceRecord> records;
};

enum class RunStatus { Completed, Aborted };

struct BoResult {
  ManifoldPoint x_best;
  double f_best;
  RunTrace trace;
  RunStatus status = RunStatus::Completed;
  std::string diagnostic;
  KernelParams final_params;
  int evaluations = 0;
};

/// The k-point random initial design run() draws when none is supplied.
std::vector<ManifoldPoint> random_design(const ManifoldKind& kind, int k,
                                         std::uint64_t seed);

/// Initial design, then `iters` rounds of acquisition maximization and
/// evaluation. Record 0 of the trace describes the initial design; record s
/// describes iteration s. Failures mid-run return status Aborted together
/// with everything recorded up to that point.
BoResult run(const Objective& objective, const BoConfig& config);

/// Returns x_next unchanged unless it lies within 1e-8 (extrinsic distance)
/// of a dataset point, in which case a random tangent step of length
/// 0.1 * lengthscale is taken via exp_map until it is clear of the data.
ManifoldPoint proposal_dedup(const GpDataset& data, const ManifoldPoint& x_next,
                             double lengthscale, Rng& rng);

}  // namespace manibo
