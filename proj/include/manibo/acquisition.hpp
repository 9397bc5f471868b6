#pragma once

// Probability-of-improvement acquisition for minimization and its
// maximization on the embedded image by projected gradient ascent.

#include <cstdint>
#include <span>

#include "manibo/egp.hpp"
#include "manibo/manifolds.hpp"

namespace manibo {

double normal_cdf(double x);
double normal_pdf(double x);

struct AcquisitionState {
  GpModel model;
  double f_best;
  double sigma_floor;

  /// sigma_floor = 1e-12 * sqrt(sigma_f^2).
  static AcquisitionState make(GpModel model, double f_best);
  /// f_best = smallest observed value in the model's dataset.
  static AcquisitionState from_model(GpModel model);
};

struct AscentConfig {
  double step = 0.1;       ///< initial step length lambda, ambient units
  int max_steps = 200;     ///< T
  double grad_tol = 1e-8;  ///< on the projected-gradient norm
  int n_starts = 10;
  std::uint64_t seed = 0;
  int max_halvings = 20;

  void validate() const;
  /// lambda = 0.1 * lengthscale, remaining fields at their defaults.
  static AscentConfig defaults_for(const KernelParams& params);
};

/// Phi((f_best - nu) / max(sigma, sigma_floor)).
double pi_value(const AcquisitionState& state, const ManifoldPoint& x);
double pi_value_ambient(const AcquisitionState& state, const Ambient& xt);

/// Euclidean gradient of the acquisition with respect to the embedded
/// coordinates, evaluated at J(x). Zero when phi(r) underflows.
Ambient pi_gradient_ambient(const AcquisitionState& state, const ManifoldPoint& x);
Ambient pi_gradient_at(const AcquisitionState& state, const Ambient& xt);

struct AscentResult {
  ManifoldPoint point;
  double value;
  int steps;
};

/// Projected gradient ascent from x0. Each step moves a distance lambda along
/// the normalized projected gradient through exp_map; a step that does not
/// increase the acquisition is retried with lambda halved, up to
/// max_halvings times, after which the ascent stops. Returns the best iterate
/// seen.
AscentResult ascend(const AcquisitionState& state, const AscentConfig& config,
                    const ManifoldPoint& x0);

/// Ascends from each start and returns the best result; ties go to the lowest
/// start index.
AscentResult maximize_from(const AcquisitionState& state,
                           const AscentConfig& config,
                           std::span<const ManifoldPoint> starts);

/// Starts are the best observed point followed by n_starts - 1 random points
/// drawn from per-start streams derived from config.seed.
AscentResult maximize(const AcquisitionState& state, const AscentConfig& config);

}  // namespace manibo
