#pragma once

// Comparison optimizers: Riemannian gradient descent for objectives with an
// analytic gradient, and Nelder-Mead run in flat embedded coordinates.

#include <functional>

#include "manibo/bo.hpp"
#include "manibo/manifolds.hpp"

namespace manibo {

struct GradObjective {
  Objective base;
  /// Euclidean gradient of f o J^{-1} at J(x), in ambient coordinates.
  std::function<Ambient(const ManifoldPoint&)> grad;
};

struct GdOptions {
  double step = 0.5;  ///< initial step each iteration, before backtracking
  int max_iters = 100;
  double tol = 1e-10;  ///< on the projected-gradient norm
  int max_halvings = 20;
  /// Budget on objective + gradient evaluations after the start point;
  /// 0 means unlimited. The value at x0 is not charged.
  int max_cost = 0;
};

struct GdResult {
  ManifoldPoint x;
  double f;
  RunTrace trace;  ///< record 0 is x0, then one record per accepted step
  int iterations = 0;
  int f_evals = 0;
  int grad_evals = 0;
};

/// x_{t+1} = exp_map(x_t, -P grad f(x_t), step), halving the step until f
/// decreases. Stops when the projected gradient norm drops below tol, when
/// max_iters or the cost budget is reached, or when backtracking fails.
GdResult riemannian_gd(const GradObjective& objective, const ManifoldPoint& x0,
                       const GdOptions& options = {});

struct NelderMeadOptions {
  int max_evals = 200;
  double tol = 1e-8;  ///< simplex diameter in flat ambient coordinates
  double initial_size = 0.1;
};

struct NelderMeadResult {
  ManifoldPoint x;
  double f;
  RunTrace trace;  ///< one record per objective evaluation
  int evaluations = 0;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5) on the flat coordinates of the embedding. Every vertex is
/// mapped through unembed before f sees it; candidates that cannot be
/// unembedded score +inf.
NelderMeadResult nelder_mead(const Objective& objective, const ManifoldPoint& x0,
                             const NelderMeadOptions& options = {});

}  // namespace manibo
