#pragma once

// Extrinsic Gaussian process surrogate: a squared-exponential kernel evaluated
// on embedded coordinates, zero prior mean, Cholesky-based posterior.

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "manibo/manifolds.hpp"

namespace manibo {

struct KernelParams {
  double lengthscale = 1.0;  ///< embedding-space units
  double amplitude = 1.0;    ///< sigma_f^2
  double noise = 1e-6;       ///< sigma_n^2

  /// Throws Error(InvalidInput) unless lengthscale > 0, amplitude > 0 and
  /// noise >= 0 (all finite).
  void validate() const;
};

class GpDataset {
 public:
  explicit GpDataset(ManifoldKind kind) : kind_(kind) {}

  /// Appends an observation. Throws on kind mismatch or non-finite value.
  void add(const ManifoldPoint& x, double y);

  const ManifoldKind& kind() const { return kind_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const std::vector<ManifoldPoint>& points() const { return points_; }
  const std::vector<Ambient>& embedded() const { return embedded_; }
  const Eigen::VectorXd& values() const { return values_; }

  /// Index of the smallest observed value (first one on ties).
  std::size_t argmin() const;

 private:
  ManifoldKind kind_;
  std::vector<ManifoldPoint> points_;
  std::vector<Ambient> embedded_;
  Eigen::VectorXd values_;
};

double kernel_eval(const KernelParams& params, const ManifoldPoint& x,
                   const ManifoldPoint& z);
double kernel_ambient(const KernelParams& params, const Ambient& a,
                      const Ambient& b);

/// K(x_D, x_D) + sigma_n^2 I.
Eigen::MatrixXd gram_matrix(const KernelParams& params, const GpDataset& data);

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Immutable after construction; posterior queries are const and may run
/// concurrently.
class GpModel {
 public:
  /// Factorizes the regularized Gram matrix. When Cholesky fails, jitter
  /// 1e-10 * sigma_f^2 is added and escalated x10 up to 1e-4 * sigma_f^2;
  /// beyond that Error(IllConditioned) is thrown.
  GpModel(KernelParams params, GpDataset data);

  const KernelParams& params() const { return params_; }
  const GpDataset& data() const { return data_; }
  const ManifoldKind& kind() const { return data_.kind(); }

  /// Lower-triangular factor of gram_matrix() + jitter() * I.
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  /// (K + sigma_n^2 I)^{-1} y, through the jittered factor.
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }

  Posterior posterior(const ManifoldPoint& x) const;
  Posterior posterior_ambient(const Ambient& xt) const;

  /// k_i = R~(J(x_i), xt).
  Eigen::VectorXd cross_covariance(const Ambient& xt) const;
  /// Solves (K + sigma_n^2 I) w = rhs with the stored factor.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// -1/2 y^T alpha - sum log L_ii - n/2 log 2 pi.
  double log_marginal_likelihood() const;

 private:
  KernelParams params_;
  GpDataset data_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

struct HyperBounds {
  std::pair<double, double> lengthscale;
  std::pair<double, double> amplitude;
  std::pair<double, double> noise;

  /// Bounds scaled to the dataset: lengthscale in [0.01, 100] x the median
  /// embedded distance, amplitude in [1e-4, 1e4] x the second moment of y,
  /// noise in [1e-12, 1e-2] x that same second moment.
  static HyperBounds from_data(const GpDataset& data);
};

/// Median heuristic: lengthscale = median pairwise embedded distance,
/// amplitude = variance of y (floor 1e-6), noise = 1e-6 amplitude.
KernelParams default_params(const GpDataset& data);

struct FitOptions {
  int restarts = 4;         ///< random starts in addition to `init`
  int max_sweeps = 60;
  double initial_step = 1.0;  ///< in log-parameter units
  double min_step = 1e-3;
};

/// Maximizes the log marginal likelihood over log-parameters by a multistart
/// coordinate search clipped to `bounds`. Deterministic given `seed`. Throws
/// Error(FittingFailed) when no start yields a factorizable model.
KernelParams fit_hyperparams(const GpDataset& data, const KernelParams& init,
                             const HyperBounds& bounds, std::uint64_t seed,
                             const FitOptions& options = {});

}  // namespace manibo
