#pragma once

// Objective constructions with known optima: extrinsic Frechet means, subspace
// matrix approximation on the Grassmannian, and kernel regression with SPD
// responses.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "manibo/baselines.hpp"
#include "manibo/bo.hpp"
#include "manibo/manifolds.hpp"

namespace manibo {

// ---------------------------------------------------------------- Frechet

struct FrechetProblem {
  std::vector<ManifoldPoint> data;
};

/// `count` equispaced points on the circle of latitude at height z of S^2.
FrechetProblem latitude_circle(int count, double z);

/// P(mean of J(x_i)). Throws Error(DegenerateProjection) when the embedded
/// average has no unique projection (e.g. antipodal data on the sphere).
ManifoldPoint extrinsic_mean_oracle(const FrechetProblem& problem);

/// x -> (1/n) sum ||J(x) - J(x_i)||^2, with the closed-form oracle attached
/// when it exists.
Objective frechet_objective(const FrechetProblem& problem);

/// frechet_objective plus its ambient gradient 2 (J(x) - mean J(x_i)).
GradObjective frechet_grad_objective(const FrechetProblem& problem);

// ---------------------------------------------------------------- Grassmann

struct GrassmannApproxProblem {
  Eigen::MatrixXd F;  ///< n x m, rank n
  int p;

  ManifoldKind kind() const { return ManifoldKind::grassmann(p, static_cast<int>(F.rows())); }
  /// Throws Error(InvalidInput) unless rank(F) = n and 1 <= p < n <= m.
  void validate() const;
};

/// Seeded Gaussian n x m matrix, redrawn until its rank is n.
GrassmannApproxProblem random_grassmann_problem(int n, int m, int p,
                                                std::uint64_t seed);

/// Column-wise least squares W_j = (X^T X)^{-1} X^T F_j.
Eigen::MatrixXd approx_weights(const Eigen::MatrixXd& X, const Eigen::MatrixXd& F);
/// ||X W - F||_F with W = approx_weights(X, F).
double approx_error(const Eigen::MatrixXd& X, const Eigen::MatrixXd& F);

Objective grassmann_objective(const GrassmannApproxProblem& problem);

struct SvdOracle {
  ManifoldPoint frame;  ///< leading p left singular vectors
  double value;         ///< sqrt(sum_{j>p} sigma_j^2)
  bool unique;          ///< false when sigma_p and sigma_{p+1} coincide
};

/// Needs only the shape constraints; rank-deficient F is allowed.
SvdOracle svd_oracle(const GrassmannApproxProblem& problem);

/// Initial points U_hat + i(-1)^i / 2 (entrywise shift), i = 1..count, each
/// retracted onto the Grassmannian through unembed(X X^T).
std::vector<ManifoldPoint> shifted_svd_design(const GrassmannApproxProblem& problem,
                                              int count);

// ---------------------------------------------------------------- SPD

struct SpdRegressionProblem {
  std::vector<double> z;           ///< covariates (arc lengths)
  std::vector<ManifoldPoint> y;    ///< SPD responses
  double bandwidth = 0.1;          ///< h
  double query = 0.5;              ///< z at which g(z) is estimated

  ManifoldKind kind() const { return y.front().kind(); }
  void validate() const;
  SpdRegressionProblem at(double new_query) const;
};

/// y_i = exp(A0 + z_i A1 + noise E_i) with fixed symmetric A0, A1 and seeded
/// symmetric Gaussian E_i; z_i equispaced on [0, 1].
SpdRegressionProblem generate_spd_regression_data(int n, double noise,
                                                  std::uint64_t seed,
                                                  double bandwidth = 0.1);

/// (1/h) K_h(query, z_i) with the Gaussian K_h. Throws
/// Error(EmptyNeighborhood) when every weight is below 1e-300.
std::vector<double> regression_weights(const SpdRegressionProblem& problem);

/// y -> sum_i (1/h) K_h(z, z_i) d_LE(y, y_i)^2.
Objective spd_regression_objective(const SpdRegressionProblem& problem);
GradObjective spd_regression_grad_objective(const SpdRegressionProblem& problem);

/// exp(sum w_i log y_i / sum w_i), the minimizer of the objective above.
ManifoldPoint spd_weighted_mean_oracle(const SpdRegressionProblem& problem);

}  // namespace manibo
