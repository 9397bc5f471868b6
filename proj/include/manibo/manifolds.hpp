#pragma once

// Supported manifolds, their embeddings into a Euclidean space and the
// projections / retractions the optimizers need.
//
// Every ambient quantity is stored as a dense matrix: a column vector for the
// sphere, a full symmetric matrix for the Grassmannian (projector embedding)
// and for SPD matrices (log embedding). The Frobenius inner product on those
// matrices is the Euclidean inner product of the embedding space; flatten()
// turns it into an explicit R^D vector using the sqrt(2) off-diagonal scaling.

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace manibo {

using Ambient = Eigen::MatrixXd;
using Rng = std::mt19937_64;

enum class ManifoldTag { Sphere, Grassmann, Spd };

class ManifoldKind {
 public:
  /// Unit sphere S^n in R^{n+1}.
  static ManifoldKind sphere(int n);
  /// p-dimensional subspaces of R^n, 1 <= p < n.
  static ManifoldKind grassmann(int p, int n);
  /// p x p symmetric positive definite matrices.
  static ManifoldKind spd(int p);

  ManifoldTag tag() const { return tag_; }
  int n() const { return n_; }
  int p() const { return p_; }

  int intrinsic_dim() const;
  int ambient_dim() const;
  /// Shape of the dense ambient representation.
  int ambient_rows() const;
  int ambient_cols() const;
  /// Shape of the native point coordinates.
  int coord_rows() const;
  int coord_cols() const;

  /// "sphere(2)", "grassmann(2,3)", "spd(3)".
  std::string name() const;

  bool operator==(const ManifoldKind&) const = default;

 private:
  ManifoldKind(ManifoldTag tag, int n, int p) : tag_(tag), n_(n), p_(p) {}

  ManifoldTag tag_;
  int n_;
  int p_;
};

/// A validated point in native coordinates: unit vector, orthonormal frame,
/// or SPD matrix.
class ManifoldPoint {
 public:
  /// Validates the invariants of `kind`; throws Error on violation.
  ManifoldPoint(ManifoldKind kind, Eigen::MatrixXd coords);

  const ManifoldKind& kind() const { return kind_; }
  const Eigen::MatrixXd& coords() const { return coords_; }

 private:
  ManifoldKind kind_;
  Eigen::MatrixXd coords_;
};

struct TangentVector {
  ManifoldPoint base;
  Ambient direction;
};

/// J(x): identity on the sphere, X X^T on the Grassmannian, log(S) on SPD.
Ambient embed(const ManifoldPoint& x);

/// Inverse of embed composed with the nearest-point projection onto the image.
ManifoldPoint unembed(const ManifoldKind& kind, const Ambient& v);

/// Closest point of the embedded image to `v`. Idempotent.
Ambient project_to_image(const ManifoldKind& kind, const Ambient& v);

/// Orthogonal projection of an ambient vector onto the tangent space of the
/// image at J(x).
TangentVector project_to_tangent(const ManifoldPoint& x, const Ambient& g);

/// Sphere: exact geodesic. Grassmann and SPD: projection retraction
/// unembed(J(x) + t v), which agrees with the exponential map to first order.
ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v, double t);

/// ||J(x) - J(z)||, Euclidean on the sphere and Frobenius otherwise.
double extrinsic_distance(const ManifoldPoint& x, const ManifoldPoint& z);

/// Log-Euclidean distance ||log a - log b||_F.
double spd_intrinsic_distance(const ManifoldPoint& a, const ManifoldPoint& b);

ManifoldPoint random_point(const ManifoldKind& kind, Rng& rng);
ManifoldPoint random_point(const ManifoldKind& kind, std::uint64_t seed);

/// Flat R^D coordinates of an ambient quantity. Symmetric matrices are packed
/// as the upper triangle with off-diagonal entries scaled by sqrt(2), so the
/// flat dot product equals the Frobenius inner product.
Eigen::VectorXd flatten(const ManifoldKind& kind, const Ambient& v);
Ambient unflatten(const ManifoldKind& kind, const Eigen::VectorXd& flat);

/// Frobenius inner product of two ambient quantities.
inline double ambient_dot(const Ambient& a, const Ambient& b) {
  return a.cwiseProduct(b).sum();
}

/// Independent stream seed derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

namespace linalg {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);
/// Matrix logarithm of a symmetric positive definite matrix; throws
/// Error(Domain) when an eigenvalue is <= 0.
Eigen::MatrixXd sym_log(const Eigen::MatrixXd& s);
/// Matrix exponential of the symmetric part of `m`.
Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& m);
/// Orthonormal basis of the column space of a full-column-rank matrix.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m);

}  // namespace linalg

}  // namespace manibo
