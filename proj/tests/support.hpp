#pragma once

// Independent oracles for the tests. Nothing here calls into the library's
// geometry beyond constructing points, so agreement is a real check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "manibo/egp.hpp"
#include "manibo/manifolds.hpp"

namespace manibo::testing {

inline Eigen::MatrixXd gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Eigen-decomposition based function of a symmetric matrix.
template <class F>
Eigen::MatrixXd spectral(const Eigen::MatrixXd& s, F f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(s));
  Eigen::VectorXd d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(d(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::MatrixXd logm(const Eigen::MatrixXd& s) {
  return spectral(s, [](double x) { return std::log(x); });
}
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& s) {
  return spectral(s, [](double x) { return std::exp(x); });
}

/// Projector onto the column span of Y, Y (Y^T Y)^{-1} Y^T.
inline Eigen::MatrixXd span_projector(const Eigen::MatrixXd& y) {
  return y * (y.transpose() * y).inverse() * y.transpose();
}

/// The embedding computed from first principles.
inline Eigen::MatrixXd embed_oracle(const ManifoldPoint& x) {
  switch (x.kind().tag()) {
    case ManifoldTag::Sphere: return x.coords();
    case ManifoldTag::Grassmann: return span_projector(x.coords());
    case ManifoldTag::Spd: return logm(x.coords());
  }
  return {};
}

/// Random symmetric ambient perturbation (column vector for the sphere).
inline Eigen::MatrixXd random_ambient(const ManifoldKind& kind, Rng& rng) {
  Eigen::MatrixXd g = gaussian(kind.ambient_rows(), kind.ambient_cols(), rng);
  return kind.tag() == ManifoldTag::Sphere ? g : sym(g);
}

/// Spanning set of the tangent space of the embedded image at J(x), from
/// central differences of a local chart that does not use the library.
inline std::vector<Eigen::MatrixXd> fd_tangent_vectors(const ManifoldPoint& x,
                                                       double h = 1e-6) {
  std::vector<Eigen::MatrixXd> out;
  const Eigen::MatrixXd& c = x.coords();
  auto chart = [&](const Eigen::MatrixXd& coords) -> Eigen::MatrixXd {
    switch (x.kind().tag()) {
      case ManifoldTag::Sphere: return coords / coords.norm();
      case ManifoldTag::Grassmann: return span_projector(coords);
      case ManifoldTag::Spd: return logm(coords);
    }
    return {};
  };
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      if (x.kind().tag() == ManifoldTag::Spd && i > j) continue;
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(c.rows(), c.cols());
      e(i, j) = 1.0;
      if (x.kind().tag() == ManifoldTag::Spd) e(j, i) = 1.0;
      out.push_back((chart(c + h * e) - chart(c - h * e)) / (2 * h));
    }
  }
  return out;
}

/// Orthonormal basis (Frobenius) of the span of `vs`, dropping directions
/// whose singular value is below `rel_tol` times the largest.
inline std::vector<Eigen::MatrixXd> orthonormal_basis(const std::vector<Eigen::MatrixXd>& vs,
                                                      double rel_tol = 1e-6) {
  const Eigen::Index rows = vs.front().rows(), cols = vs.front().cols();
  Eigen::MatrixXd stack(rows * cols, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t k = 0; k < vs.size(); ++k) {
    stack.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(vs[k].data(), rows * cols);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack, Eigen::ComputeThinU);
  std::vector<Eigen::MatrixXd> basis;
  const double top = svd.singularValues()(0);
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    if (svd.singularValues()(k) < rel_tol * top) break;
    Eigen::VectorXd u = svd.matrixU().col(k);
    basis.push_back(Eigen::Map<Eigen::MatrixXd>(u.data(), rows, cols));
  }
  return basis;
}

inline double frob(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a.array() * b.array()).sum();
}

/// Orthogonal projection of g onto span(basis) for an orthonormal basis.
inline Eigen::MatrixXd project_onto(const std::vector<Eigen::MatrixXd>& basis,
                                    const Eigen::MatrixXd& g) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.rows(), g.cols());
  for (const auto& u : basis) out += frob(u, g) * u;
  return out;
}

/// Posterior from an explicit inverse of the regularized Gram matrix, with
/// the kernel evaluated on oracle embeddings.
struct DenseOracle {
  double mean;
  double variance;
};

inline DenseOracle dense_posterior(const KernelParams& p,
                                   const std::vector<ManifoldPoint>& pts,
                                   const Eigen::VectorXd& y, const ManifoldPoint& q) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  auto k = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return p.amplitude * std::exp(-(a - b).squaredNorm() / (2 * p.lengthscale * p.lengthscale));
  };
  std::vector<Eigen::MatrixXd> e;
  for (const auto& x : pts) e.push_back(embed_oracle(x));
  const Eigen::MatrixXd eq = embed_oracle(q);
  Eigen::MatrixXd kmat(n, n);
  Eigen::VectorXd kq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kq(i) = k(e[i], eq);
    for (Eigen::Index j = 0; j < n; ++j) kmat(i, j) = k(e[i], e[j]);
  }
  kmat.diagonal().array() += p.noise;
  const Eigen::MatrixXd inv = kmat.fullPivLu().inverse();
  return {kq.dot(inv * y), p.amplitude - kq.dot(inv * kq)};
}

/// Orthonormal (Frobenius) basis of the ambient space: unit vectors for the
/// sphere, E_ii and (E_ij + E_ji)/sqrt2 for symmetric matrices.
inline std::vector<Eigen::MatrixXd> ambient_basis(const ManifoldKind& kind) {
  std::vector<Eigen::MatrixXd> out;
  const int r = kind.ambient_rows(), c = kind.ambient_cols();
  if (kind.tag() == ManifoldTag::Sphere) {
    for (int i = 0; i < r; ++i) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(r, 1);
      e(i, 0) = 1.0;
      out.push_back(e);
    }
    return out;
  }
  for (int i = 0; i < r; ++i) {
    for (int j = i; j < c; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(r, c);
      e(i, j) = e(j, i) = i == j ? 1.0 : 1.0 / std::sqrt(2.0);
      out.push_back(e);
    }
  }
  return out;
}

/// Central-difference gradient of an ambient scalar field.
template <class F>
Eigen::MatrixXd fd_gradient(const ManifoldKind& kind, const Eigen::MatrixXd& xt, F f,
                            double h = 1e-5) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(xt.rows(), xt.cols());
  for (const auto& e : ambient_basis(kind)) g += (f(xt + h * e) - f(xt - h * e)) / (2 * h) * e;
  return g;
}

inline std::vector<ManifoldKind> test_kinds() {
  return {ManifoldKind::sphere(2), ManifoldKind::sphere(4), ManifoldKind::grassmann(1, 2),
          ManifoldKind::grassmann(2, 3), ManifoldKind::grassmann(2, 5), ManifoldKind::spd(2),
          ManifoldKind::spd(3)};
}

}  // namespace manibo::testing
