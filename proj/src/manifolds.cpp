#include "manibo/manifolds.hpp"

#include <cmath>
#include <sstream>

#include "manibo/error.hpp"

namespace manibo {
namespace {

constexpr double kStructuralTol = 1e-10;
constexpr double kDegenerateNorm = 1e-12;
constexpr double kEigenGap = 1e-10;
constexpr double kZeroStep = 1e-14;

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    fail(ErrorCode::InvalidInput, std::string(what) + ": non-finite entries");
  }
}

void require_ambient_shape(const ManifoldKind& kind, const Ambient& v) {
  if (v.rows() != kind.ambient_rows() || v.cols() != kind.ambient_cols()) {
    std::ostringstream os;
    os << "ambient vector of shape " << v.rows() << "x" << v.cols()
       << " does not match " << kind.name();
    fail(ErrorCode::InvalidInput, os.str());
  }
  require_finite(v, "ambient vector");
}

// Eigenvectors of the p largest eigenvalues of sym(v), largest first.
Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& v, int p) {
  const Eigen::MatrixXd s = linalg::symmetrize(v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) {
    fail(ErrorCode::InvalidInput, "eigendecomposition failed");
  }
  const int n = static_cast<int>(s.rows());
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  if (lambda(n - p) - lambda(n - p - 1) < kEigenGap) {
    std::ostringstream os;
    os << "eigenvalues " << p << " and " << p + 1
       << " coincide; subspace is ambiguous";
    fail(ErrorCode::AmbiguousSubspace, os.str());
  }
  Eigen::MatrixXd frame(n, p);
  for (int j = 0; j < p; ++j) frame.col(j) = eig.eigenvectors().col(n - 1 - j);
  return frame;
}

}  // namespace

// ---------------------------------------------------------------- kinds

ManifoldKind ManifoldKind::sphere(int n) {
  if (n < 1) fail(ErrorCode::InvalidInput, "sphere dimension must be >= 1");
  return {ManifoldTag::Sphere, n, 0};
}

ManifoldKind ManifoldKind::grassmann(int p, int n) {
  if (p < 1 || p >= n) {
    fail(ErrorCode::InvalidInput, "grassmann requires 1 <= p < n");
  }
  return {ManifoldTag::Grassmann, n, p};
}

ManifoldKind ManifoldKind::spd(int p) {
  if (p < 1) fail(ErrorCode::InvalidInput, "spd size must be >= 1");
  return {ManifoldTag::Spd, 0, p};
}

int ManifoldKind::intrinsic_dim() const {
  switch (tag_) {
    case ManifoldTag::Sphere: return n_;
    case ManifoldTag::Grassmann: return p_ * (n_ - p_);
    case ManifoldTag::Spd: return p_ * (p_ + 1) / 2;
  }
  return 0;
}

int ManifoldKind::ambient_dim() const {
  switch (tag_) {
    case ManifoldTag::Sphere: return n_ + 1;
    case ManifoldTag::Grassmann: return n_ * (n_ + 1) / 2;
    case ManifoldTag::Spd: return p_ * (p_ + 1) / 2;
  }
  return 0;
}

int ManifoldKind::ambient_rows() const {
  switch (tag_) {
    case ManifoldTag::Sphere: return n_ + 1;
    case ManifoldTag::Grassmann: return n_;
    case ManifoldTag::Spd: return p_;
  }
  return 0;
}

int ManifoldKind::ambient_cols() const {
  return tag_ == ManifoldTag::Sphere ? 1 : ambient_rows();
}

int ManifoldKind::coord_rows() const { return ambient_rows(); }

int ManifoldKind::coord_cols() const {
  switch (tag_) {
    case ManifoldTag::Sphere: return 1;
    case ManifoldTag::Grassmann: return p_;
    case ManifoldTag::Spd: return p_;
  }
  return 0;
}

std::string ManifoldKind::name() const {
  std::ostringstream os;
  switch (tag_) {
    case ManifoldTag::Sphere: os << "sphere(" << n_ << ")"; break;
    case ManifoldTag::Grassmann: os << "grassmann(" << p_ << "," << n_ << ")"; break;
    case ManifoldTag::Spd: os << "spd(" << p_ << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------- points

ManifoldPoint::ManifoldPoint(ManifoldKind kind, Eigen::MatrixXd coords)
    : kind_(kind), coords_(std::move(coords)) {
  if (coords_.rows() != kind_.coord_rows() ||
      coords_.cols() != kind_.coord_cols()) {
    std::ostringstream os;
    os << "coordinates of shape " << coords_.rows() << "x" << coords_.cols()
       << " do not match " << kind_.name();
    fail(ErrorCode::InvalidInput, os.str());
  }
  require_finite(coords_, "point coordinates");
  switch (kind_.tag()) {
    case ManifoldTag::Sphere:
      if (std::abs(coords_.norm() - 1.0) > kStructuralTol) {
        fail(ErrorCode::InvalidInput, "sphere point is not unit norm");
      }
      break;
    case ManifoldTag::Grassmann: {
      const Eigen::MatrixXd gram = coords_.transpose() * coords_;
      const Eigen::MatrixXd eye =
          Eigen::MatrixXd::Identity(kind_.p(), kind_.p());
      if ((gram - eye).cwiseAbs().maxCoeff() > kStructuralTol) {
        fail(ErrorCode::InvalidInput, "grassmann frame is not orthonormal");
      }
      break;
    }
    case ManifoldTag::Spd: {
      const double scale = std::max(1.0, coords_.cwiseAbs().maxCoeff());
      if ((coords_ - coords_.transpose()).cwiseAbs().maxCoeff() >
          kStructuralTol * scale) {
        fail(ErrorCode::InvalidInput, "spd matrix is not symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
          coords_, Eigen::EigenvaluesOnly);
      if (!(eig.eigenvalues().minCoeff() > 0.0)) {
        fail(ErrorCode::Domain, "spd matrix has a non-positive eigenvalue");
      }
      break;
    }
  }
}

// ---------------------------------------------------------------- maps

Ambient embed(const ManifoldPoint& x) {
  const auto& c = x.coords();
  switch (x.kind().tag()) {
    case ManifoldTag::Sphere: return c;
    case ManifoldTag::Grassmann: return c * c.transpose();
    case ManifoldTag::Spd: return linalg::sym_log(c);
  }
  return {};
}

ManifoldPoint unembed(const ManifoldKind& kind, const Ambient& v) {
  require_ambient_shape(kind, v);
  switch (kind.tag()) {
    case ManifoldTag::Sphere: {
      const double norm = v.norm();
      if (norm < kDegenerateNorm) {
        fail(ErrorCode::DegenerateProjection,
             "cannot project a vector of near-zero norm onto the sphere");
      }
      return {kind, v / norm};
    }
    case ManifoldTag::Grassmann:
      return {kind, top_eigenvectors(v, kind.p())};
    case ManifoldTag::Spd:
      return {kind, linalg::sym_exp(v)};
  }
  fail(ErrorCode::InvalidInput, "unknown manifold");
}

Ambient project_to_image(const ManifoldKind& kind, const Ambient& v) {
  require_ambient_shape(kind, v);
  switch (kind.tag()) {
    case ManifoldTag::Sphere:
    case ManifoldTag::Grassmann:
      return embed(unembed(kind, v));
    case ManifoldTag::Spd:
      return linalg::symmetrize(v);
  }
  return {};
}

TangentVector project_to_tangent(const ManifoldPoint& x, const Ambient& g) {
  const auto& kind = x.kind();
  require_ambient_shape(kind, g);
  switch (kind.tag()) {
    case ManifoldTag::Sphere: {
      const auto& c = x.coords();
      return {x, g - c.col(0).dot(g.col(0)) * c};
    }
    case ManifoldTag::Grassmann: {
      const Eigen::MatrixXd p = embed(x);
      const Eigen::MatrixXd s = linalg::symmetrize(g);
      const Eigen::MatrixXd ps = p * s;
      return {x, linalg::symmetrize(ps + ps.transpose() - 2.0 * ps * p)};
    }
    case ManifoldTag::Spd:
      return {x, linalg::symmetrize(g)};
  }
  return {x, g};
}

ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v,
                      double t) {
  if (!(x.kind() == v.base.kind())) {
    fail(ErrorCode::InvalidInput, "tangent vector based on another manifold");
  }
  require_ambient_shape(x.kind(), v.direction);
  const double speed = v.direction.norm();
  if (speed * std::abs(t) < kZeroStep) return x;

  if (x.kind().tag() == ManifoldTag::Sphere) {
    const double angle = t * speed;
    Eigen::MatrixXd y = std::cos(angle) * x.coords() +
                        std::sin(angle) * (v.direction / speed);
    y /= y.norm();
    return {x.kind(), std::move(y)};
  }
  return unembed(x.kind(), embed(x) + t * v.direction);
}

double extrinsic_distance(const ManifoldPoint& x, const ManifoldPoint& z) {
  if (!(x.kind() == z.kind())) {
    fail(ErrorCode::InvalidInput, "distance between points on " +
                                      x.kind().name() + " and " +
                                      z.kind().name());
  }
  return (embed(x) - embed(z)).norm();
}

double spd_intrinsic_distance(const ManifoldPoint& a, const ManifoldPoint& b) {
  if (a.kind().tag() != ManifoldTag::Spd || !(a.kind() == b.kind())) {
    fail(ErrorCode::InvalidInput,
         "log-Euclidean distance needs two spd points of equal size");
  }
  return (linalg::sym_log(a.coords()) - linalg::sym_log(b.coords())).norm();
}

ManifoldPoint random_point(const ManifoldKind& kind, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
  };
  switch (kind.tag()) {
    case ManifoldTag::Sphere:
      for (;;) {
        Eigen::MatrixXd g = gaussian(kind.n() + 1, 1);
        const double norm = g.norm();
        if (norm > 1e-8) return {kind, g / norm};
      }
    case ManifoldTag::Grassmann:
      return {kind, linalg::orthonormalize(gaussian(kind.n(), kind.p()))};
    case ManifoldTag::Spd: {
      const Eigen::MatrixXd a = gaussian(kind.p(), kind.p());
      return {kind, linalg::sym_exp(linalg::symmetrize(a))};
    }
  }
  fail(ErrorCode::InvalidInput, "unknown manifold");
}

ManifoldPoint random_point(const ManifoldKind& kind, std::uint64_t seed) {
  Rng rng(seed);
  return random_point(kind, rng);
}

Eigen::VectorXd flatten(const ManifoldKind& kind, const Ambient& v) {
  require_ambient_shape(kind, v);
  if (kind.tag() == ManifoldTag::Sphere) return v.col(0);
  const int n = static_cast<int>(v.rows());
  const double root2 = std::sqrt(2.0);
  Eigen::VectorXd flat(kind.ambient_dim());
  int k = 0;
  for (int i = 0; i < n; ++i) {
    flat(k++) = v(i, i);
    for (int j = i + 1; j < n; ++j) {
      flat(k++) = root2 * 0.5 * (v(i, j) + v(j, i));
    }
  }
  return flat;
}

Ambient unflatten(const ManifoldKind& kind, const Eigen::VectorXd& flat) {
  if (flat.size() != kind.ambient_dim()) {
    fail(ErrorCode::InvalidInput, "flat vector length does not match " +
                                      kind.name());
  }
  if (kind.tag() == ManifoldTag::Sphere) return flat;
  const int n = kind.ambient_rows();
  const double inv_root2 = 1.0 / std::sqrt(2.0);
  Ambient v(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    v(i, i) = flat(k++);
    for (int j = i + 1; j < n; ++j) {
      v(i, j) = v(j, i) = inv_root2 * flat(k++);
    }
  }
  return v;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------- linalg

namespace linalg {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd sym_log(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(s));
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) {
    fail(ErrorCode::Domain, "matrix logarithm of a non-positive-definite matrix");
  }
  const Eigen::MatrixXd& q = eig.eigenvectors();
  return symmetrize(q * lambda.array().log().matrix().asDiagonal() *
                    q.transpose());
}

Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(m));
  const Eigen::MatrixXd& q = eig.eigenvectors();
  return symmetrize(q * eig.eigenvalues().array().exp().matrix().asDiagonal() *
                    q.transpose());
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(cols)
                                .triangularView<Eigen::Upper>();
  // Positive diagonal of R makes the factorization unique.
  for (int j = 0; j < cols; ++j) {
    if (std::abs(r(j, j)) < kDegenerateNorm) {
      fail(ErrorCode::DegenerateProjection, "matrix is column-rank deficient");
    }
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace linalg
}  // namespace manibo
