#include "manibo/experiments.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "manibo/error.hpp"
#include "manibo/log.hpp"

namespace manibo {
namespace {

Ambient embedded_mean(const std::vector<ManifoldPoint>& points) {
  Ambient sum = embed(points.front());
  for (std::size_t i = 1; i < points.size(); ++i) sum += embed(points[i]);
  return sum / static_cast<double>(points.size());
}

std::optional<OracleOptimum> try_oracle(const std::function<ManifoldPoint()>& locate,
                                        const std::function<double(const ManifoldPoint&)>& f) {
  try {
    ManifoldPoint x = locate();
    const double v = f(x);
    return OracleOptimum{std::move(x), v};
  } catch (const Error& e) {
    log::debug(std::string("no closed-form optimum: ") + e.what());
    return std::nullopt;
  }
}

}  // namespace

// ---------------------------------------------------------------- Frechet

FrechetProblem latitude_circle(int count, double z) {
  if (count < 1 || !(std::abs(z) < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "latitude circle needs count >= 1 and |z| < 1");
  }
  const double radius = std::sqrt(1.0 - z * z);
  const auto kind = ManifoldKind::sphere(2);
  FrechetProblem problem;
  for (int i = 0; i < count; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / count;
    Eigen::Vector3d v(radius * std::cos(phi), radius * std::sin(phi), z);
    problem.data.emplace_back(kind, v.normalized());
  }
  return problem;
}

ManifoldPoint extrinsic_mean_oracle(const FrechetProblem& problem) {
  if (problem.data.empty()) {
    throw Error(ErrorCode::InvalidInput, "Frechet problem without data");
  }
  return unembed(problem.data.front().kind(), embedded_mean(problem.data));
}

Objective frechet_objective(const FrechetProblem& problem) {
  if (problem.data.empty()) {
    throw Error(ErrorCode::InvalidInput, "Frechet problem without data");
  }
  std::vector<Ambient> targets;
  for (const auto& x : problem.data) targets.push_back(embed(x));
  auto f = [targets](const ManifoldPoint& x) {
    const Ambient e = embed(x);
    double sum = 0.0;
    for (const Ambient& t : targets) sum += (e - t).squaredNorm();
    return sum / static_cast<double>(targets.size());
  };
  Objective obj{problem.data.front().kind(), f, std::nullopt};
  obj.oracle = try_oracle([&] { return extrinsic_mean_oracle(problem); }, f);
  return obj;
}

GradObjective frechet_grad_objective(const FrechetProblem& problem) {
  Objective base = frechet_objective(problem);
  const Ambient mean = embedded_mean(problem.data);
  auto grad = [mean](const ManifoldPoint& x) -> Ambient {
    return 2.0 * (embed(x) - mean);
  };
  return {std::move(base), grad};
}

// ---------------------------------------------------------------- Grassmann

namespace {

// Shape and finiteness only; the oracle and the objective are well defined
// for rank-deficient F as well.
void check_shape(const GrassmannApproxProblem& problem) {
  const auto n = problem.F.rows();
  const auto m = problem.F.cols();
  const int p = problem.p;
  if (n < 1 || m < n || p < 1 || p >= m || p >= n) {
    throw Error(ErrorCode::InvalidInput,
                "matrix approximation needs n <= m and 1 <= p < n");
  }
  if (!problem.F.allFinite()) throw Error(ErrorCode::InvalidInput, "F is not finite");
}

}  // namespace

void GrassmannApproxProblem::validate() const {
  check_shape(*this);
  const auto n = F.rows();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
  const auto& s = svd.singularValues();
  if (s(n - 1) <= 1e-10 * std::max(1.0, s(0))) {
    throw Error(ErrorCode::InvalidInput, "F must have full row rank");
  }
}

GrassmannApproxProblem random_grassmann_problem(int n, int m, int p,
                                                std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Eigen::MatrixXd F(n, m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) F(i, j) = normal(rng);
    GrassmannApproxProblem problem{F, p};
    try {
      problem.validate();
      return problem;
    } catch (const Error&) {
      if (p >= n || p < 1 || m < n || n < 1) throw;
    }
  }
}

Eigen::MatrixXd approx_weights(const Eigen::MatrixXd& X, const Eigen::MatrixXd& F) {
  if (X.rows() != F.rows()) {
    throw Error(ErrorCode::InvalidInput, "frame and F have different row counts");
  }
  const Eigen::MatrixXd gram = X.transpose() * X;
  return gram.ldlt().solve(X.transpose() * F);
}

double approx_error(const Eigen::MatrixXd& X, const Eigen::MatrixXd& F) {
  return (X * approx_weights(X, F) - F).norm();
}

Objective grassmann_objective(const GrassmannApproxProblem& problem) {
  check_shape(problem);
  const Eigen::MatrixXd F = problem.F;
  auto f = [F](const ManifoldPoint& x) { return approx_error(x.coords(), F); };
  Objective obj{problem.kind(), f, std::nullopt};
  const SvdOracle oracle = svd_oracle(problem);
  obj.oracle = OracleOptimum{oracle.frame, oracle.value};
  return obj;
}

SvdOracle svd_oracle(const GrassmannApproxProblem& problem) {
  check_shape(problem);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(problem.F, Eigen::ComputeFullU);
  const Eigen::VectorXd& s = svd.singularValues();
  const int p = problem.p;
  const auto n = s.size();
  double tail = 0.0;
  for (Eigen::Index j = p; j < n; ++j) tail += s(j) * s(j);
  const bool unique = p >= n || s(p - 1) - s(p) > 1e-10;
  if (!unique) log::warn("SVD oracle: sigma_p == sigma_{p+1}, optimum is not unique");
  Eigen::MatrixXd frame = svd.matrixU().leftCols(p);
  return {ManifoldPoint(problem.kind(), linalg::orthonormalize(frame)),
          std::sqrt(tail), unique};
}

std::vector<ManifoldPoint> shifted_svd_design(const GrassmannApproxProblem& problem,
                                              int count) {
  const SvdOracle oracle = svd_oracle(problem);
  std::vector<ManifoldPoint> design;
  for (int i = 1; i <= count; ++i) {
    const double shift = (i % 2 == 0 ? 1.0 : -1.0) * i / 2.0;
    const Eigen::MatrixXd X = oracle.frame.coords().array() + shift;
    design.push_back(unembed(problem.kind(), X * X.transpose()));
  }
  return design;
}

// ---------------------------------------------------------------- SPD

void SpdRegressionProblem::validate() const {
  if (z.empty() || z.size() != y.size()) {
    throw Error(ErrorCode::InvalidInput, "regression needs matching nonempty z and y");
  }
  if (!(bandwidth > 0) || !std::isfinite(bandwidth) || !std::isfinite(query)) {
    throw Error(ErrorCode::InvalidInput, "bandwidth must be positive and query finite");
  }
  for (const auto& yi : y) {
    if (yi.kind().tag() != ManifoldTag::Spd || !(yi.kind() == y.front().kind())) {
      throw Error(ErrorCode::InvalidInput, "responses must be SPD matrices of one size");
    }
  }
}

SpdRegressionProblem SpdRegressionProblem::at(double new_query) const {
  SpdRegressionProblem copy = *this;
  copy.query = new_query;
  return copy;
}

SpdRegressionProblem generate_spd_regression_data(int n, double noise,
                                                  std::uint64_t seed,
                                                  double bandwidth) {
  if (n < 2 || !(noise >= 0)) {
    throw Error(ErrorCode::InvalidInput, "generator needs n >= 2 and noise >= 0");
  }
  // Smooth curve in log coordinates; one dominant diffusion direction.
  Eigen::Matrix3d a0;
  a0 << 0.8, 0.1, 0.05,
        0.1, -0.2, 0.0,
        0.05, 0.0, -0.4;
  Eigen::Matrix3d a1;
  a1 << 0.4, -0.2, 0.1,
        -0.2, 0.3, 0.05,
        0.1, 0.05, -0.1;
  const auto kind = ManifoldKind::spd(3);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SpdRegressionProblem problem;
  problem.bandwidth = bandwidth;
  for (int i = 0; i < n; ++i) {
    const double zi = static_cast<double>(i) / (n - 1);
    Eigen::Matrix3d e;
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < 3; ++r) e(r, c) = normal(rng);
    const Eigen::MatrixXd log_y = a0 + zi * a1 + noise * linalg::symmetrize(e);
    problem.z.push_back(zi);
    problem.y.emplace_back(kind, linalg::sym_exp(log_y));
  }
  return problem;
}

std::vector<double> regression_weights(const SpdRegressionProblem& problem) {
  problem.validate();
  const double h = problem.bandwidth;
  std::vector<double> w;
  bool any = false;
  for (double zi : problem.z) {
    const double u = (problem.query - zi) / h;
    const double wi = std::exp(-0.5 * u * u) / h;
    any = any || wi >= 1e-300;
    w.push_back(wi);
  }
  if (!any) {
    std::ostringstream os;
    os << "no covariate within reach of query " << problem.query
       << " at bandwidth " << h;
    throw Error(ErrorCode::EmptyNeighborhood, os.str());
  }
  return w;
}

Objective spd_regression_objective(const SpdRegressionProblem& problem) {
  const std::vector<double> w = regression_weights(problem);
  std::vector<Ambient> logs;
  for (const auto& yi : problem.y) logs.push_back(embed(yi));
  auto f = [w, logs](const ManifoldPoint& y) {
    const Ambient ly = embed(y);
    double sum = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) sum += w[i] * (ly - logs[i]).squaredNorm();
    return sum;
  };
  Objective obj{problem.kind(), f, std::nullopt};
  obj.oracle = try_oracle([&] { return spd_weighted_mean_oracle(problem); }, f);
  return obj;
}

GradObjective spd_regression_grad_objective(const SpdRegressionProblem& problem) {
  Objective base = spd_regression_objective(problem);
  const std::vector<double> w = regression_weights(problem);
  double total = 0.0;
  Ambient weighted = Ambient::Zero(problem.kind().p(), problem.kind().p());
  for (std::size_t i = 0; i < w.size(); ++i) {
    weighted += w[i] * embed(problem.y[i]);
    total += w[i];
  }
  auto grad = [weighted, total](const ManifoldPoint& y) -> Ambient {
    return 2.0 * (total * embed(y) - weighted);
  };
  return {std::move(base), grad};
}

ManifoldPoint spd_weighted_mean_oracle(const SpdRegressionProblem& problem) {
  const std::vector<double> w = regression_weights(problem);
  double total = 0.0;
  Ambient acc = Ambient::Zero(problem.kind().p(), problem.kind().p());
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i] * embed(problem.y[i]);
    total += w[i];
  }
  return unembed(problem.kind(), acc / total);
}

}  // namespace manibo
