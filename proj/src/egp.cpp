#include "manibo/egp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "manibo/error.hpp"
#include "manibo/log.hpp"

namespace manibo {
namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

double second_moment(const Eigen::VectorXd& y) {
  return y.size() == 0 ? 1.0 : y.squaredNorm() / static_cast<double>(y.size());
}

double median_pairwise_distance(const GpDataset& data) {
  const auto& e = data.embedded();
  std::vector<double> d;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) d.push_back((e[i] - e[j]).norm());
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(d.begin(), mid));
  }
  return med > 1e-12 ? med : 1.0;
}

}  // namespace

void KernelParams::validate() const {
  if (!(std::isfinite(lengthscale) && lengthscale > 0) ||
      !(std::isfinite(amplitude) && amplitude > 0) ||
      !(std::isfinite(noise) && noise >= 0)) {
    std::ostringstream os;
    os << "invalid kernel parameters (lengthscale=" << lengthscale
       << ", amplitude=" << amplitude << ", noise=" << noise << ")";
    throw Error(ErrorCode::InvalidInput, os.str());
  }
}

// ---------------------------------------------------------------- dataset

void GpDataset::add(const ManifoldPoint& x, double y) {
  if (!(x.kind() == kind_)) {
    throw Error(ErrorCode::InvalidInput, "dataset holds " + kind_.name() +
                                             " points, got " + x.kind().name());
  }
  if (!std::isfinite(y)) {
    throw Error(ErrorCode::InvalidInput, "observed value is not finite");
  }
  points_.push_back(x);
  embedded_.push_back(embed(x));
  values_.conservativeResize(values_.size() + 1);
  values_(values_.size() - 1) = y;
}

std::size_t GpDataset::argmin() const {
  if (empty()) throw Error(ErrorCode::InvalidInput, "empty dataset");
  Eigen::Index idx = 0;
  values_.minCoeff(&idx);
  return static_cast<std::size_t>(idx);
}

// ---------------------------------------------------------------- kernel

double kernel_ambient(const KernelParams& params, const Ambient& a,
                      const Ambient& b) {
  const double d2 = (a - b).squaredNorm();
  return params.amplitude *
         std::exp(-d2 / (2.0 * params.lengthscale * params.lengthscale));
}

double kernel_eval(const KernelParams& params, const ManifoldPoint& x,
                   const ManifoldPoint& z) {
  if (!(x.kind() == z.kind())) {
    throw Error(ErrorCode::InvalidInput, "kernel between different manifolds");
  }
  return kernel_ambient(params, embed(x), embed(z));
}

Eigen::MatrixXd gram_matrix(const KernelParams& params, const GpDataset& data) {
  params.validate();
  if (data.empty()) throw Error(ErrorCode::InvalidInput, "empty dataset");
  const auto& e = data.embedded();
  const auto n = static_cast<Eigen::Index>(e.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = params.amplitude + params.noise;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = k(j, i) = kernel_ambient(params, e[i], e[j]);
    }
  }
  return k;
}

// ---------------------------------------------------------------- model

GpModel::GpModel(KernelParams params, GpDataset data)
    : params_(params), data_(std::move(data)) {
  const Eigen::MatrixXd gram = gram_matrix(params_, data_);
  const auto n = gram.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  double jitter = 0.0;
  for (;;) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram + jitter * eye);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      jitter_ = jitter;
      break;
    }
    jitter = jitter == 0.0 ? kJitterStart * params_.amplitude : jitter * 10.0;
    if (jitter > kJitterMax * params_.amplitude * (1.0 + 1e-9)) {
      throw Error(ErrorCode::IllConditioned,
                  "Gram matrix not factorizable after jitter escalation");
    }
  }
  if (jitter_ > 0.0) {
    std::ostringstream os;
    os << "Cholesky needed jitter " << jitter_;
    log::debug(os.str());
  }
  alpha_ = solve(data_.values());
}

Eigen::VectorXd GpModel::solve(const Eigen::VectorXd& rhs) const {
  const auto l = chol_.triangularView<Eigen::Lower>();
  return l.transpose().solve(l.solve(rhs));
}

Eigen::VectorXd GpModel::cross_covariance(const Ambient& xt) const {
  const auto& e = data_.embedded();
  Eigen::VectorXd k(static_cast<Eigen::Index>(e.size()));
  for (std::size_t i = 0; i < e.size(); ++i) {
    k(static_cast<Eigen::Index>(i)) = kernel_ambient(params_, e[i], xt);
  }
  return k;
}

Posterior GpModel::posterior_ambient(const Ambient& xt) const {
  const Eigen::VectorXd k = cross_covariance(xt);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  Posterior post{k.dot(alpha_), params_.amplitude - v.squaredNorm()};
  if (post.variance < 0.0) {
    std::ostringstream os;
    os << "posterior variance " << post.variance << " clamped to 0";
    log::debug(os.str());
    post.variance = 0.0;
  }
  return post;
}

Posterior GpModel::posterior(const ManifoldPoint& x) const {
  if (!(x.kind() == kind())) {
    throw Error(ErrorCode::InvalidInput, "query on " + x.kind().name() +
                                             " for a model on " + kind().name());
  }
  return posterior_ambient(embed(x));
}

double GpModel::log_marginal_likelihood() const {
  const double n = static_cast<double>(data_.size());
  return -0.5 * data_.values().dot(alpha_) -
         chol_.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------- fitting

HyperBounds HyperBounds::from_data(const GpDataset& data) {
  const double med = median_pairwise_distance(data);
  const double m2 = std::max(second_moment(data.values()), 1e-12);
  return {{1e-2 * med, 1e2 * med}, {1e-4 * m2, 1e4 * m2}, {1e-12 * m2, 1e-2 * m2}};
}

KernelParams default_params(const GpDataset& data) {
  KernelParams p;
  p.lengthscale = median_pairwise_distance(data);
  const auto& y = data.values();
  double var = 0.0;
  if (y.size() > 1) {
    var = (y.array() - y.mean()).square().sum() / static_cast<double>(y.size());
  }
  p.amplitude = std::max(var, 1e-6);
  p.noise = 1e-6 * p.amplitude;
  return p;
}

KernelParams fit_hyperparams(const GpDataset& data, const KernelParams& init,
                             const HyperBounds& bounds, std::uint64_t seed,
                             const FitOptions& options) {
  if (data.size() < 2) {
    throw Error(ErrorCode::InvalidInput, "hyperparameter fitting needs n >= 2");
  }
  using Theta = std::array<double, 3>;
  const Theta lo{std::log(bounds.lengthscale.first),
                 std::log(bounds.amplitude.first), std::log(bounds.noise.first)};
  const Theta hi{std::log(bounds.lengthscale.second),
                 std::log(bounds.amplitude.second), std::log(bounds.noise.second)};
  auto clip = [&](Theta t) {
    for (int i = 0; i < 3; ++i) t[i] = std::clamp(t[i], lo[i], hi[i]);
    return t;
  };
  auto to_params = [](const Theta& t) {
    return KernelParams{std::exp(t[0]), std::exp(t[1]), std::exp(t[2])};
  };
  auto score = [&](const Theta& t) {
    try {
      return GpModel(to_params(t), data).log_marginal_likelihood();
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  auto safe_log = [](double v, double floor) { return std::log(std::max(v, floor)); };
  std::vector<Theta> starts;
  starts.push_back(clip({safe_log(init.lengthscale, 1e-300),
                         safe_log(init.amplitude, 1e-300),
                         safe_log(init.noise, 1e-300)}));
  Rng rng(seed);
  for (int r = 0; r < options.restarts; ++r) {
    Theta t;
    for (int i = 0; i < 3; ++i) {
      t[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
    }
    starts.push_back(t);
  }

  Theta best{};
  double best_score = -std::numeric_limits<double>::infinity();
  for (const Theta& start : starts) {
    Theta t = start;
    double s = score(t);
    double step = options.initial_step;
    for (int sweep = 0; sweep < options.max_sweeps && step >= options.min_step;
         ++sweep) {
      bool improved = false;
      for (int i = 0; i < 3; ++i) {
        for (double dir : {1.0, -1.0}) {
          Theta c = t;
          c[i] += dir * step;
          c = clip(c);
          if (c[i] == t[i]) continue;
          const double cs = score(c);
          if (cs > s) {
            t = c;
            s = cs;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (s > best_score) {
      best_score = s;
      best = t;
    }
  }
  if (!std::isfinite(best_score)) {
    throw Error(ErrorCode::FittingFailed,
                "no hyperparameter start produced a factorizable model");
  }
  return to_params(best);
}

}  // namespace manibo
