#include "manibo/acquisition.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <vector>

#include "manibo/error.hpp"

namespace manibo {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

AcquisitionState AcquisitionState::make(GpModel model, double f_best) {
  if (!std::isfinite(f_best)) {
    throw Error(ErrorCode::InvalidInput, "f_best must be finite");
  }
  const double floor = 1e-12 * std::sqrt(model.params().amplitude);
  return {std::move(model), f_best, floor};
}

AcquisitionState AcquisitionState::from_model(GpModel model) {
  const auto& data = model.data();
  const double best = data.values()(static_cast<Eigen::Index>(data.argmin()));
  return make(std::move(model), best);
}

void AscentConfig::validate() const {
  if (!(step > 0) || max_steps < 1 || !(grad_tol > 0) || n_starts < 1 ||
      max_halvings < 0) {
    throw Error(ErrorCode::InvalidInput, "ascent configuration must be positive");
  }
}

AscentConfig AscentConfig::defaults_for(const KernelParams& params) {
  AscentConfig c;
  c.step = 0.1 * params.lengthscale;
  return c;
}

namespace {

struct PiTerms {
  double r;
  double sigma;
  bool floored;
};

PiTerms pi_terms(const AcquisitionState& s, const Posterior& post) {
  const double sd = std::sqrt(post.variance);
  const bool floored = !(sd > s.sigma_floor);
  const double sigma = floored ? s.sigma_floor : sd;
  return {(s.f_best - post.mean) / sigma, sigma, floored};
}

}  // namespace

double pi_value_ambient(const AcquisitionState& state, const Ambient& xt) {
  return normal_cdf(pi_terms(state, state.model.posterior_ambient(xt)).r);
}

double pi_value(const AcquisitionState& state, const ManifoldPoint& x) {
  return normal_cdf(pi_terms(state, state.model.posterior(x)).r);
}

namespace {

struct ScoreGradient {
  double r;
  Ambient grad_r;
};

ScoreGradient score_gradient(const AcquisitionState& state, const Ambient& xt) {
  const GpModel& model = state.model;
  const double ell2 = model.params().lengthscale * model.params().lengthscale;
  const auto& e = model.data().embedded();

  const Eigen::VectorXd k = model.cross_covariance(xt);
  const Eigen::VectorXd w = model.solve(k);
  Posterior post{k.dot(model.alpha()), model.params().amplitude - k.dot(w)};
  if (post.variance < 0.0) post.variance = 0.0;
  const PiTerms t = pi_terms(state, post);

  // d k_i / d xt = k_i (J(x_i) - xt) / ell^2
  Ambient grad_mean = Ambient::Zero(xt.rows(), xt.cols());
  Ambient grad_var = grad_mean;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Ambient dk = (k(ii) / ell2) * (e[i] - xt);
    grad_mean += model.alpha()(ii) * dk;
    grad_var -= 2.0 * w(ii) * dk;
  }
  ScoreGradient out{t.r, -grad_mean / t.sigma};
  if (!t.floored) {
    const Ambient grad_sigma = grad_var / (2.0 * t.sigma);
    out.grad_r -= (t.r / t.sigma) * grad_sigma;
  }
  return out;
}

}  // namespace

Ambient pi_gradient_at(const AcquisitionState& state, const Ambient& xt) {
  const ScoreGradient sg = score_gradient(state, xt);
  const double density = normal_pdf(sg.r);
  if (density == 0.0 || !std::isfinite(density)) {
    return Ambient::Zero(xt.rows(), xt.cols());
  }
  return density * sg.grad_r;
}

Ambient pi_gradient_ambient(const AcquisitionState& state,
                            const ManifoldPoint& x) {
  return pi_gradient_at(state, embed(x));
}

AscentResult ascend(const AcquisitionState& state, const AscentConfig& config,
                    const ManifoldPoint& x0) {
  config.validate();
  ManifoldPoint x = x0;
  double value = pi_value(state, x);
  AscentResult best{x, value, 0};
  double step = config.step;

  int steps = 0;
  while (steps < config.max_steps) {
    ++steps;
    TangentVector dir = project_to_tangent(x, pi_gradient_ambient(state, x));
    const double norm = dir.direction.norm();
    if (!(norm >= config.grad_tol) || norm == 0.0) break;
    dir.direction /= norm;

    std::optional<ManifoldPoint> next;
    double next_value = value;
    for (int h = 0; h <= config.max_halvings; ++h) {
      std::optional<ManifoldPoint> trial;
      try {
        trial.emplace(exp_map(x, dir, step));
      } catch (const Error&) {
        // Retraction left the representable domain; treat as a failed step.
      }
      if (trial) {
        const double trial_value = pi_value(state, *trial);
        if (trial_value > value) {
          next = std::move(trial);
          next_value = trial_value;
          break;
        }
      }
      step *= 0.5;
    }
    if (!next) break;
    x = std::move(*next);
    value = next_value;
    if (value > best.value) best = {x, value, 0};
    step = std::min(2.0 * step, config.step);
  }
  best.steps = steps;
  return best;
}

AscentResult maximize_from(const AcquisitionState& state,
                           const AscentConfig& config,
                           std::span<const ManifoldPoint> starts) {
  if (starts.empty()) {
    throw Error(ErrorCode::InvalidInput, "maximize needs at least one start");
  }
  std::optional<AscentResult> best;
  std::exception_ptr last_error;
  for (const ManifoldPoint& start : starts) {
    try {
      AscentResult r = ascend(state, config, start);
      if (!best || r.value > best->value) best.emplace(std::move(r));
    } catch (const Error&) {
      last_error = std::current_exception();
    }
  }
  if (!best) std::rethrow_exception(last_error);
  return *best;
}

AscentResult maximize(const AcquisitionState& state, const AscentConfig& config) {
  config.validate();
  const auto& data = state.model.data();
  std::vector<ManifoldPoint> starts;
  starts.reserve(static_cast<std::size_t>(config.n_starts));
  starts.push_back(data.points()[data.argmin()]);
  for (int i = 1; i < config.n_starts; ++i) {
    starts.push_back(random_point(
        data.kind(), derive_seed(config.seed, static_cast<std::uint64_t>(i))));
  }
  return maximize_from(state, config, starts);
}

}  // namespace manibo
