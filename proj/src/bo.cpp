#include "manibo/bo.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "manibo/error.hpp"
#include "manibo/log.hpp"

namespace manibo {
namespace {

constexpr double kDuplicateDistance = 1e-8;

// Stream identifiers for derive_seed; keep them distinct.
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kFitStream = 2;
constexpr std::uint64_t kAscentStream = 3;
constexpr std::uint64_t kDedupStream = 4;

double min_distance(const GpDataset& data, const ManifoldPoint& x) {
  const Ambient e = embed(x);
  double best = std::numeric_limits<double>::infinity();
  for (const Ambient& p : data.embedded()) best = std::min(best, (p - e).norm());
  return best;
}

}  // namespace

void BoConfig::validate() const {
  if (initial_design.empty() && init < 1) {
    throw Error(ErrorCode::InvalidInput, "initial design size must be >= 1");
  }
  if (iters < 0) throw Error(ErrorCode::InvalidInput, "iters must be >= 0");
  if (refit_every < 0) {
    throw Error(ErrorCode::InvalidInput, "refit_every must be >= 0");
  }
  if (ascent_step && !(*ascent_step > 0)) {
    throw Error(ErrorCode::InvalidInput, "ascent step must be positive");
  }
  if (kernel) kernel->validate();
  AscentConfig probe = ascent;
  probe.step = 1.0;
  probe.validate();
}

ManifoldPoint proposal_dedup(const GpDataset& data, const ManifoldPoint& x_next,
                             double lengthscale, Rng& rng) {
  if (data.empty() || min_distance(data, x_next) >= kDuplicateDistance) {
    return x_next;
  }
  const ManifoldKind& kind = data.kind();
  std::normal_distribution<double> normal(0.0, 1.0);
  ManifoldPoint x = x_next;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Ambient g(kind.ambient_rows(), kind.ambient_cols());
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
    TangentVector v = project_to_tangent(x, g);
    const double norm = v.direction.norm();
    if (norm < 1e-12) continue;
    v.direction /= norm;
    try {
      ManifoldPoint moved = exp_map(x, v, 0.1 * lengthscale);
      if (min_distance(data, moved) >= kDuplicateDistance) {
        log::debug("duplicate proposal perturbed away from the dataset");
        return moved;
      }
      x = std::move(moved);
    } catch (const Error&) {
      // Retraction hit a degenerate spot; draw another direction.
    }
  }
  throw Error(ErrorCode::IllConditioned,
              "could not move a duplicate proposal away from the dataset");
}

std::vector<ManifoldPoint> random_design(const ManifoldKind& kind, int k,
                                         std::uint64_t seed) {
  Rng rng(derive_seed(seed, kDesignStream));
  std::vector<ManifoldPoint> design;
  for (int i = 0; i < k; ++i) design.push_back(random_point(kind, rng));
  return design;
}

BoResult run(const Objective& objective, const BoConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };

  const std::vector<ManifoldPoint> design =
      config.initial_design.empty()
          ? random_design(objective.kind, config.init, config.seed)
          : config.initial_design;
  for (const auto& x : design) {
    if (!(x.kind() == objective.kind)) {
      throw Error(ErrorCode::InvalidInput, "initial design on the wrong manifold");
    }
  }

  BoResult result{design.front(), std::numeric_limits<double>::infinity(), {},
                  RunStatus::Completed, {}, KernelParams{}, 0};
  GpDataset data(objective.kind);

  auto oracle_distance = [&](const ManifoldPoint& x) -> std::optional<double> {
    if (!objective.oracle) return std::nullopt;
    return extrinsic_distance(x, objective.oracle->point);
  };
  auto abort = [&](const std::string& why) {
    result.status = RunStatus::Aborted;
    result.diagnostic = why;
    log::warn("eBO run aborted: " + why);
    return result;
  };
  // Evaluates f, rejecting non-finite values and exceptions from the callback.
  auto evaluate = [&](const ManifoldPoint& x, double& y) -> std::optional<std::string> {
    try {
      y = objective.eval(x);
    } catch (const std::exception& e) {
      return std::string("objective threw: ") + e.what();
    }
    ++result.evaluations;
    if (!std::isfinite(y)) {
      std::ostringstream os;
      os << "objective returned non-finite value " << y << " at evaluation "
         << result.evaluations;
      return os.str();
    }
    return std::nullopt;
  };

  for (const auto& x : design) {
    double y = 0.0;
    if (auto err = evaluate(x, y)) return abort(*err);
    data.add(x, y);
    if (y < result.f_best) {
      result.f_best = y;
      result.x_best = x;
    }
  }
  result.trace.records.push_back({0, std::nullopt, result.f_best, result.f_best,
                                  result.x_best, oracle_distance(result.x_best),
                                  result.evaluations, elapsed_ms()});

  KernelParams params = config.kernel.value_or(default_params(data));
  result.final_params = params;
  const bool fitting = config.refit_every > 0 && !config.kernel;
  Rng dedup_rng(derive_seed(config.seed, kDedupStream));
  const std::uint64_t fit_base = derive_seed(config.seed, kFitStream);
  const std::uint64_t ascent_base =
      derive_seed(config.seed ^ config.ascent.seed, kAscentStream);


  for (int s = 0; s < config.iters; ++s) {
    if (fitting && s % config.refit_every == 0 && data.size() >= 2) {
      try {
        params = fit_hyperparams(data, params, HyperBounds::from_data(data),
                                 derive_seed(fit_base, static_cast<std::uint64_t>(s)));
      } catch (const Error& e) {
        log::warn(std::string("hyperparameter fit failed, keeping previous: ") +
                  e.what());
      }
    }
    result.final_params = params;

    ManifoldPoint x_next = result.x_best;
    try {
      AcquisitionState state = AcquisitionState::from_model(GpModel(params, data));
      AscentConfig ascent = config.ascent;
      ascent.step = config.ascent_step.value_or(0.1 * params.lengthscale);
      ascent.seed = derive_seed(ascent_base, static_cast<std::uint64_t>(s));
      x_next = maximize(state, ascent).point;
      x_next = proposal_dedup(data, x_next, params.lengthscale, dedup_rng);
    } catch (const Error& e) {
      return abort(std::string("iteration ") + std::to_string(s + 1) + ": " +
                   e.what());
    }

    double y = 0.0;
    if (auto err = evaluate(x_next, y)) return abort(*err);
    data.add(x_next, y);
    if (y < result.f_best) {
      result.f_best = y;
      result.x_best = x_next;
    }
    result.trace.records.push_back({s + 1, x_next, y, result.f_best, result.x_best,
                                    oracle_distance(result.x_best),
                                    result.evaluations, elapsed_ms()});
  }
  return result;
}

}  // namespace manibo
