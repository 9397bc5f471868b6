#include "manibo/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "manibo/error.hpp"

namespace manibo {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::optional<double> oracle_distance(const Objective& obj, const ManifoldPoint& x) {
  if (!obj.oracle) return std::nullopt;
  return extrinsic_distance(x, obj.oracle->point);
}

}  // namespace

GdResult riemannian_gd(const GradObjective& objective, const ManifoldPoint& x0,
                       const GdOptions& options) {
  const Objective& base = objective.base;
  const auto t0 = Clock::now();
  GdResult res{x0, base.eval(x0), {}, 0, 0, 0};
  if (!std::isfinite(res.f)) {
    throw Error(ErrorCode::InvalidInput, "objective is not finite at the start point");
  }
  int cost = 0;
  auto over_budget = [&](int needed) {
    return options.max_cost > 0 && cost + needed > options.max_cost;
  };
  res.trace.records.push_back({0, x0, res.f, res.f, x0, oracle_distance(base, x0),
                               0, ms_since(t0)});

  while (res.iterations < options.max_iters && !over_budget(2)) {
    TangentVector dir = project_to_tangent(res.x, objective.grad(res.x));
    ++res.grad_evals;
    ++cost;
    if (!(dir.direction.norm() >= options.tol)) break;
    dir.direction = -dir.direction;

    double step = options.step;
    std::optional<ManifoldPoint> next;
    double f_next = res.f;
    for (int h = 0; h <= options.max_halvings && !over_budget(1); ++h) {
      std::optional<ManifoldPoint> trial;
      try {
        trial.emplace(exp_map(res.x, dir, step));
      } catch (const Error&) {
        // Step left the representable domain; shrink without charging f.
        step *= 0.5;
        continue;
      }
      const double f_trial = base.eval(*trial);
      ++res.f_evals;
      ++cost;
      if (f_trial < res.f) {
        next = std::move(trial);
        f_next = f_trial;
        break;
      }
      step *= 0.5;
    }
    if (!next) break;
    res.x = std::move(*next);
    res.f = f_next;
    ++res.iterations;
    res.trace.records.push_back({res.iterations, res.x, res.f, res.f, res.x,
                                 oracle_distance(base, res.x), cost, ms_since(t0)});
  }
  return res;
}

NelderMeadResult nelder_mead(const Objective& objective, const ManifoldPoint& x0,
                             const NelderMeadOptions& options) {
  const ManifoldKind& kind = objective.kind;
  if (!(x0.kind() == kind)) {
    throw Error(ErrorCode::InvalidInput, "start point on the wrong manifold");
  }
  const auto t0 = Clock::now();
  const int dim = kind.ambient_dim();
  const double inf = std::numeric_limits<double>::infinity();

  NelderMeadResult res{x0, inf, {}, 0};

  struct Vertex {
    Eigen::VectorXd flat;
    double f;
    std::optional<ManifoldPoint> point;
  };

  auto exhausted = [&] { return res.evaluations >= options.max_evals; };
  auto evaluate_point = [&](const ManifoldPoint& p) {
    double f = objective.eval(p);
    if (!std::isfinite(f)) f = inf;
    ++res.evaluations;
    if (f < res.f) {
      res.f = f;
      res.x = p;
    }
    res.trace.records.push_back({res.evaluations, p, f, res.f, res.x,
                                 oracle_distance(objective, res.x), res.evaluations,
                                 ms_since(t0)});
    return f;
  };
  auto make_vertex = [&](const Eigen::VectorXd& flat) {
    Vertex v{flat, inf, std::nullopt};
    try {
      v.point.emplace(unembed(kind, unflatten(kind, flat)));
    } catch (const Error&) {
      return v;  // rejected candidate, never shown to f
    }
    v.f = evaluate_point(*v.point);
    return v;
  };

  std::vector<Vertex> simplex;
  simplex.reserve(static_cast<std::size_t>(dim) + 1);
  const Eigen::VectorXd origin = flatten(kind, embed(x0));
  simplex.push_back({origin, evaluate_point(x0), x0});
  for (int i = 0; i < dim && !exhausted(); ++i) {
    Eigen::VectorXd v = origin;
    v(i) += options.initial_size;
    simplex.push_back(make_vertex(v));
  }
  if (static_cast<int>(simplex.size()) < dim + 1) return res;

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  // Rejected candidates consume no evaluations; the guard bounds the loop.
  const long max_rounds = 100L * options.max_evals + 1000;
  for (long round = 0; round < max_rounds && !exhausted(); ++round) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    double diameter = 0.0;
    for (int i = 1; i <= dim; ++i) {
      diameter = std::max(diameter, (simplex[i].flat - simplex[0].flat).norm());
    }
    if (diameter < options.tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) centroid += simplex[i].flat;
    centroid /= dim;
    Vertex& worst = simplex[dim];

    Vertex reflected = make_vertex(centroid + (centroid - worst.flat));
    if (reflected.f < simplex[0].f) {
      if (exhausted()) {
        worst = std::move(reflected);
        break;
      }
      Vertex expanded = make_vertex(centroid + 2.0 * (centroid - worst.flat));
      worst = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
      continue;
    }
    if (reflected.f < simplex[dim - 1].f) {
      worst = std::move(reflected);
      continue;
    }
    if (exhausted()) break;
    if (reflected.f < worst.f) {
      Vertex outside = make_vertex(centroid + 0.5 * (reflected.flat - centroid));
      if (outside.f <= reflected.f) {
        worst = std::move(outside);
        continue;
      }
    } else {
      Vertex inside = make_vertex(centroid + 0.5 * (worst.flat - centroid));
      if (inside.f < worst.f) {
        worst = std::move(inside);
        continue;
      }
    }
    for (int i = 1; i <= dim && !exhausted(); ++i) {
      simplex[i] = make_vertex(simplex[0].flat + 0.5 * (simplex[i].flat - simplex[0].flat));
    }
  }
  return res;
}

}  // namespace manibo
